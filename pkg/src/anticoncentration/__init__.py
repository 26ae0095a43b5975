"""Anticoncentration of random Clifford circuits: exact formulas, tableau sampling and replica tensor networks."""

__version__ = "0.1.0"
