"""Experiment drivers, statistics and the command-line interface."""
