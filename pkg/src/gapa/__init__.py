"""Genetic-algorithm framework for perturbed-substructure optimization on graphs."""

__version__ = "0.1.0"
