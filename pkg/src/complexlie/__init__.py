"""Complex Lie symmetry linearization toolkit."""

__version__ = "0.1.0"
