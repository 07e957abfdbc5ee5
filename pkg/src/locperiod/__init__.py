"""Exact and error-bounded local period computations for GL(2) over Q_p."""

__version__ = "0.1.0"
