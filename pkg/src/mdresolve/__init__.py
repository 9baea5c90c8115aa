"""Entity resolution with matching dependencies: rule language, chase,
collective blocking, SVM duplicate classification and merging."""

__version__ = "0.1.0"
