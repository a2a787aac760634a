"""Linear code ensembles built from extractors and lossless condensers."""

__version__ = "0.1.0"
