"""Reference solutions for waves in frequency-dispersive equivalent-fluid absorbers."""

__version__ = "0.1.0"
