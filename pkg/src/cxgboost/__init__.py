"""Tree boosting with two-output leaves for potential-outcome estimation."""

from . import _numba_setup  # noqa: F401  (must precede numba kernels)
from .dataset import Dataset, read_csv, write_csv

__version__ = "0.1.0"

__all__ = ["Dataset", "read_csv", "write_csv", "__version__"]
