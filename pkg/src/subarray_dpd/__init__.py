"""Sub-array digital predistortion learned from a single combined feedback receiver."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
