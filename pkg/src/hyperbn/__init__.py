"""Numerical toolkit for higher-order Brezis-Nirenberg problems on hyperbolic
space: sharp constants and existence thresholds, Green's/resolvent kernels,
radial Helgason transforms, and certified radial solutions on geodesic balls.
"""

from .core import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
