"""Kernel backend selection: compiled extension if available, else pure Python.

Both backends expose the same functions with identical semantics; results
agree to floating-point roundoff (enforced by tests/test_core_backends.py).
"""

try:
    from . import _fastcore as _impl  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    from . import _pykernels as _impl

BACKEND = _impl.BACKEND
cgamma = _impl.cgamma
hyp2f1_neg = _impl.hyp2f1_neg
legendre_series = _impl.legendre_series
spherical_block = _impl.spherical_block
spherical_matrix = _impl.spherical_matrix
rk4_shoot = _impl.rk4_shoot

from . import _pykernels as python_backend  # noqa: E402  (benchmark reference)

__all__ = [
    "BACKEND", "cgamma", "hyp2f1_neg", "legendre_series",
    "spherical_block", "spherical_matrix", "rk4_shoot", "python_backend",
]
