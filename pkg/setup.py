"""Build script: compiles the optional Cython fast core.

The package works without the extension (pure-Python kernels are selected at
import time); the build therefore tolerates a missing compiler or Cython.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension(
            "hyperbn.core._fastcore",
            ["src/hyperbn/core/_fastcore.pyx"],
            include_dirs=[numpy.get_include()],
        )],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"hyperbn: building without compiled core ({exc})\n")

setup(ext_modules=ext_modules)
