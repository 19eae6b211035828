"""Build script for the optional Cython RNG kernel.

The package works without the extension (a vectorized numpy fallback is
selected at import time), so a failed cythonize is not fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("qtsm._philox", ["src/qtsm/_philox.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
