"""Counter-based splittable random numbers for the simulation oracles.

The generator is Philox4x32-10 addressed by (seed, path-index, draw-index):
path p always receives the same stream no matter how paths are batched,
ordered, or parallelized.  Normals are produced by the inverse-CDF method
applied to 53-bit uniforms.

Two interchangeable backends produce bit-identical output: a compiled
Cython kernel (preferred) and a vectorized numpy fallback selected at
import time when the extension is unavailable.
"""

import numpy as np
from scipy.special import ndtri

from . import _philox_py

try:
    from . import _philox
except ImportError:  # extension not built
    _philox = None

_impl = _philox if _philox is not None else _philox_py


def available_backends():
    names = ["numpy"]
    if _philox is not None:
        names.insert(0, "cython")
    return names


def backend_name():
    return _impl.BACKEND


def set_backend(name):
    """Force a backend ("cython" or "numpy"); used by tests and benchmarks."""
    global _impl
    if name == "numpy":
        _impl = _philox_py
    elif name == "cython":
        if _philox is None:
            raise RuntimeError("cython backend not built")
        _impl = _philox
    else:
        raise ValueError(f"unknown backend {name!r}")


def uniforms(seed, path_start, n_paths, draws_per_path):
    """Uniform (0, 1) doubles, shape (n_paths, draws_per_path)."""
    return _impl.uniforms(seed, path_start, n_paths, draws_per_path)


def normals(seed, path_start, n_paths, draws_per_path):
    """Standard normal doubles, shape (n_paths, draws_per_path)."""
    return ndtri(uniforms(seed, path_start, n_paths, draws_per_path))
