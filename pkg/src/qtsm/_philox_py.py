"""Pure-numpy Philox4x32-10 counter-based generator (fallback backend).

Bit-identical to the Cython kernel in ``_philox.pyx``: draw (path p, index j)
is produced from counter (j >> 1, 0, p_lo, p_hi) and key (seed_lo, seed_hi),
taking the upper or lower 64 output bits according to j & 1, and mapping to
a uniform via ((bits >> 11) + 0.5) * 2^-53.
"""

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ROUNDS = 10

BACKEND = "numpy"


def raw_blocks(seed, path_start, n_paths, n_blocks):
    """Philox output words (x0, x1, x2, x3), each shape (n_paths, n_blocks)."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    blocks = np.arange(n_blocks, dtype=np.uint64)
    paths = (np.uint64(path_start) + np.arange(n_paths, dtype=np.uint64))[:, None]

    c0 = np.broadcast_to(blocks & _MASK32, (n_paths, n_blocks)).copy()
    c1 = np.broadcast_to(blocks >> _S32, (n_paths, n_blocks)).copy()
    c2 = np.broadcast_to(paths & _MASK32, (n_paths, n_blocks)).copy()
    c3 = np.broadcast_to(paths >> _S32, (n_paths, n_blocks)).copy()
    k0 = np.uint64(seed & 0xFFFFFFFF)
    k1 = np.uint64(seed >> 32)

    for _ in range(_ROUNDS):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0 = (p1 >> _S32) ^ c1 ^ k0
        c2 = (p0 >> _S32) ^ c3 ^ k1
        c1 = p1 & _MASK32
        c3 = p0 & _MASK32
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def uniforms(seed, path_start, n_paths, draws_per_path):
    """Uniform (0, 1) doubles, shape (n_paths, draws_per_path)."""
    n_blocks = (draws_per_path + 1) // 2
    x0, x1, x2, x3 = raw_blocks(seed, path_start, n_paths, n_blocks)
    bits = np.empty((n_paths, 2 * n_blocks), dtype=np.uint64)
    bits[:, 0::2] = (x0 << _S32) | x1
    bits[:, 1::2] = (x2 << _S32) | x3
    bits = bits[:, :draws_per_path]
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)
