"""Counter-based random streams.

Monte Carlo kernels draw the ``c``-th 64-bit word of a stream keyed by ``key`` as
``splitmix64(key + (c + 1) * GOLDEN)``.  A word depends only on ``(key, c)``, so any
range of a stream can be produced independently, by either kernel backend, in any
order.  Stream keys are hashes of ``(seed, chunk index)``.

Digits of a p-biased word are read from 32-bit halves of these words: card ``i``
(0-based, i.e. card label ``i + 2``) of a sample uses word ``i // 2`` of that sample's
block, low half for even ``i``.  A half ``u`` maps to digit
``#{t : u >= thresholds[t]}`` (0-based), where ``thresholds[t] = round(2**32 * (p_1 + ... + p_{t+1}))``.
Each digit probability is therefore exact up to 2**-32.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """Scalar splitmix64 finalizer on a Python int."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *path: int) -> int:
    """Hash a seed and a path of non-negative integers into a 64-bit stream key."""
    k = splitmix64(int(seed) + GOLDEN)
    for idx in path:
        k = splitmix64(k ^ splitmix64((int(idx) + 1) * GOLDEN))
    return k


def mix_array(x: np.ndarray) -> np.ndarray:
    """Vectorised splitmix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64).copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


def stream_words(key: int, counters: np.ndarray) -> np.ndarray:
    """Words ``counters`` of stream ``key``."""
    c = np.asarray(counters, dtype=np.uint64)
    return mix_array(np.uint64(key) + (c + np.uint64(1)) * np.uint64(GOLDEN))


def digit_thresholds(weights) -> np.ndarray:
    """32-bit cut points turning a uniform 32-bit half into a digit with law ``weights``."""
    w = np.asarray(weights, dtype=np.float64)
    cum = np.cumsum(w)[:-1]
    thr = np.rint(cum * 2.0**32)
    return np.clip(thr, 0, 2.0**32).astype(np.uint64)
