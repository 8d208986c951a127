"""Walsh-Hadamard transforms and binary noise operators on {0,1}^n.

Used by the simulator (fast exact output distributions of binary symmetric
channels) and by the anti-contractivity witness suites (Bonami-Beckner
smoothing of functions on the cube).
"""

from __future__ import annotations

import numpy as np

__all__ = ["walsh_hadamard", "xor_convolve", "popcounts", "noise_vector",
           "bonami_beckner_apply"]


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized WHT along axis 0 (length must be a power of two).

    Self-inverse up to the factor 2^n: walsh_hadamard(walsh_hadamard(v)) == 2^n v.
    """
    a = np.array(v, dtype=float, copy=True)
    m = a.shape[0]
    if m & (m - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < m:
        for i in range(0, m, 2 * h):
            x = a[i:i + h].copy()
            y = a[i + h:i + 2 * h].copy()
            a[i:i + h] = x + y
            a[i + h:i + 2 * h] = x - y
        h *= 2
    return a


def xor_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b)(x) = sum_z a(z) b(x xor z) over GF(2)^n."""
    fa = walsh_hadamard(a)
    fb = walsh_hadamard(b)
    return walsh_hadamard(fa * fb) / a.shape[0]


def popcounts(n: int) -> np.ndarray:
    """Hamming weights of 0 .. 2^n - 1."""
    w = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        w = np.concatenate([w, w + 1])
    return w


def noise_vector(n: int, eps: float) -> np.ndarray:
    """p(z) = eps^|z| (1-eps)^(n-|z|), the BSC(eps)^n noise law by integer index."""
    w = popcounts(n)
    return np.exp(w * np.log(eps) + (n - w) * np.log1p(-eps)) if 0 < eps < 1 else \
        (np.where(w == 0, 1.0, 0.0) if eps == 0 else np.where(w == n, 1.0, 0.0))


def bonami_beckner_apply(f: np.ndarray, eps: float) -> np.ndarray:
    """(T^(x) n f)(y) = E[f(Y xor Z)], Z ~ Bern(eps)^n: the Bonami-Beckner smoothing.

    Works on a vector of length 2^n or a (2^n, k) batch of functions.
    """
    m = f.shape[0]
    n = m.bit_length() - 1
    rho = 1.0 - 2.0 * eps
    scale = rho ** popcounts(n)
    if f.ndim == 1:
        return walsh_hadamard(scale * walsh_hadamard(f)) / m
    out = np.empty_like(f, dtype=float)
    for j in range(f.shape[1]):
        out[:, j] = walsh_hadamard(scale * walsh_hadamard(f[:, j])) / m
    return out
