"""Independent oracles the tests check the library against.

Everything here is deliberately implemented without the library's own code
paths: matrix arithmetic for the Heisenberg law, exhaustive generator words
for the word metric, lattice-point counting for ball sizes, dense circle
sampling for operator norms, and plain partial sums for series values.
"""

from __future__ import annotations

import itertools
import math
from typing import Dict, Iterable, List, Tuple

import numpy as np


def heis_mult_matrix(x: Tuple[int, int, int], y: Tuple[int, int, int]) -> Tuple[int, int, int]:
    """Product via explicit 3x3 upper-triangular integer matrices."""

    def mat(t):
        a, b, c = t
        return np.array([[1, a, c], [0, 1, b], [0, 0, 1]], dtype=np.int64)

    m = mat(x) @ mat(y)
    return int(m[0, 1]), int(m[1, 2]), int(m[0, 2])


def heis_inv_matrix(x: Tuple[int, int, int]) -> Tuple[int, int, int]:
    """Inverse via float matrix inversion, rounded back to integers."""
    a, b, c = x
    m = np.array([[1.0, a, c], [0.0, 1.0, b], [0.0, 0.0, 1.0]])
    inv = np.linalg.inv(m)
    return int(round(inv[0, 1])), int(round(inv[1, 2])), int(round(inv[0, 2]))


def brute_force_word_lengths(identity, generators, multiply, n_max: int) -> Dict:
    """Minimum number of generators over all products of length <= n_max,
    by exhaustive enumeration (no BFS)."""
    best = {identity: 0}
    for n in range(1, n_max + 1):
        for word in itertools.product(generators, repeat=n):
            x = identity
            for g in word:
                x = multiply(x, g)
            if x not in best:
                best[x] = n
    return best


def z2_ball_size(n: int) -> int:
    """|{(a,b) : |a|+|b| <= n}| = 2n^2 + 2n + 1."""
    return 2 * n * n + 2 * n + 1


def z2_shell_size(n: int) -> int:
    return 1 if n == 0 else 4 * n


def circle_sup_norm(coeffs: Dict[int, complex], samples: int = 100_000) -> float:
    """sup_t |sum_k c_k e^{-ikt}| by dense sampling; the operator norm of a
    finitely supported function on Z."""
    ts = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    total = np.zeros_like(ts, dtype=complex)
    for k, c in coeffs.items():
        total += c * np.exp(-1j * k * ts)
    return float(np.abs(total).max())


def geometric_weighted_series(beta: float, ratio: float = 0.5, tol: float = 1e-16) -> float:
    """sum_{n>=0} ratio^n (1+n)^beta by partial sums to machine precision."""
    total = 0.0
    term = 1.0
    n = 0
    while True:
        term = ratio**n * (1.0 + n) ** beta
        if term < tol * max(total, 1.0) and n > 8:
            return total
        total += term
        n += 1


def convolve_z_dicts(f: Dict[int, complex], g: Dict[int, complex]) -> Dict[int, complex]:
    """Plain integer-index convolution on Z."""
    out: Dict[int, complex] = {}
    for i, ci in f.items():
        for j, cj in g.items():
            out[i + j] = out.get(i + j, 0j) + ci * cj
    return {k: v for k, v in out.items() if v != 0}


def adjacency_l2_norm(n: int) -> float:
    """||f^(n)||_2 for f = (delta_1 + delta_{-1})/2 on Z via binomial sums:
    coefficients are 2^-n C(n, j), so the squared norm is 4^-n C(2n, n)."""
    log_val = math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - 2 * n * math.log(2.0)
    return math.exp(0.5 * log_val)
