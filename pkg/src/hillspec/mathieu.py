"""Characteristic values of -y'' + 2q cos(pi x) y on the period [-1, 1].

Independent of the matrix machinery: in the basis e^{ik pi x} the eigenproblem
is the three-term recurrence

    (k^2 pi^2 - lam) c_k + q (c_{k-1} + c_{k+1}) = 0,

which splits into even (c_{-k} = c_k) and odd (c_{-k} = -c_k, c_0 = 0)
families. Each family is a symmetric three-term recurrence (the even one after
rescaling c_0 by sqrt(2)). Eliminating forward gives the continued fraction

    p_0 = a_0 - lam,    p_k = (a_k - lam) - b_k^2 / p_{k-1},

and the number of negative p_k equals the number of characteristic values
below lam (Sturm). Each value is then pinned down by bisection on that count.

The even and odd values of one index become exponentially close as the index
grows; splitting by parity keeps them in separate problems, so no root
separation is needed. Standard Mathieu values relate by
lam = (pi^2 / 4) a(4 q / pi^2).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["forward_pivots", "count_below", "characteristic_values"]

_TINY = 1e-300


def _families(q: float, depth: int):
    even_a = [(k * math.pi) ** 2 for k in range(depth + 1)]
    even_b = [math.sqrt(2.0) * q] + [q] * (depth - 1)
    odd_a = [(k * math.pi) ** 2 for k in range(1, depth + 1)]
    odd_b = [q] * (depth - 1)
    return (even_a, even_b), (odd_a, odd_b)


def forward_pivots(a, b, lam: float) -> list[float]:
    """p_k = (a_k - lam) - b_k^2 / p_{k-1}; b_k couples indices k and k+1."""
    p = a[0] - lam
    out = [p]
    for k in range(1, len(a)):
        if p == 0.0:
            p = _TINY
        p = (a[k] - lam) - b[k - 1] ** 2 / p
        out.append(p)
    return out


def count_below(a, b, lam: float) -> int:
    return sum(p < 0 for p in forward_pivots(a, b, lam))


def _kth(a, b, j: int, lo: float, hi: float) -> float:
    # smallest x with count_below(x) > j
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return hi
        if count_below(a, b, mid) > j:
            hi = mid
        else:
            lo = mid


def characteristic_values(q: float, count: int, depth: int | None = None) -> np.ndarray:
    """The lowest ``count`` eigenvalues (with multiplicity), ascending."""
    depth = depth or count + 60
    lo = -(1.0 + math.sqrt(2.0)) * abs(q) - 1.0
    vals = []
    for a, b in _families(q, depth):
        hi = a[count] + 3.0 * abs(q) + 1.0 if len(a) > count else a[-1]
        for j in range(count):
            vals.append(_kth(a, b, j, lo, hi))
    vals.sort()
    return np.array(vals[:count])
