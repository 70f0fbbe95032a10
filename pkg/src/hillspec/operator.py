"""Galerkin sections of the Fourier-space operator D_m + B(v).

Rows and columns are indexed by k = -K..K in ascending order. The diagonal part
is D_m(k, k) = (k pi)^{2m}; the potential part is the Toeplitz band
B(k, j) = v(k - j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seqspace import CoeffSeq, convolution_matrix

__all__ = [
    "OperatorSpec",
    "TruncatedOperator",
    "free_eigenvalue",
    "free_diagonal",
    "assemble",
    "is_formally_self_adjoint",
]


@dataclass(frozen=True)
class OperatorSpec:
    m: int
    v: CoeffSeq

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"order m must be an integer >= 1, got {self.m!r}")


def _ipow(x: float, e: int) -> float:
    # binary exponentiation; fixed multiplication order
    result = 1.0
    while e:
        if e & 1:
            result = result * x
        x = x * x
        e >>= 1
    return result


def free_eigenvalue(k: int, m: int) -> float:
    """(k pi)^{2m}, computed as (k^2 pi^2)^m by repeated squaring."""
    kp = k * math.pi
    return _ipow(kp * kp, m)


def free_diagonal(m: int, K: int) -> np.ndarray:
    """(k pi)^{2m} for k = -K..K, same arithmetic as free_eigenvalue."""
    kp = np.arange(-K, K + 1) * math.pi
    return _ipow(kp * kp, m)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Dense (2K+1) x (2K+1) section of D_m + B(v)."""

    K: int
    A: np.ndarray
    spec: OperatorSpec

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def diagonal(self) -> np.ndarray:
        return free_diagonal(self.spec.m, self.K)

    def restrict(self, K: int) -> np.ndarray:
        """The sub-block on the window [-K, K]."""
        if not 0 <= K <= self.K:
            raise ValueError("sub-window must lie inside the window")
        lo = self.K - K
        return self.A[lo:lo + 2 * K + 1, lo:lo + 2 * K + 1]

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.A, self.A.conj().T))

    def nonzero_entries(self):
        """Yield (k, j, value) for every nonzero matrix entry, row-major."""
        rows, cols = np.nonzero(self.A)
        for r, c in zip(rows.tolist(), cols.tolist()):
            yield r - self.K, c - self.K, complex(self.A[r, c])


def assemble(spec: OperatorSpec, K: int) -> TruncatedOperator:
    """A[k, j] = (k pi)^{2m} delta_{kj} + v(k - j) for k, j in [-K, K]."""
    if int(K) != K or K < 1:
        raise ValueError(f"window radius K must be an integer >= 1, got {K!r}")
    A = convolution_matrix(spec.v, K)
    A[np.diag_indices_from(A)] += free_diagonal(spec.m, K)
    A.setflags(write=False)
    return TruncatedOperator(K=int(K), A=A, spec=spec)


def is_formally_self_adjoint(v: CoeffSeq) -> bool:
    """True iff v(-k) == conj(v(k)) exactly for every k (the potential is real)."""
    return all(v[-k] == z.conjugate() for k, z in v)
