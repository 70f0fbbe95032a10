"""Eigenvalues of Galerkin sections, ordered lexicographically.

Three paths, chosen from the matrix itself:

* diagonal matrices return their diagonal unchanged;
* exactly Hermitian matrices use the symmetric solver, then replace each
  eigenvalue by the Rayleigh quotient of its eigenvector. The sections are
  strongly graded (diagonal ~ (K pi)^{2m}), and the polish brings the low
  eigenvalues from ~eps*||A|| accuracy down to ~eps*|lambda|;
* everything else goes through LAPACK's Hessenberg/shifted-QR driver.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .operator import OperatorSpec, TruncatedOperator, assemble

__all__ = [
    "RESIDUAL_TOL",
    "TIE_TOL",
    "EigenSolverError",
    "SpectrumResult",
    "lex_sort",
    "spectrum",
    "eigvals_ordered",
    "TruncationRow",
    "TruncationStudy",
    "truncation_study",
]

RESIDUAL_TOL = 1e-8
TIE_TOL = 1e-9


class EigenSolverError(RuntimeError):
    """The eigensolver failed to converge or certify its output.

    ``partial`` holds whatever was computed before the failure (possibly None).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


def lex_sort(values, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Order by real part, breaking (near-)ties by imaginary part.

    Consecutive values whose real parts differ by at most
    tie_tol * (1 + |lambda|) are chained into one cluster, and each cluster is
    sorted by imaginary part. The result depends only on the multiset of
    inputs, so the sort is idempotent and permutation invariant.
    """
    z = np.asarray(values, dtype=complex).ravel()
    if z.size == 0:
        return z
    return z[_lex_order(z, tie_tol)]


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    K: int
    m: int
    digest: str
    path: str
    residual_tol: float = RESIDUAL_TOL
    tie_tol: float = TIE_TOL

    def __len__(self) -> int:
        return self.eigenvalues.size

    def pair(self, n: int) -> tuple[complex, complex]:
        """(lambda_{2n-1}, lambda_{2n}) with 0-based indexing."""
        return complex(self.eigenvalues[2 * n - 1]), complex(self.eigenvalues[2 * n])


def _solve(A: np.ndarray):
    n = A.shape[0]
    if np.count_nonzero(A - np.diag(np.diagonal(A))) == 0:
        return np.diagonal(A).astype(complex), np.eye(n, dtype=complex), "diagonal"
    if np.array_equal(A, A.conj().T):
        w, V = np.linalg.eigh(A)
        # Rayleigh polish; real by construction for Hermitian A
        w = np.einsum("ij,ij->j", V.conj(), A @ V).real
        return w.astype(complex), V, "hermitian"
    w, V = np.linalg.eig(A)
    return w, V, "general"


def spectrum(op: TruncatedOperator | np.ndarray, residual_tol: float = RESIDUAL_TOL,
             tie_tol: float = TIE_TOL) -> SpectrumResult:
    """All 2K+1 eigenvalues of the section, with multiplicity, lex-ordered.

    Each eigenvalue carries the residual ||(A - lambda) x|| / ||A||_F of its unit
    eigenvector (absolute when A = 0). Raises EigenSolverError on LAPACK
    non-convergence or when a residual exceeds ``residual_tol``.

    A bare square matrix is accepted as well; its result has m = 0 and a
    digest of the raw matrix bytes.
    """
    if isinstance(op, TruncatedOperator):
        A, K, m, digest = np.asarray(op.A), op.K, op.m, op.spec.v.digest()
    else:
        A = np.asarray(op, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        K, m = (A.shape[0] - 1) // 2, 0
        digest = hashlib.sha256(np.ascontiguousarray(A).tobytes()).hexdigest()
    if not np.all(np.isfinite(A)):
        raise EigenSolverError("matrix has non-finite entries")
    try:
        w, V, path = _solve(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    scale = np.linalg.norm(A)
    res = np.linalg.norm(A @ V - V * w, axis=0)
    if scale > 0:
        res = res / scale
    order = _lex_order(w, tie_tol)
    w, res = w[order], res[order]
    if np.any(~(res <= residual_tol)):
        partial = SpectrumResult(w, res, K, m, digest, path, residual_tol, tie_tol)
        raise EigenSolverError(f"residual {res.max():.3e} above tolerance {residual_tol:g}", partial)
    return SpectrumResult(w, res, K, m, digest, path, residual_tol, tie_tol)


def _lex_order(w: np.ndarray, tie_tol: float) -> np.ndarray:
    # permutation version of lex_sort, so residuals follow their eigenvalues
    idx = np.lexsort((w.imag, w.real))
    out = []
    start = 0
    for i in range(1, idx.size + 1):
        if i < idx.size:
            a, b = w[idx[i - 1]], w[idx[i]]
            if b.real - a.real <= tie_tol * (1.0 + max(abs(a), abs(b))):
                continue
        block = idx[start:i]
        out.append(block[np.lexsort((w[block].real, w[block].imag))])
        start = i
    return np.concatenate(out) if out else idx


def eigvals_ordered(spec: OperatorSpec, K: int, **kw) -> np.ndarray:
    return spectrum(assemble(spec, K), **kw).eigenvalues


@dataclass(frozen=True)
class TruncationRow:
    K: int
    leading: np.ndarray
    max_change: float  # vs. previous K; nan for the first row


@dataclass(frozen=True)
class TruncationStudy:
    rows: list[TruncationRow] = field(default_factory=list)

    @property
    def changes(self) -> list[float]:
        return [r.max_change for r in self.rows[1:]]

    @property
    def cauchy(self) -> bool:
        """Successive changes nonincreasing (all-zero counts as Cauchy)."""
        ch = self.changes
        return all(b <= a for a, b in zip(ch, ch[1:]))


def truncation_study(spec: OperatorSpec, K_list, count: int, workers: int = 1) -> TruncationStudy:
    """Leading ``count`` eigenvalues for each K and their max change between K's."""
    K_list = [int(K) for K in K_list]
    if K_list != sorted(K_list):
        raise ValueError("K_list must be ascending")
    if count > 2 * min(K_list) + 1:
        raise ValueError("count exceeds the smallest section size")

    def leading(K):
        return spectrum(assemble(spec, K)).eigenvalues[:count]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            leads = list(pool.map(leading, K_list))
    else:
        leads = [leading(K) for K in K_list]
    rows = []
    for i, (K, lead) in enumerate(zip(K_list, leads)):
        change = math.nan if i == 0 else float(np.max(np.abs(lead - leads[i - 1])))
        rows.append(TruncationRow(K, lead, change))
    return TruncationStudy(rows)
