"""Resolvents of D_m + B(v) on Galerkin windows.

Operator norms between weighted spaces are computed as spectral norms of
W_out R W_in^{-1}, where W are the diagonal weights <k + n>^s of the spaces.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import eig
from .operator import TruncatedOperator, _ipow, free_diagonal
from .seqspace import (CoeffSeq, SpaceSpec, SplitPotential, convolution_matrix,
                       conv_norm_estimate, make_potential, split_tail, weighted_norm,
                       weights)

__all__ = [
    "PoleError",
    "DivergenceError",
    "ContourError",
    "QuadratureError",
    "free_resolvent_norm",
    "free_resolvent_sup",
    "empirical_resolvent_norm",
    "HomotopyFamily",
    "NeumannResult",
    "neumann_resolvent",
    "Contour",
    "RieszResult",
    "riesz_count",
    "HomotopyResult",
    "homotopy_count_invariance",
    "estimate_convolution_constant",
    "RelativeBoundResult",
    "relative_bound_check",
    "COND_LIMIT",
    "POLE_GUARD",
    "QUAD_TOL",
]

COND_LIMIT = 1e14
POLE_GUARD = 1e-6
QUAD_TOL = 1e-3
_SCAN_CAP = 1 << 24


class PoleError(ArithmeticError):
    """lambda sits on (or numerically at) the spectrum."""


class DivergenceError(ArithmeticError):
    def __init__(self, rho: float):
        super().__init__(f"Neumann series diverges: rho = {rho:.6g} >= 1")
        self.rho = rho


class ContourError(ValueError):
    """An eigenvalue lies within the pole guard of the contour."""

    s: float | None = None


class QuadratureError(ArithmeticError):
    """Projector trace is not within tolerance of an integer."""

    s: float | None = None

    def __init__(self, message: str, trace: complex | None = None):
        super().__init__(message)
        self.trace = trace


def free_resolvent_sup(lam: complex, m: int, s: float, t: float) -> tuple[float, int]:
    """sup_k <k>^{m(s-t)} / |lam - (k pi)^{2m}| and a maximizing k >= 0.

    The scan runs until the decreasing majorant
    <k>^p / ((k pi)^{2m} - |lam|), valid once (k pi)^{2m} > |lam|, drops to the
    running maximum. For s - t < 2 the terms tend to 0; for s - t = 2 they tend
    to pi^{-2m} from above, so the supremum is attained at a finite k either way.
    """
    if s - t > 2:
        raise ValueError(f"need s - t <= 2, got {s - t:g}")
    lam = complex(lam)
    p = m * (s - t)
    best, arg = -1.0, 0
    lo, hi = 0, max(16, 2 * int(abs(lam) ** (1.0 / (2 * m)) / math.pi) + 16)
    while True:
        k = np.arange(lo, hi, dtype=float)
        kp = k * math.pi
        den = np.abs(lam - _ipow(kp * kp, m))
        if np.any(den == 0):
            kk = int(k[np.argmin(den)])
            raise PoleError(f"lambda = {lam} is the free eigenvalue at k = {kk}")
        f = (1.0 + k) ** p / den
        i = int(np.argmax(f))
        if f[i] > best:
            best, arg = float(f[i]), int(k[i])
        edge = hi * math.pi
        top = _ipow(edge * edge, m)
        if top > abs(lam) and (1.0 + hi) ** p / (top - abs(lam)) <= best:
            return best, arg
        if hi >= _SCAN_CAP:
            raise RuntimeError("free resolvent scan did not terminate")
        lo, hi = hi, 2 * hi


def free_resolvent_norm(lam: complex, m: int, s: float, t: float) -> float:
    """||(lam - D_m)^{-1}|| as a map h^{mt} -> h^{ms} (exact supremum over k)."""
    return free_resolvent_sup(lam, m, s, t)[0]


def _weighted_op_norm(X: np.ndarray, in_space: SpaceSpec, out_space: SpaceSpec, K: int) -> float:
    W = weights(out_space, K)[:, None] * X / weights(in_space, K)[None, :]
    return float(np.linalg.norm(W, 2))


def empirical_resolvent_norm(op: TruncatedOperator, lam: complex,
                             in_space: SpaceSpec, out_space: SpaceSpec) -> float:
    """Largest singular value of W_out (lam - A)^{-1} W_in^{-1} on the window."""
    n = op.A.shape[0]
    Mx = complex(lam) * np.eye(n) - op.A
    cond = np.linalg.cond(Mx)
    if not cond <= COND_LIMIT:
        raise PoleError(f"lam - A is near-singular (condition {cond:.3e})")
    R = np.linalg.solve(Mx, np.eye(n))
    return _weighted_op_norm(R, in_space, out_space, op.K)


@dataclass(frozen=True)
class HomotopyFamily:
    """A(s) = D_m + B(b0) + s B(b1) on the window [-K, K]."""

    m: int
    b0: CoeffSeq
    b1: CoeffSeq
    K: int

    @classmethod
    def from_split(cls, split: SplitPotential, K: int) -> "HomotopyFamily":
        return cls(split.m, split.v0, split.v1, K)

    def matrix(self, s: float = 1.0) -> np.ndarray:
        A = convolution_matrix(self.b0, self.K) + s * convolution_matrix(self.b1, self.K)
        A[np.diag_indices_from(A)] += free_diagonal(self.m, self.K)
        return A


@dataclass(frozen=True, eq=False)
class NeumannResult:
    resolvent: np.ndarray
    rho: float
    order: int

    @property
    def error_bound(self) -> float:
        """Bound on ||approx - exact|| / ||exact|| in L(h^{-m})."""
        r = self.rho
        return (1.0 + r) * r ** (self.order + 1) / (1.0 - r)


def neumann_resolvent(family: HomotopyFamily, lam: complex, order: int) -> NeumannResult:
    """L^{-1} sum_{k=0}^{order} (B1 L^{-1})^k with L = lam - D_m - B0.

    L^{-1} itself is formed as (lam - D)^{-1} (I - B0 (lam - D)^{-1})^{-1}.
    rho is the L(h^{-m}) norm of B1 L^{-1} on the window; rho >= 1 raises
    DivergenceError.
    """
    K, m = family.K, family.m
    n = 2 * K + 1
    lam = complex(lam)
    den = lam - free_diagonal(m, K)
    if np.any(den == 0):
        raise PoleError(f"lambda = {lam} is a free eigenvalue")
    Rd = np.diag(1.0 / den)
    B0 = convolution_matrix(family.b0, K)
    B1 = convolution_matrix(family.b1, K)
    inner = np.eye(n) - B0 @ Rd
    if not np.linalg.cond(inner) <= COND_LIMIT:
        raise PoleError("lambda is (numerically) an eigenvalue of D + B0")
    Linv = Rd @ np.linalg.inv(inner)
    X = B1 @ Linv
    hm = SpaceSpec(-m, 0)
    rho = _weighted_op_norm(X, hm, hm, K) if X.any() else 0.0
    if rho >= 1:
        raise DivergenceError(rho)
    S = np.eye(n, dtype=complex)
    for _ in range(order):
        S = np.eye(n) + X @ S
    return NeumannResult(Linv @ S, rho, order)


@dataclass(frozen=True)
class Contour:
    """Circle with node_count equispaced trapezoidal nodes."""

    center: complex
    radius: float
    node_count: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("contour radius must be positive")
        if self.node_count < 8 or self.node_count % 2:
            raise ValueError("node_count must be even and >= 8")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes z_j and weights w_j with (1/2 pi i) oint f ~ sum_j w_j f(z_j)."""
        theta = 2.0 * np.pi * np.arange(self.node_count) / self.node_count
        e = np.exp(1j * theta)
        return self.center + self.radius * e, self.radius * e / self.node_count

    def inside(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def gap(self, z) -> np.ndarray:
        """Distance of each point from the circle."""
        return np.abs(np.abs(np.asarray(z) - self.center) - self.radius)


@dataclass(frozen=True)
class RieszResult:
    s: float
    trace: complex
    count: int
    direct_count: int
    valid: bool


def riesz_count(family: HomotopyFamily, contour: Contour, s: float = 1.0,
                quad_tol: float = QUAD_TOL, workers: int = 1) -> RieszResult:
    """Trace of the Riesz projector of A(s) for the region inside ``contour``.

    The integral (1/2 pi i) oint tr (z - A)^{-1} dz is evaluated with the
    trapezoidal rule; contributions are combined with fsum so the result does
    not depend on evaluation order.
    """
    A = family.matrix(s)
    lam = eig.spectrum(A).eigenvalues
    gap = contour.gap(lam)
    if gap.size and gap.min() < POLE_GUARD * contour.radius:
        raise ContourError(f"eigenvalue within {gap.min():.3e} of the contour")
    z, w = contour.nodes()
    n = A.shape[0]

    def term(j):
        return w[j] * np.trace(np.linalg.inv(z[j] * np.eye(n) - A))

    idx = range(contour.node_count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            terms = list(pool.map(term, idx))
    else:
        terms = [term(j) for j in idx]
    trace = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    count = int(round(trace.real))
    if abs(trace - count) > quad_tol:
        raise QuadratureError(f"trace {trace:.6g} is not within {quad_tol:g} of an integer; "
                              f"raise node_count", trace)
    direct = int(np.count_nonzero(contour.inside(lam)))
    return RieszResult(float(s), trace, count, direct, True)


@dataclass(frozen=True)
class HomotopyResult:
    invariant: bool
    rows: list[RieszResult] = field(default_factory=list)

    @property
    def counts(self) -> list[int]:
        return [r.count for r in self.rows]


def homotopy_count_invariance(family: HomotopyFamily, s_grid, contour: Contour,
                              quad_tol: float = QUAD_TOL, workers: int = 1) -> HomotopyResult:
    """Riesz counts along A(s), s in s_grid; invariant iff all counts agree."""
    rows = []
    for s in s_grid:
        try:
            rows.append(riesz_count(family, contour, s, quad_tol, workers))
        except (ContourError, QuadratureError) as exc:
            exc.s = float(s)
            exc.args = (f"s={float(s):g}: {exc.args[0]}",)
            raise
    return HomotopyResult(len({r.count for r in rows}) <= 1, rows)


def _probe_set(m: int, K: int) -> list[CoeffSeq]:
    probes = [CoeffSeq({k: 1.0}) for k in sorted({0, 1, max(1, K // 2), K, 2 * K})]
    probes.append(CoeffSeq({-1: 1.0, 1: 1.0}))
    for seed, eta in enumerate((0.05, 0.25, 1.0, 2.0)):
        probes.append(make_potential("random_decay", {"m": m, "eta": eta, "K": 2 * K}, seed=seed))
    for seed in range(4):
        rng = np.random.default_rng(seed)
        probes.append(CoeffSeq.from_array(rng.standard_normal(4 * K + 1)
                                          + 1j * rng.standard_normal(4 * K + 1), -2 * K))
    return probes


def estimate_convolution_constant(m: int, K: int, extra=()) -> float:
    """1.1 x the largest observed ratio in the two product estimates

    ||a * u||_{-m} <= C ||a||_{-m} ||u||_m  and  ||a * u||_{-m} <= C ||a||_m ||u||_{-m}

    over a fixed probe set (plus ``extra`` sequences), measured on the window.
    """
    lo, hi = SpaceSpec(-m, 0), SpaceSpec(m, 0)
    ratio = 0.0
    for a in [*_probe_set(m, K), *extra]:
        if not a:
            continue
        ratio = max(ratio,
                    conv_norm_estimate(a, hi, lo, K) / weighted_norm(a, -m),
                    conv_norm_estimate(a, lo, lo, K) / weighted_norm(a, m))
    return 1.1 * ratio


@dataclass(frozen=True)
class RelativeBoundResult:
    passed: bool
    worst_margin: float
    C_hat: float
    split: SplitPotential
    worst_u_digest: str


def relative_bound_check(v: CoeffSeq, m: int, delta: float, trials: int, K: int,
                         seed: int = 0) -> RelativeBoundResult:
    """Test ||V u||_{-m} <= delta ||D u||_{-m} + (C ||v0||_m + delta) ||u||_{-m}.

    v is split as v0 + v_delta with ||v_delta||_{-m} < delta / C, and V acts as
    the window section of convolution by v. Test vectors have random power-law
    profiles and ||u||_{-m} = 1; the margin is rhs - lhs, minimized over trials.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    C = estimate_convolution_constant(m, K, extra=(v,))
    split = split_tail(v, m, float(np.nextafter(delta / C, 0.0)))
    Bv = convolution_matrix(v, K)
    d = free_diagonal(m, K)
    w = weights(SpaceSpec(-m, 0), K)
    k = np.arange(-K, K + 1)
    rng = np.random.default_rng(seed)
    head = C * weighted_norm(split.v0, m) + delta
    worst, worst_u = math.inf, b""
    for _ in range(trials):
        power = rng.uniform(-m - 1.0, m + 1.0)
        u = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) * (1.0 + np.abs(k)) ** power
        u /= np.linalg.norm(w * u)
        lhs = np.linalg.norm(w * (Bv @ u))
        rhs = delta * np.linalg.norm(w * d * u) + head
        margin = float(rhs - lhs)
        if margin < worst:
            worst, worst_u = margin, u.tobytes()
    return RelativeBoundResult(worst >= 0, worst, C, split, hashlib.sha256(worst_u).hexdigest())
