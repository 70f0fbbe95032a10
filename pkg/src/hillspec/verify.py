"""Acceptance suite: each check returns a CheckResult and never raises.

Used by ``hillspec verify-all`` and by tests/test_acceptance.py. Every random
draw is seeded, so a given check always sees the same potentials.
"""

from __future__ import annotations

import math
import time
import traceback
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

from .eig import lex_sort, spectrum
from .locate import (Cone, asymptotic_ratios, disc_radius_bounded, localization_report,
                     min_certificate)
from .mathieu import characteristic_values
from .operator import OperatorSpec, assemble, free_eigenvalue, is_formally_self_adjoint
from .resolvent import (Contour, HomotopyFamily, empirical_resolvent_norm, free_resolvent_sup,
                        homotopy_count_invariance, neumann_resolvent, relative_bound_check,
                        riesz_count)
from .seqspace import CoeffSeq, SpaceSpec, make_potential, split_tail, weighted_norm, weights

__all__ = ["CheckResult", "CHECKS", "run_checks"]

# quadrature separation used to call a random (potential, contour) pair valid:
# 64 trapezoidal nodes resolve the trace to ~2 * 0.8^64 ~ 1e-6 at this gap
SEPARATION = 0.2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _random_seq(rng, radius: int, norm: float, s: float = 0.0, real: bool = False) -> CoeffSeq:
    z = rng.standard_normal(2 * radius + 1) + 1j * rng.standard_normal(2 * radius + 1)
    if real:
        z = 0.5 * (z + z[::-1].conj())
    v = CoeffSeq.from_array(z, -radius)
    return v.scale(norm / weighted_norm(v, s))


def _exact_free(m: int, K: int) -> list:
    with mpmath.workdps(40):
        vals = [mpmath.mpf(0)]
        for k in range(1, K + 1):
            vals += [(k * mpmath.pi) ** (2 * m)] * 2
        return vals


def free_spectrum() -> tuple[bool, str]:
    """v = 0: eigenvalues are {0} and doubled (k pi)^{2m}; cone counts are 2 n0 - 1."""
    worst, bad_cone = 0.0, []
    K = 64
    for m in (1, 2, 3):
        lam = spectrum(assemble(OperatorSpec(m, CoeffSeq()), K)).eigenvalues
        for got, want in zip(lam.tolist(), _exact_free(m, K)):
            err = float(abs(mpmath.mpc(got) - want) / max(abs(want), 1))
            worst = max(worst, err)
        for n0 in range(1, 33):
            if Cone(m, 1.0, n0).count(lam) != 2 * n0 - 1:
                bad_cone.append((m, n0))
    ok = worst <= 1e-12 and not bad_cone
    return ok, f"max rel err {worst:.2e} (<= 1e-12), cone mismatches {bad_cone or 'none'}"


def shift_covariance() -> tuple[bool, str]:
    """v = {0: c}: spectrum is the free spectrum shifted by c."""
    worst = 0.0
    K = 64
    for m in (1, 2, 3):
        free = spectrum(assemble(OperatorSpec(m, CoeffSeq()), K)).eigenvalues
        for c in (1, -3 + 2j):
            lam = spectrum(assemble(OperatorSpec(m, CoeffSeq({0: c})), K)).eigenvalues
            err = np.max(np.abs(lam - lex_sort(free + c))) / (1 + abs(c))
            worst = max(worst, float(err))
    return worst <= 1e-10, f"max |shifted - (free + c)| / (1 + |c|) = {worst:.2e} (<= 1e-10)"


def hermitian_reality() -> tuple[bool, str]:
    """Real potentials give exactly real spectra; symmetry test matches the matrix."""
    rng = np.random.default_rng(3)
    max_im, mismatches, paths = 0.0, 0, set()
    for i in range(20):
        m = 1 + i % 2
        v = _random_seq(rng, int(rng.integers(1, 12)), float(rng.uniform(0.5, 40)), real=True)
        w = _random_seq(rng, int(rng.integers(1, 12)), float(rng.uniform(0.5, 40)))
        for pot in (v, w):
            op = assemble(OperatorSpec(m, pot), 64)
            if is_formally_self_adjoint(pot) != op.is_hermitian():
                mismatches += 1
        res = spectrum(assemble(OperatorSpec(m, v), 64))
        paths.add(res.path)
        max_im = max(max_im, float(np.max(np.abs(res.eigenvalues.imag))))
    ok = max_im == 0.0 and mismatches == 0 and paths == {"hermitian"}
    return ok, f"max |Im| = {max_im:g}, symmetry mismatches {mismatches}, paths {sorted(paths)}"


def mathieu_oracle() -> tuple[bool, str]:
    """2q cos(pi x), q = 5: K = 32 vs K = 256, and vs the recurrence oracle."""
    q = 5.0
    oracle = characteristic_values(q, 10)
    spec = OperatorSpec(1, make_potential("trig_poly", {"cos": [0, 2 * q]}))
    lo = spectrum(assemble(spec, 32)).eigenvalues[:10]
    hi = spectrum(assemble(spec, 256)).eigenvalues[:10]
    d_trunc = float(np.max(np.abs(lo - hi)))
    d_oracle = float(np.max(np.abs(hi - oracle)))
    ok = d_trunc <= 1e-10 and d_oracle <= 1e-8
    return ok, f"|K32 - K256| = {d_trunc:.2e} (<= 1e-10), |K256 - oracle| = {d_oracle:.2e} (<= 1e-8)"


def localization_theorem() -> tuple[bool, str]:
    """30 cos(pi x) + 10i sin(2 pi x): minimal certificate survives 20 perturbations."""
    v = make_potential("trig_poly", {"cos": [0, 30], "sin": [0, 0, 10j]})
    eps = 0.05
    notes, ok = [], True
    for m in (1, 2):
        for K in (64, 128):
            n_max = K // 2
            base = spectrum(assemble(OperatorSpec(m, v), K))
            cert = min_certificate(base, n_max)
            if not cert.ok:
                notes.append(f"m={m} K={K}: no certificate")
                ok = False
                continue
            rng = np.random.default_rng(1000 * m + K)
            failures = 0
            for _ in range(20):
                dv = _random_seq(rng, int(rng.integers(1, 2 * K)), eps * float(rng.uniform(0.05, 1)), s=-m)
                assert weighted_norm(dv, -m) <= eps
                res = spectrum(assemble(OperatorSpec(m, v + dv), K))
                if not localization_report(res, cert.M, cert.n0, n_max).certified:
                    failures += 1
            ok &= failures == 0
            notes.append(f"m={m} K={K}: (M={cert.M:g}, n0={cert.n0}) fails on {failures}/20")
    return ok, "; ".join(notes)


def bounded_disc_radius() -> tuple[bool, str]:
    """||v||_{h^0} <= 2: pair deviations stay below (3^m sqrt 2 + 1) R."""
    R, K = 2.0, 64
    rng = np.random.default_rng(6)
    worst_ratio, failures = 0.0, 0
    for m in (1, 2):
        bound = disc_radius_bounded(m, R)
        for _ in range(50):
            v = _random_seq(rng, int(rng.integers(1, 9)), R * float(rng.uniform(0.1, 1)))
            res = spectrum(assemble(OperatorSpec(m, v), K))
            cert = min_certificate(res, K // 2)
            if not cert.ok:
                failures += 1
                continue
            for d in cert.report.discs:
                worst_ratio = max(worst_ratio, max(d.dev_odd, d.dev_even) / bound)
    ok = failures == 0 and worst_ratio < 1
    return ok, f"max deviation / bound = {worst_ratio:.3f} (< 1), uncertified {failures}/100"


def asymptotic_trend() -> tuple[bool, str]:
    """Deviation / n^m decays: late median <= half the early median."""
    K, m = 256, 1
    pots = {
        "dirac_comb": make_potential("dirac_comb", {"amplitude": 2.0, "x0": 0.0, "K": 2 * K}),
        "random_h-m": make_potential("random_decay", {"m": m, "eta": 0.25, "K": 2 * K, "norm": 5.0}, seed=7),
    }
    notes, ok = [], True
    for name, v in pots.items():
        r = dict(asymptotic_ratios(spectrum(assemble(OperatorSpec(m, v), K)), K // 2))
        early = float(np.median([r[n] for n in range(2, 17)]))
        late = float(np.median([r[n] for n in range(65, 129)]))
        ok &= late <= 0.5 * early
        notes.append(f"{name}: {late:.4f} vs {early:.4f}")
    worst = 0.0
    for c in (1.0, -3 + 2j):
        r = asymptotic_ratios(spectrum(assemble(OperatorSpec(m, CoeffSeq({0: c})), K)), K // 2)
        worst = max(worst, max(abs(x - abs(c) / n) for n, x in r))
    ok &= worst <= 1e-10
    notes.append(f"constant shift |ratio - |c|/n| <= {worst:.1e}")
    return ok, "; ".join(notes)


def free_resolvent_formula() -> tuple[bool, str]:
    """Closed-form sup over Z equals the window-diagonal sup (argmax inside)."""
    rng = np.random.default_rng(8)
    K = 64
    worst, done = 0.0, 0
    while done < 100:
        m = int(rng.integers(1, 4))
        s = float(rng.uniform(-3, 3))
        t = float(rng.uniform(s - 2, s + 3))
        scale = free_eigenvalue(int(rng.integers(0, 24)), m)
        lam = complex(rng.uniform(-50, 1.2 * scale + 50), rng.uniform(-1, 1) * (10 + 0.1 * scale))
        value, arg = free_resolvent_sup(lam, m, s, t)
        if arg >= K:
            continue
        with mpmath.workdps(30):
            z = mpmath.mpc(lam)
            window = float(max((1 + abs(k)) ** (m * mpmath.mpf(s - t))
                               / abs(z - (k * mpmath.pi) ** (2 * m)) for k in range(-K, K + 1)))
        worst = max(worst, abs(value - window) / window)
        done += 1
    return worst <= 1e-12, f"max rel diff {worst:.2e} over 100 draws (<= 1e-12)"


def resolvent_scalings() -> tuple[bool, str]:
    """v = 0 on Vert boundaries, n = 8..64: h^{-m} norm ~ n^{-m}; shifted norms O(1), O(n^m)."""
    ns = list(range(8, 65, 4))
    K = 2 * ns[-1] + 8
    notes, ok = [], True
    for m in (1, 2):
        op = assemble(OperatorSpec(m, CoeffSeq()), K)
        pm = math.pi ** (2 * m)
        families = {
            "circle+i": lambda n: free_eigenvalue(n, m) + 1j * n ** m,
            "circle+1": lambda n: free_eigenvalue(n, m) + n ** m,
            "circle45": lambda n: free_eigenvalue(n, m) + n ** m * np.exp(0.25j * np.pi),
            "edge-": lambda n: free_eigenvalue(n, m) - n ** m * pm + 0.5j * n ** m,
            "edge+": lambda n: free_eigenvalue(n, m) + n ** m * pm + 0.5j * n ** m,
        }
        bands = {"a'": 0.0, "e'": 0.0, "d'": 0.0}
        for fam in families.values():
            a, e, d = [], [], []
            for n in ns:
                lam = fam(n)
                a.append(n ** m * empirical_resolvent_norm(op, lam, SpaceSpec(-m, 0), SpaceSpec(-m, 0)))
                e.append(empirical_resolvent_norm(op, lam, SpaceSpec(-m, n), SpaceSpec(m, -n)))
                d.append(empirical_resolvent_norm(op, lam, SpaceSpec(-m, 0), SpaceSpec(m, n)) / n ** m)
            for key, vals in (("a'", a), ("e'", e), ("d'", d)):
                bands[key] = max(bands[key], max(vals) / min(vals))
        ok &= bands["a'"] <= 2 and bands["e'"] <= 4 and bands["d'"] <= 4
        notes.append(f"m={m}: " + ", ".join(f"{k} band {v:.3f}" for k, v in bands.items()))
    return ok, "; ".join(notes) + " (limits 2, 4, 4)"


def _free_contours():
    pi2 = math.pi ** 2
    return [
        (1, 0.0, 1.0, 1), (1, pi2, 1.0, 2), (1, 0.0, 5.0, 1), (1, 4 * pi2, 5.0, 2),
        (1, 0.5 * pi2, 1.6 * pi2, 3), (1, pi2, 4.0, 2), (2, 0.0, 40.0, 1), (2, pi2 ** 2, 10.0, 2),
        (2, 16 * pi2 ** 2, 500.0, 2),
    ]


def riesz_counting() -> tuple[bool, str]:
    """Projector traces: integers for v = 0, direct counts for random pairs, squaring errors."""
    notes, ok = [], True
    worst_int = 0.0
    squaring_pairs, squaring_bad = 0, 0
    for m, c, r, expected in _free_contours():
        fam = HomotopyFamily(m, CoeffSeq(), CoeffSeq(), 16)
        res = riesz_count(fam, Contour(c, r, 64))
        worst_int = max(worst_int, abs(res.trace - expected))
        ok &= res.count == expected
        errs = {}
        for Q in (8, 16, 32, 64):
            z, w = Contour(c, r, Q).nodes()
            A = fam.matrix()
            tr = sum(w[j] * np.trace(np.linalg.inv(z[j] * np.eye(A.shape[0]) - A)) for j in range(Q))
            errs[Q] = abs(tr - expected)
        for Q in (8, 16, 32):
            if errs[Q] >= 1e-6:
                squaring_pairs += 1
                squaring_bad += errs[2 * Q] > errs[Q] ** 2
    ok &= worst_int <= 1e-6 and squaring_pairs > 0 and squaring_bad == 0
    notes.append(f"v=0 max |trace - count| {worst_int:.1e} (<= 1e-6)")
    notes.append(f"doubling squared the error in {squaring_pairs - squaring_bad}/{squaring_pairs}")

    rng = np.random.default_rng(10)
    valid = mism = 0
    K = 24
    while valid < 30:
        m = int(rng.integers(1, 3))
        v = _random_seq(rng, int(rng.integers(1, 5)), float(rng.uniform(1, 30)))
        n = int(rng.integers(0, 6))
        center = free_eigenvalue(n, m) + complex(rng.normal(0, 5), rng.normal(0, 5))
        contour = Contour(center, float(rng.uniform(1, 3 * max(n, 1) ** m * 4)), 64)
        fam = HomotopyFamily(m, v, CoeffSeq(), K)
        lam = spectrum(fam.matrix()).eigenvalues
        if contour.gap(lam).min() < SEPARATION * contour.radius:
            continue
        res = riesz_count(fam, contour)
        valid += 1
        mism += res.count != res.direct_count
    ok &= mism == 0
    notes.append(f"random pairs: {mism}/30 count mismatches")
    return ok, "; ".join(notes)


def homotopy_invariance() -> tuple[bool, str]:
    """Counts along D + B(v0) + s B(v1), s in 0..1 (11 points), stay constant."""
    grid = np.linspace(0.0, 1.0, 11)
    K = 32
    broken, checked, mism = 0, 0, 0
    for seed in range(10):
        m = 1 + seed % 2
        v = make_potential("random_decay", {"m": m, "eta": 0.25, "K": 2 * K, "norm": 3.0}, seed=seed)
        fam = HomotopyFamily.from_split(split_tail(v, m, 0.5), K)
        specs = [spectrum(fam.matrix(s)).eigenvalues for s in grid]
        for n in (1, 2, 3, 5, 8, 12, 16):
            contour = Contour(free_eigenvalue(n, m), float(n ** m), 64)
            if min(contour.gap(e).min() for e in specs) < SEPARATION * contour.radius:
                continue
            h = homotopy_count_invariance(fam, grid, contour)
            checked += 1
            broken += not h.invariant
            mism += sum(r.count != r.direct_count for r in h.rows)
    ok = checked >= 10 and broken == 0 and mism == 0
    return ok, f"{checked} valid contours, {broken} with varying counts, {mism} direct-count mismatches"


def neumann_identity() -> tuple[bool, str]:
    """Truncated series at order 30 vs the direct inverse, rho <= 0.5."""
    rng = np.random.default_rng(12)
    K, m = 24, 1
    b0 = CoeffSeq({-1: 5.0, 1: 5.0})
    W = weights(SpaceSpec(-m, 0), K)
    worst, worst_rho = 0.0, 0.0
    for lam in (20 + 5j, 100 - 30j, -50 + 1j, 250 + 60j, 3 + 40j):
        for target in (0.5, 0.3):
            b1 = _random_seq(rng, int(rng.integers(2, 2 * K)), 1.0, s=-m)
            rho1 = neumann_resolvent(HomotopyFamily(m, b0, b1, K), lam, 0).rho
            b1 = b1.scale(target / rho1 * (1 - 1e-9))
            fam = HomotopyFamily(m, b0, b1, K)
            res = neumann_resolvent(fam, lam, 30)
            direct = np.linalg.inv(lam * np.eye(2 * K + 1) - fam.matrix(1.0))
            err = np.linalg.norm(W[:, None] * (res.resolvent - direct) / W[None, :], 2)
            rel = err / np.linalg.norm(W[:, None] * direct / W[None, :], 2)
            worst, worst_rho = max(worst, rel), max(worst_rho, res.rho)
    ok = worst <= 1e-8 and worst_rho <= 0.5
    return ok, f"max rel error {worst:.2e} (<= 1e-8) at rho <= {worst_rho:.3f}"


def relative_bound() -> tuple[bool, str]:
    """||V u|| <= delta ||D u|| + C_delta ||u|| in h^{-m} for small delta."""
    K = 64
    pots = [(1, make_potential("dirac_comb", {"amplitude": 2.0, "x0": 0.0, "K": 2 * K}))]
    rng = np.random.default_rng(13)
    for seed in range(10):
        m = 1 + seed % 2
        pots.append((m, make_potential("random_decay", {
            "m": m, "eta": float(rng.uniform(0.05, 0.5)), "K": 2 * K,
            "norm": float(rng.uniform(1, 10))}, seed=100 + seed)))
    fails, worst = 0, math.inf
    for i, (m, v) in enumerate(pots):
        for delta in (0.1, 0.01):
            res = relative_bound_check(v, m, delta, 200, K, seed=i)
            fails += not res.passed
            worst = min(worst, res.worst_margin)
    return fails == 0, f"{fails}/{2 * len(pots)} failing, smallest margin {worst:.3e}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]], float | None]] = [
    ("free spectrum exactness", free_spectrum, 5.0),
    ("shift covariance", shift_covariance, 5.0),
    ("hermitian reality", hermitian_reality, None),
    ("mathieu oracle", mathieu_oracle, 60.0),
    ("cone and disc localization", localization_theorem, 600.0),
    ("bounded-potential disc radius", bounded_disc_radius, None),
    ("asymptotic ratio trend", asymptotic_trend, None),
    ("free resolvent closed form", free_resolvent_formula, None),
    ("resolvent scalings on Vert", resolvent_scalings, None),
    ("riesz projector counting", riesz_counting, None),
    ("homotopy count invariance", homotopy_invariance, None),
    ("neumann series identity", neumann_identity, None),
    ("relative bound zero", relative_bound, None),
]


def run_one(name: str, fn, limit: float | None) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed suite
        ok, detail = False, f"{type(exc).__name__}: {exc} | {traceback.format_exc(limit=2)!r}"
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        ok, detail = False, f"{detail}; runtime {dt:.1f}s over {limit:g}s"
    return CheckResult(name, bool(ok), detail, dt)


def run_checks(names=None) -> list[CheckResult]:
    return [run_one(n, f, lim) for n, f, lim in CHECKS if names is None or n in names]
