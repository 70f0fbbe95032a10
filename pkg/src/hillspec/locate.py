"""Complex-plane regions and the localization checks on computed spectra.

All checks read the lex-ordered eigenvalue list, where the pair belonging to
n^{2m} pi^{2m} is (lambda_{2n-1}, lambda_{2n}) in 0-based indexing. Nothing is
evaluated beyond n = K/2; eigenvalues near the truncation edge are artifacts of
the section, not of the operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .eig import SpectrumResult
from .operator import free_eigenvalue

__all__ = [
    "ExtM",
    "Vert",
    "Cone",
    "Disc",
    "Region",
    "region_contains",
    "DiscCheck",
    "LocalizationReport",
    "Certificate",
    "M_GRID",
    "localization_report",
    "min_certificate",
    "common_certificate",
    "disc_radius_bounded",
    "asymptotic_ratios",
]

M_GRID = tuple(2.0 ** i for i in range(11))


@dataclass(frozen=True)
class ExtM:
    """Re z <= |Im z| - M."""

    M: float

    def __post_init__(self):
        if not self.M >= 1:
            raise ValueError("Ext_M needs M >= 1")

    def contains(self, z: complex) -> bool:
        return z.real <= abs(z.imag) - self.M


@dataclass(frozen=True)
class Vert:
    """n^{2m} pi^{2m} + w with |Re w| <= n^m pi^{2m} and |w| >= r."""

    m: int
    n: int
    r: float

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("Vert needs m >= 1 and n >= 1")
        if not 0 < self.r < self.n ** self.m * math.pi ** (2 * self.m):
            raise ValueError("Vert needs 0 < r < n^m pi^{2m}")

    @property
    def center(self) -> float:
        return free_eigenvalue(self.n, self.m)

    def contains(self, z: complex) -> bool:
        w = z - self.center
        return abs(w.real) <= self.n ** self.m * math.pi ** (2 * self.m) and abs(w) >= self.r


@dataclass(frozen=True)
class Cone:
    """|Im z| - M <= Re z <= (n0^{2m} - n0^m) pi^{2m}."""

    m: int
    M: float
    n0: int

    def __post_init__(self):
        if self.m < 1 or self.n0 < 1 or not self.M >= 1:
            raise ValueError("Cone needs m >= 1, n0 >= 1, M >= 1")

    @property
    def upper(self) -> float:
        return (self.n0 ** (2 * self.m) - self.n0 ** self.m) * math.pi ** (2 * self.m)

    def contains(self, z: complex) -> bool:
        return abs(z.imag) - self.M <= z.real <= self.upper

    def count(self, values: np.ndarray) -> int:
        v = np.asarray(values)
        return int(np.count_nonzero((np.abs(v.imag) - self.M <= v.real) & (v.real <= self.upper)))


@dataclass(frozen=True)
class Disc:
    """Open disc |z - center| < radius."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius


Region = Union[ExtM, Vert, Cone, Disc]


def region_contains(region: Region, z: complex) -> bool:
    return region.contains(complex(z))


@dataclass(frozen=True)
class DiscCheck:
    n: int
    dev_odd: float
    dev_even: float
    bound: float

    @property
    def passed(self) -> bool:
        # strict, no slack
        return self.dev_odd < self.bound and self.dev_even < self.bound


@dataclass(frozen=True)
class LocalizationReport:
    m: int
    M: float
    n0: int
    n_max: int
    cone_count: int
    discs: list[DiscCheck] = field(default_factory=list)
    ext_count: int = 0  # eigenvalues found in Ext_M; informational

    @property
    def expected_cone_count(self) -> int:
        return 2 * self.n0 - 1

    @property
    def certified(self) -> bool:
        return self.cone_count == self.expected_cone_count and all(d.passed for d in self.discs)

    @property
    def defects(self) -> int:
        return abs(self.cone_count - self.expected_cone_count) + sum(not d.passed for d in self.discs)


@dataclass(frozen=True)
class Certificate:
    ok: bool
    M: float | None
    n0: int | None
    report: LocalizationReport | None


def _check_window(result: SpectrumResult, n_max: int):
    if 2 * n_max > result.K:
        raise ValueError(f"n_max={n_max} exceeds the reliability window K/2={result.K / 2:g}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")


def _deviations(result: SpectrumResult, n_max: int) -> np.ndarray:
    """|lambda_{2n-i} - n^{2m} pi^{2m}| for n = 1..n_max, shape (n_max, 2)."""
    lam = result.eigenvalues
    out = np.empty((n_max, 2))
    for n in range(1, n_max + 1):
        c = free_eigenvalue(n, result.m)
        out[n - 1] = abs(lam[2 * n - 1] - c), abs(lam[2 * n] - c)
    return out


def localization_report(result: SpectrumResult, M: float, n0: int, n_max: int) -> LocalizationReport:
    """Cone count in T_{M,n0} plus the disc checks |lambda_{2n-i} - n^{2m}pi^{2m}| < n^m."""
    _check_window(result, n_max)
    if not 1 <= n0 <= n_max:
        raise ValueError("need 1 <= n0 <= n_max")
    return _report(result, M, n0, n_max, _deviations(result, n_max))


def _report(result, M, n0, n_max, dev) -> LocalizationReport:
    m = result.m
    lam = result.eigenvalues
    discs = [DiscCheck(n, float(dev[n - 1, 0]), float(dev[n - 1, 1]), float(n ** m))
             for n in range(n0, n_max + 1)]
    ext = int(np.count_nonzero(lam.real <= np.abs(lam.imag) - M))
    return LocalizationReport(m=m, M=float(M), n0=n0, n_max=n_max,
                              cone_count=Cone(m, M, n0).count(lam), discs=discs, ext_count=ext)


def min_certificate(result: SpectrumResult, n_max: int, M_grid=M_GRID) -> Certificate:
    """Smallest n0, then smallest M on the grid, whose report certifies.

    Failure is returned, not raised: ``ok`` is False and ``report`` holds the
    report with the fewest defects.
    """
    return common_certificate([result], n_max, M_grid)


def common_certificate(results, n_max: int, M_grid=M_GRID) -> Certificate:
    """One (M, n0) certifying every spectrum in ``results``; same search order."""
    results = list(results)
    for r in results:
        _check_window(r, n_max)
    devs = [_deviations(r, n_max) for r in results]
    best = None
    for n0 in range(1, n_max + 1):
        for M in M_grid:
            reps = [_report(r, M, n0, n_max, d) for r, d in zip(results, devs)]
            if all(rep.certified for rep in reps):
                return Certificate(True, float(M), n0, reps[0])
            worst = max(reps, key=lambda rep: rep.defects)
            if best is None or worst.defects < best.defects:
                best = worst
    return Certificate(False, None, None, best)


def disc_radius_bounded(m: int, R: float) -> float:
    """(3^m sqrt(2) + 1) R: pair-disc radius for potentials with ||v||_{h^0} <= R."""
    if R < 0:
        raise ValueError("R must be >= 0")
    return (3 ** m * math.sqrt(2.0) + 1.0) * R


def asymptotic_ratios(result: SpectrumResult, n_max: int) -> list[tuple[int, float]]:
    """max_i |lambda_{2n-i} - n^{2m} pi^{2m}| / n^m for n = 1..n_max."""
    _check_window(result, n_max)
    dev = _deviations(result, n_max)
    return [(n, float(dev[n - 1].max() / n ** result.m)) for n in range(1, n_max + 1)]
