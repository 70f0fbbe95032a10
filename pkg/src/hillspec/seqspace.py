"""Finite-support coefficient sequences and the weighted spaces h^{s,n}.

A 2-periodic potential on [-1, 1] is represented by its Fourier coefficients
v(k) = <V, e^{ik pi x}> with respect to the pairing <f, g> = 1/2 int f conj(g).
Under that pairing the exponentials are orthonormal, so every norm below is a
plain weighted l2 sum with weight <k + n>^s, where <j> = 1 + |j|.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
from scipy.special import zeta

__all__ = [
    "CoeffSeq",
    "SpaceSpec",
    "SplitPotential",
    "bracket",
    "convolve",
    "weighted_norm",
    "split_tail",
    "make_potential",
    "conv_norm_estimate",
    "convolution_matrix",
    "weights",
]


def bracket(k):
    """The Japanese bracket <k> = 1 + |k| (scalar or array)."""
    return 1.0 + np.abs(k)


class CoeffSeq:
    """Immutable finite-support complex sequence indexed by integers.

    Zero entries are dropped on construction, so ``support`` lists exactly the
    nonzero indices. ``decay`` is free-form metadata describing the growth
    exponent of |v(k)|; it never enters a computation.
    """

    __slots__ = ("_data", "decay")

    def __init__(self, entries: Mapping[int, complex] | Iterable[tuple[int, complex]] = (),
                 decay: float | None = None):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[int, complex] = {}
        for k, val in items:
            if int(k) != k:
                raise ValueError(f"non-integer index {k!r}")
            z = complex(val)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError(f"non-finite coefficient at k={k}")
            if z != 0:
                data[int(k)] = z
        self._data = MappingProxyType(dict(sorted(data.items())))
        self.decay = decay

    @classmethod
    def from_array(cls, values, lo: int, decay: float | None = None) -> "CoeffSeq":
        """Build from a dense array whose first entry sits at index ``lo``."""
        arr = np.asarray(values, dtype=complex)
        return cls(((lo + i, z) for i, z in enumerate(arr.tolist())), decay=decay)

    @property
    def entries(self) -> Mapping[int, complex]:
        return self._data

    @property
    def support(self) -> list[int]:
        return list(self._data)

    def __getitem__(self, k: int) -> complex:
        return self._data.get(k, 0j)

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self):
        return iter(self._data.items())

    def __bool__(self) -> bool:
        return bool(self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffSeq):
            return NotImplemented
        return dict(self._data) == dict(other._data)

    def __hash__(self) -> int:
        return hash(tuple(self._data.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {z!r}" for k, z in self._data.items())
        return f"CoeffSeq({{{body}}})"

    @property
    def min_index(self) -> int:
        return next(iter(self._data)) if self._data else 0

    @property
    def max_index(self) -> int:
        return next(reversed(self._data)) if self._data else 0

    @property
    def radius(self) -> int:
        """max |k| over the support (0 for the zero sequence)."""
        return max(abs(self.min_index), abs(self.max_index))

    def __add__(self, other: "CoeffSeq") -> "CoeffSeq":
        out = dict(self._data)
        for k, z in other:
            out[k] = out.get(k, 0j) + z
        return CoeffSeq(out)

    def __sub__(self, other: "CoeffSeq") -> "CoeffSeq":
        return self + other.scale(-1)

    def __neg__(self) -> "CoeffSeq":
        return self.scale(-1)

    def scale(self, c: complex) -> "CoeffSeq":
        return CoeffSeq({k: c * z for k, z in self}, decay=self.decay)

    def conj(self) -> "CoeffSeq":
        return CoeffSeq({k: z.conjugate() for k, z in self}, decay=self.decay)

    def restrict(self, radius: int) -> "CoeffSeq":
        """Keep only indices with |k| <= radius."""
        return CoeffSeq({k: z for k, z in self if abs(k) <= radius}, decay=self.decay)

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients on the index range lo..hi inclusive, zeros elsewhere."""
        out = np.zeros(hi - lo + 1, dtype=complex)
        for k, z in self:
            if lo <= k <= hi:
                out[k - lo] = z
        return out

    def digest(self) -> str:
        """sha256 of the canonical ``k,re,im`` text form."""
        h = hashlib.sha256()
        for k, z in self:
            h.update(f"{k},{z.real:.17g},{z.imag:.17g}\n".encode())
        return h.hexdigest()


@dataclass(frozen=True)
class SpaceSpec:
    """The weighted space h^{s,n}: weight <k + n>^s."""

    s: float
    n: int = 0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ValueError("Sobolev exponent must be finite")


@dataclass(frozen=True)
class SplitPotential:
    """v = v0 + v1 with v0 = v restricted to |k| <= cutoff."""

    v0: CoeffSeq
    v1: CoeffSeq
    epsilon: float
    cutoff: int
    m: int = field(default=1)


def weights(space: SpaceSpec, K: int) -> np.ndarray:
    """Diagonal weights <k + n>^s for k = -K..K."""
    k = np.arange(-K, K + 1)
    return bracket(k + space.n) ** float(space.s)


def convolve(a: CoeffSeq, b: CoeffSeq) -> CoeffSeq:
    """(a*b)(k) = sum_j a(k-j) b(j), evaluated exactly over the finite supports."""
    if not a or not b:
        return CoeffSeq()
    if len(a) * len(b) <= 4096:
        out: dict[int, complex] = {}
        for j, bj in b:
            for i, ai in a:
                out[i + j] = out.get(i + j, 0j) + ai * bj
        return CoeffSeq(out)
    da = a.dense(a.min_index, a.max_index)
    db = b.dense(b.min_index, b.max_index)
    return CoeffSeq.from_array(np.convolve(da, db), a.min_index + b.min_index)


def weighted_norm(a: CoeffSeq, s: float, n: int = 0) -> float:
    """(sum_k <k+n>^{2s} |a(k)|^2)^{1/2}, summed with correct rounding."""
    terms = [(1.0 + abs(k + n)) ** (2.0 * s) * (z.real * z.real + z.imag * z.imag) for k, z in a]
    return math.sqrt(math.fsum(terms))


def split_tail(v: CoeffSeq, m: int, eps: float) -> SplitPotential:
    """Split off a high-frequency tail with ||tail||_{h^{-m}} <= eps.

    The cutoff N is the smallest one for which the tail beyond |k| > N meets the
    bound; N = v.radius always works because the tail is then empty.
    """
    if m < 1:
        raise ValueError("order m must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    # tail mass by cutoff, accumulated from the outside in
    mass = {}
    per_radius: dict[int, list[float]] = {}
    for k, z in v:
        per_radius.setdefault(abs(k), []).append(
            (1.0 + abs(k)) ** (-2.0 * m) * (z.real * z.real + z.imag * z.imag))
    acc: list[float] = []
    for r in range(v.radius, -1, -1):
        mass[r] = math.fsum(acc)  # mass of |k| > r
        acc.extend(per_radius.get(r, ()))
    cutoff = v.radius
    for r in range(v.radius + 1):
        if math.sqrt(mass[r]) <= eps:
            cutoff = r
            break
    v0 = v.restrict(cutoff)
    v1 = CoeffSeq({k: z for k, z in v if abs(k) > cutoff})
    return SplitPotential(v0=v0, v1=v1, epsilon=eps, cutoff=cutoff, m=m)


def _unit_phase(seed: int, k: int) -> complex:
    # keyed by (seed, k): the same coefficient comes out at every window size
    bits = np.random.Philox(key=seed & (2**64 - 1), counter=k & (2**64 - 1))
    u = np.random.Generator(bits).random()
    return complex(np.exp(2j * np.pi * u))


def make_potential(kind: str, params: Mapping | None = None, seed: int = 0) -> CoeffSeq:
    """Construct a potential's coefficient sequence.

    kinds and their params:

    * ``zero``
    * ``constant``: ``c``
    * ``trig_poly``: ``cos`` and ``sin`` coefficient lists; entry k multiplies
      cos(k pi x) or sin(k pi x) (``sin[0]`` is ignored)
    * ``dirac_comb``: ``amplitude``, ``x0``, ``K`` -- a * sum_j delta(x - x0 - 2j)
      materialized on |k| <= K
    * ``random_decay``: ``m``, ``eta``, ``K``, optional ``norm`` (default 1) and
      ``real`` (default False). |v(k)| = c <k>^{m - 1/2 - eta} with random
      phases; c is fixed so that the h^{-m} norm of the full (untruncated)
      sequence equals ``norm``.
    """
    p = dict(params or {})
    if kind == "zero":
        return CoeffSeq()
    if kind == "constant":
        return CoeffSeq({0: p.get("c", 0)})
    if kind == "trig_poly":
        out: dict[int, complex] = {}
        for k, a in enumerate(p.get("cos", ())):
            a = complex(a)
            if k == 0:
                out[0] = out.get(0, 0j) + a
            else:
                out[k] = out.get(k, 0j) + a / 2
                out[-k] = out.get(-k, 0j) + a / 2
        for k, b in enumerate(p.get("sin", ())):
            b = complex(b)
            if k == 0:
                continue
            out[k] = out.get(k, 0j) - 0.5j * b
            out[-k] = out.get(-k, 0j) + 0.5j * b
        return CoeffSeq(out)
    if kind == "dirac_comb":
        K = int(p["K"])
        if K < 0:
            raise ValueError("empty window")
        a = complex(p.get("amplitude", 1.0))
        x0 = float(p.get("x0", 0.0))
        ks = np.arange(-K, K + 1)
        if x0 == 0.0:
            vals = np.full(ks.shape, a / 2)
        else:
            vals = (a / 2) * np.exp(-1j * np.pi * ks * x0)
        return CoeffSeq.from_array(vals, -K)
    if kind == "random_decay":
        m = int(p["m"])
        eta = float(p["eta"])
        K = int(p["K"])
        if eta <= 0:
            raise ValueError("decay margin eta must be positive")
        if K < 0:
            raise ValueError("empty window")
        norm = float(p.get("norm", 1.0))
        expo = m - 0.5 - eta
        # sum_{k in Z} <k>^{-1-2 eta} = 2 zeta(1 + 2 eta) - 1
        full = math.sqrt(2.0 * zeta(1.0 + 2.0 * eta) - 1.0)
        c = norm / full
        out = {}
        if p.get("real", False):
            out[0] = c * _unit_phase(seed, 0).real
            for k in range(1, K + 1):
                z = c * (1.0 + k) ** expo * _unit_phase(seed, k)
                out[k] = z
                out[-k] = z.conjugate()
        else:
            for k in range(-K, K + 1):
                out[k] = c * (1.0 + abs(k)) ** expo * _unit_phase(seed, k)
        return CoeffSeq(out, decay=expo)
    raise ValueError(f"unknown potential kind {kind!r}")


def convolution_matrix(a: CoeffSeq, K: int) -> np.ndarray:
    """Toeplitz section T[k, j] = a(k - j) on the window k, j = -K..K."""
    n = 2 * K + 1
    lags = a.dense(-2 * K, 2 * K)
    idx = np.arange(n)
    return lags[(idx[:, None] - idx[None, :]) + 2 * K]


def conv_norm_estimate(a: CoeffSeq, in_space: SpaceSpec, out_space: SpaceSpec, K: int) -> float:
    """Largest singular value of the weighted convolution section.

    Maps h^{in} -> h^{out} on the window [-K, K]; nondecreasing in K since the
    sections are nested principal submatrices.
    """
    T = convolution_matrix(a, K)
    W = weights(out_space, K)[:, None] * T / weights(in_space, K)[None, :]
    if not W.any():
        return 0.0
    return float(np.linalg.norm(W, 2))
