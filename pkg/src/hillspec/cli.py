"""``hillspec`` command line: config ingestion, suite orchestration, manifests.

Config files are flat ``key = value`` text with ``#`` comments; lists are
comma separated. Exit status: 0 all assertions hold, 1 an assertion failed,
2 bad configuration or input file, 3 numerical failure (stage is named).
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as hio
from .eig import RESIDUAL_TOL, TIE_TOL, EigenSolverError, spectrum, truncation_study
from .locate import asymptotic_ratios, localization_report, min_certificate
from .operator import OperatorSpec, assemble
from .resolvent import (QUAD_TOL, Contour, ContourError, DivergenceError, HomotopyFamily,
                        PoleError, QuadratureError, empirical_resolvent_norm, free_resolvent_sup,
                        homotopy_count_invariance, neumann_resolvent, relative_bound_check)
from .seqspace import CoeffSeq, SpaceSpec, make_potential, split_tail, weights

SUITES = ("spectrum", "localize", "asymptotics", "resolvent", "projector", "verify-all")
EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (EigenSolverError, PoleError, DivergenceError, ContourError, QuadratureError,
                  np.linalg.LinAlgError)


class ConfigError(ValueError):
    pass


class StageFailure(RuntimeError):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"stage '{stage}' failed: {type(exc).__name__}: {exc}")
        self.stage = stage


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _complex(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"not a number: {s!r}") from None


@dataclass
class ExperimentConfig:
    suite: str
    values: dict[str, str] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def has(self, key: str) -> bool:
        return key in self.values

    def str(self, key: str, default: str | None = None) -> str:
        if key not in self.values:
            if default is None:
                raise ConfigError(f"suite '{self.suite}' needs '{key}'")
            return default
        return self.values[key]

    def int(self, key: str, default: int | None = None) -> int:
        raw = self.str(key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: not an integer: {raw!r}") from None

    def float(self, key: str, default: float | None = None) -> float:
        raw = self.str(key, None if default is None else repr(default))
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: not a number: {raw!r}") from None

    def complex(self, key: str) -> complex:
        return _complex(self.str(key))

    def list(self, key: str, conv=float, default=None) -> list:
        if key not in self.values and default is not None:
            return list(default)
        return [conv(p.strip()) for p in self.str(key).split(",") if p.strip()]

    def digest(self) -> str:
        body = "".join(f"{k}={v}\n" for k, v in sorted({**self.values, "suite": self.suite}.items()))
        return hashlib.sha256(body.encode()).hexdigest()

    @property
    def m(self) -> int:
        m = self.int("m", 1)
        if m < 1:
            raise ConfigError("m must be >= 1")
        return m

    @property
    def K(self) -> int:
        K = self.int("K")
        if K < 1:
            raise ConfigError("K must be >= 1")
        return K

    @property
    def residual_tol(self) -> float:
        return self.float("residual_tol", RESIDUAL_TOL)

    @property
    def tie_tol(self) -> float:
        return self.float("tie_tol", TIE_TOL)

    @property
    def quad_tol(self) -> float:
        return self.float("quad_tol", QUAD_TOL)

    def potential(self, K: int | None = None) -> CoeffSeq:
        kind = self.str("potential", "zero")
        window = self.int("window", 2 * (K or self.int("K", 1)))
        seed = self.int("seed", 0)
        try:
            if kind == "file":
                path = Path(self.str("path"))
                return hio.ingest_potential(path if path.is_absolute() else self.base_dir / path)
            if kind == "zero":
                return make_potential("zero")
            if kind == "constant":
                return make_potential("constant", {"c": self.complex("c")})
            if kind == "trig_poly":
                return make_potential("trig_poly", {"cos": self.list("cos", _complex, ()),
                                                    "sin": self.list("sin", _complex, ())})
            if kind == "dirac_comb":
                return make_potential("dirac_comb", {"amplitude": self.complex("amplitude"),
                                                     "x0": self.float("x0", 0.0), "K": window})
            if kind == "random_decay":
                return make_potential("random_decay", {
                    "m": self.m, "eta": self.float("eta"), "K": window,
                    "norm": self.float("norm", 1.0),
                    "real": self.str("real", "false").lower() in ("1", "true", "yes")}, seed=seed)
        except (KeyError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"potential {kind!r}: {exc}") from exc
        raise ConfigError(f"unknown potential kind {kind!r}")


@dataclass
class RunManifest:
    config_digest: str
    version: str
    suite: str
    exit_code: int = 0
    stages: dict[str, float] = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


class _Runner:
    def __init__(self, cfg: ExperimentConfig, out: Path, quiet: bool):
        self.cfg = cfg
        self.out = out
        self.quiet = quiet
        self.manifest = RunManifest(cfg.digest(), __version__, cfg.suite)
        self.failures: list[str] = []
        self.workers = max(1, int(os.environ.get("HILLSPEC_THREADS", "1") or 1))

    def say(self, msg: str):
        self.manifest.messages.append(msg)
        if not self.quiet:
            print(msg)

    def check(self, ok: bool, msg: str):
        self.say(f"{'PASS' if ok else 'FAIL'} {msg}")
        if not ok:
            self.failures.append(msg)

    @contextlib.contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        except NUMERIC_ERRORS as exc:
            raise StageFailure(name, exc) from exc
        finally:
            self.manifest.stages[name] = self.manifest.stages.get(name, 0.0) + time.perf_counter() - t0

    def path(self, name: str) -> Path:
        return self.out / name

    def register(self, *paths: Path):
        for p in paths:
            self.manifest.files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()

    # suites ---------------------------------------------------------------

    def spectrum(self):
        cfg = self.cfg
        K, m = cfg.K, cfg.m
        v = cfg.potential(K)
        self.register(hio.write_potential(self.path("potential.csv"), v))
        with self.stage("spectrum"):
            res = spectrum(assemble(OperatorSpec(m, v), K), cfg.residual_tol, cfg.tie_tol)
        self.register(*hio.write_spectrum(self.path("spectrum.csv"), res))
        if cfg.str("dump_matrix", "false").lower() in ("1", "true", "yes"):
            self.register(hio.write_matrix(self.path("matrix.csv"), assemble(OperatorSpec(m, v), K)))
        lead = ", ".join(f"{z.real:.6g}{z.imag:+.3g}i" for z in res.eigenvalues[:3].tolist())
        self.say(f"spectrum: {res.eigenvalues.size} eigenvalues ({res.path}); lowest {lead}")
        if cfg.has("K_list"):
            Ks = cfg.list("K_list", int)
            count = cfg.int("count", min(10, 2 * min(Ks) + 1))
            with self.stage("truncation_study"):
                study = truncation_study(OperatorSpec(m, cfg.potential(max(Ks))), Ks, count, self.workers)
            self.register(hio.write_truncation(self.path("truncation.csv"), study))
            self.say(f"truncation: changes {['%.3g' % c for c in study.changes]}, "
                     f"cauchy={'true' if study.cauchy else 'false'}")

    def localize(self):
        cfg = self.cfg
        K, m = cfg.K, cfg.m
        n_max = cfg.int("n_max", K // 2)
        if 2 * n_max > K:
            raise ConfigError(f"n_max={n_max} exceeds K/2")
        with self.stage("spectrum"):
            res = spectrum(assemble(OperatorSpec(m, cfg.potential(K)), K), cfg.residual_tol, cfg.tie_tol)
        with self.stage("localize"):
            if cfg.has("M") or cfg.has("n0"):
                rep = localization_report(res, cfg.float("M"), cfg.int("n0"), n_max)
            else:
                cert = min_certificate(res, n_max)
                rep = cert.report
        self.register(*hio.write_localization(self.path("localization.csv"), rep,
                                              self.path("localization_summary.csv")))
        self.check(rep.certified,
                   f"cone_count={rep.cone_count},expected={rep.expected_cone_count},"
                   f"M={hio.fmt(rep.M)},n0={rep.n0},certified={hio.fmt(rep.certified)}")

    def asymptotics(self):
        cfg = self.cfg
        K, m = cfg.K, cfg.m
        n_max = cfg.int("n_max", K // 2)
        with self.stage("spectrum"):
            res = spectrum(assemble(OperatorSpec(m, cfg.potential(K)), K), cfg.residual_tol, cfg.tie_tol)
        with self.stage("asymptotics"):
            ratios = asymptotic_ratios(res, n_max)
        self.register(hio.write_asymptotics(self.path("asymptotics.csv"), ratios))
        r = dict(ratios)
        early = cfg.list("trend_early", int, (2, max(2, n_max // 8)))
        late = cfg.list("trend_late", int, (n_max // 2 + 1, n_max))
        factor = cfg.float("trend_factor", 0.5)
        if late[0] > early[1]:
            e = float(np.median([r[n] for n in range(early[0], early[1] + 1)]))
            l_ = float(np.median([r[n] for n in range(late[0], late[1] + 1)]))
            self.check(l_ <= factor * e, f"median ratio n in {late}: {l_:.6g} <= {factor:g} x "
                                         f"median n in {early}: {e:.6g}")
        else:
            self.say("asymptotics: window too small for a trend check")

    def resolvent(self):
        cfg = self.cfg
        K, m = cfg.K, cfg.m
        v = cfg.potential(K)
        lam = cfg.complex("lambda")
        sin = SpaceSpec(*_space(cfg.list("in_space", float, (-m, 0))))
        sout = SpaceSpec(*_space(cfg.list("out_space", float, (-m, 0))))
        rows = []
        with self.stage("resolvent_norm"):
            emp = empirical_resolvent_norm(assemble(OperatorSpec(m, v), K), lam, sin, sout)
        rows.append(("empirical_norm", emp))
        if not v and sin.n == 0 and sout.n == 0:
            with self.stage("free_resolvent"):
                val, arg = free_resolvent_sup(lam, m, sout.s / m, sin.s / m)
            rows.append(("closed_form_norm", val))
            rows.append(("closed_form_argmax", arg))
            if arg < K:
                self.check(abs(val - emp) <= 1e-12 * val,
                           f"closed form {val:.17g} matches window norm {emp:.17g}")
        if cfg.has("neumann_order"):
            order = cfg.int("neumann_order")
            sp = split_tail(v, m, cfg.float("split_eps"))
            fam = HomotopyFamily.from_split(sp, K)
            with self.stage("neumann"):
                nres = neumann_resolvent(fam, lam, order)
                direct = np.linalg.inv(lam * np.eye(2 * K + 1) - fam.matrix(1.0))
            W = weights(SpaceSpec(-m, 0), K)
            err = np.linalg.norm(W[:, None] * (nres.resolvent - direct) / W[None, :], 2)
            rel = float(err / np.linalg.norm(W[:, None] * direct / W[None, :], 2))
            rows += [("neumann_rho", nres.rho), ("neumann_rel_error", rel),
                     ("neumann_bound", nres.error_bound)]
            self.check(rel <= nres.error_bound + 1e-12,
                       f"neumann error {rel:.3e} within bound {nres.error_bound:.3e} (rho={nres.rho:.3f})")
        if cfg.has("delta"):
            with self.stage("relative_bound"):
                rb = relative_bound_check(v, m, cfg.float("delta"), cfg.int("trials", 200), K,
                                          cfg.int("seed", 0))
            rows += [("relative_bound_C", rb.C_hat), ("relative_bound_margin", rb.worst_margin)]
            self.check(rb.passed, f"relative bound at delta={cfg.float('delta'):g}: "
                                  f"worst margin {rb.worst_margin:.6g}")
        self.register(hio.write_rows(self.path("resolvent.csv"), ["quantity", "value"], rows))

    def projector(self):
        cfg = self.cfg
        K, m = cfg.K, cfg.m
        v = cfg.potential(K)
        c = cfg.list("contour", float)
        if len(c) != 3:
            raise ConfigError("contour = center_re, center_im, radius")
        contour = Contour(complex(c[0], c[1]), c[2], cfg.int("nodes", 64))
        if cfg.has("split_eps"):
            fam = HomotopyFamily.from_split(split_tail(v, m, cfg.float("split_eps")), K)
        else:
            fam = HomotopyFamily(m, v, CoeffSeq(), K)
        grid = cfg.list("s_grid", float, (1.0,))
        with self.stage("projector"):
            h = homotopy_count_invariance(fam, grid, contour, cfg.quad_tol, self.workers)
        self.register(hio.write_certificates(self.path("certificates.csv"), h.rows))
        self.check(h.invariant, f"counts over s grid: {h.counts}")
        agree = all(r.count == r.direct_count for r in h.rows)
        self.check(agree, "projector counts match direct eigenvalue counts")

    def verify_all(self):
        from .verify import CHECKS, run_one

        rows = []
        for name, fn, limit in CHECKS:
            with self.stage(name):
                res = run_one(name, fn, limit)
            rows.append((name, res.passed, res.detail))
            self.check(res.passed, f"{name}: {res.detail}")
        self.register(hio.write_rows(self.path("verify_all.csv"), ["check", "pass", "detail"], rows))


def _space(vals) -> tuple[float, int]:
    if len(vals) != 2 or int(vals[1]) != vals[1]:
        raise ConfigError("spaces are given as 's, n' with integer n")
    return float(vals[0]), int(vals[1])


def run(cfg: ExperimentConfig, out: Path | str | None = None, quiet: bool = False) -> RunManifest:
    """Execute ``cfg.suite`` and write its files plus manifest.json into ``out``."""
    out = Path(out or cfg.values.get("out", "hillspec_out"))
    if not out.is_absolute() and "out" in cfg.values and out == Path(cfg.values["out"]):
        out = cfg.base_dir / out
    out.mkdir(parents=True, exist_ok=True)
    runner = _Runner(cfg, out, quiet)
    method = {"verify-all": "verify_all"}.get(cfg.suite, cfg.suite)
    if method not in ("spectrum", "localize", "asymptotics", "resolvent", "projector", "verify_all"):
        raise ConfigError(f"unknown suite {cfg.suite!r}")
    try:
        getattr(runner, method)()
        runner.manifest.exit_code = EXIT_ASSERT if runner.failures else EXIT_OK
    except StageFailure as exc:
        runner.say(f"ERROR {exc}")
        runner.manifest.exit_code = EXIT_NUMERIC
    except (ConfigError, hio.PotentialFormatError) as exc:
        runner.say(f"ERROR config: {exc}")
        runner.manifest.exit_code = EXIT_CONFIG
    (out / "manifest.json").write_text(runner.manifest.to_json())
    return runner.manifest


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hillspec", description=__doc__.splitlines()[0])
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--out", type=Path, help="output directory (overrides 'out')")
    p.add_argument("--seed", type=int, help="potential seed (overrides 'seed')")
    p.add_argument("--k", type=int, help="window radius K (overrides 'K')")
    p.add_argument("--quiet", action="store_true")
    return p


def load_config(suite: str, path: Path | None, seed=None, k=None) -> ExperimentConfig:
    values = {}
    base = Path(".")
    if path is not None:
        try:
            values = parse_config(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        base = Path(path).parent
    elif suite != "verify-all":
        raise ConfigError(f"suite '{suite}' needs --config")
    if values.get("suite", suite) != suite:
        raise ConfigError(f"config is for suite {values['suite']!r}, not {suite!r}")
    values.pop("suite", None)
    if seed is not None:
        values["seed"] = str(seed)
    if k is not None:
        values["K"] = str(k)
    return ExperimentConfig(suite, values, base)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.suite, args.config, args.seed, args.k)
    except ConfigError as exc:
        print(f"hillspec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = run(cfg, args.out, args.quiet)
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
