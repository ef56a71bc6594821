"""Figure-replication experiments: configuration, execution and persistence.

Each experiment expands its configuration into independent grid points,
evaluates them (optionally in a process pool) and writes results through a
single collector: per-point time series, a summary table as CSV and JSON,
and a ``manifest.json`` with the configuration hash, seeds, timings and the
list of files written.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from . import analysis as an
from . import classical as cl
from .quantum_map import MapParams, NoiseModel, evolve, evolve_ensemble
from .series import FLOAT_FORMAT, TimeSeries
from .statevector import initial_state

log = logging.getLogger(__name__)

KINDS = ("single_run", "gamma_vs_K", "residual_vs_g", "noise_single", "noise_scaling")
MAX_QUBITS = 20


class ValidationError(ValueError):
    """Configuration rejected before any computation."""


@dataclass
class ExperimentConfig:
    kind: str
    n_q: List[int] = field(default_factory=lambda: [12])
    K: List[float] = field(default_factory=lambda: [0.5])
    L: List[int] = field(default_factory=lambda: [4])
    epsilon: List[float] = field(default_factory=lambda: [0.0])
    t_max: int = 10_000
    realizations: int = 20
    seed: int = 0
    out: str = "results"
    format: str = "csv"
    workers: int = 1
    plateau_start: Optional[int] = None
    plateau_relaxation_times: float = 7.0
    moving_window: int = 100
    ratio_floor: Optional[float] = None
    classical_M: int = 100_000
    classical_t_max: int = 1000
    noisy_swaps: bool = False
    op_budget: float = 1e13

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        for name in ("n_q", "K", "L", "epsilon"):
            if len(getattr(self, name)) == 0:
                raise ValidationError(f"{name} list is empty")
        for n in self.n_q:
            if not 2 <= n <= MAX_QUBITS:
                raise ValidationError(f"n_q={n} outside [2, {MAX_QUBITS}]")
        for L in self.L:
            if L <= 0 or L % 4:
                raise ValidationError(f"L={L} is not a positive multiple of 4")
        for K in self.K:
            if not K > 0:
                raise ValidationError(f"K={K} must be positive")
        for e in self.epsilon:
            if e < 0:
                raise ValidationError(f"epsilon={e} must be >= 0")
        if self.t_max < 0:
            raise ValidationError("t_max must be >= 0")
        if self.realizations < 1:
            raise ValidationError("realizations must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValidationError(f"format must be csv or json, not {self.format!r}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if self.moving_window < 1:
            raise ValidationError("moving_window must be >= 1")
        if self.kind in ("single_run", "noise_single") and (len(self.n_q), len(self.K), len(self.L)) != (1, 1, 1):
            raise ValidationError(f"{self.kind} takes a single n_q, K and L")
        if self.kind == "noise_single" and len(self.epsilon) != 1:
            raise ValidationError("noise_single takes a single epsilon")
        reps = self.realizations if any(e > 0 for e in self.epsilon) else 1
        for n in self.n_q:
            ops = float(self.t_max) * (1 << n) * reps
            if ops > self.op_budget:
                raise ValidationError(
                    f"t_max * 2^n_q * realizations = {ops:.3g} exceeds op budget {self.op_budget:.3g}")

    def hash(self) -> str:
        """Digest of every field that influences numerical output."""
        d = dataclasses.asdict(self)
        for k in ("out", "workers", "format"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    code_version: str
    seeds: Dict[str, int] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    failures: Dict[str, str] = field(default_factory=dict)
    notices: List[str] = field(default_factory=list)

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        path.write_text(json.dumps(dataclasses.asdict(self), indent=1, sort_keys=True) + "\n")
        return path


@dataclass
class ExperimentResult:
    rows: List[dict]
    manifest: RunManifest
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.manifest.failures


def point_seed(base: int, index: int) -> int:
    """Independent 63-bit seed for grid point ``index``."""
    return int(np.random.SeedSequence([base, index]).generate_state(1, dtype=np.uint64)[0] >> 1)


def _tag(**kw) -> str:
    parts = []
    for k, v in kw.items():
        parts.append(f"{k}{v:g}" if isinstance(v, float) else f"{k}{v}")
    return "_".join(parts)


# ---------------------------------------------------------------------------
# per-point workers (top level so they pickle)


def _task_d0(K: float, M: int, t_max: int, seed: int) -> dict:
    est = cl.estimate_D0(K, M=M, t_max=t_max, seed=seed)
    return {"K": K, "D0": est.D0, "D0_stderr": est.stderr, "r_squared": est.r_squared}


def _task_ideal(n_q: int, K: float, L: int, t_max: int) -> TimeSeries:
    p = MapParams(n_q, K, L)
    return evolve(initial_state(n_q), p, t_max)


def _task_noisy(n_q: int, K: float, L: int, t_max: int, eps: float, seed: int,
                realizations: int, noisy_swaps: bool) -> List[TimeSeries]:
    p = MapParams(n_q, K, L)
    noise = NoiseModel(eps, seed, 0, noisy_swaps)
    return evolve_ensemble(initial_state(n_q), p, t_max, noise, range(realizations))


class _Runner:
    """Dispatches tasks to a pool (or inline) and returns results in submission order."""

    def __init__(self, workers: int):
        self.workers = workers

    def map(self, fn: Callable, arg_list: Sequence[tuple]) -> list:
        """Results (or the raised exception) for each argument tuple, in order."""
        if self.workers == 1 or len(arg_list) <= 1:
            out = []
            for args in arg_list:
                try:
                    out.append(fn(*args))
                except Exception as exc:  # recorded per point
                    out.append(exc)
            return out
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            futs = [pool.submit(fn, *args) for args in arg_list]
            out = []
            for f in futs:
                try:
                    out.append(f.result())
                except Exception as exc:
                    out.append(exc)
            return out


# ---------------------------------------------------------------------------
# output


class _Collector:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(dataclasses.asdict(cfg), cfg.hash(), __version__)

    def fail(self, key: str, msg: str) -> None:
        log.warning("point %s failed: %s", key, msg)
        self.manifest.failures[key] = msg

    def notice(self, msg: str) -> None:
        log.warning(msg)
        self.manifest.notices.append(msg)

    def _rel(self, path: Path) -> None:
        self.manifest.files.append(path.name)

    def series(self, ts: TimeSeries, name: str) -> None:
        path = self.out / f"{name}.{self.cfg.format}"
        if self.cfg.format == "csv":
            ts.to_csv(path)
        else:
            ts.to_json(path)
        self._rel(path)

    def two_column(self, t, y, name: str, label: str = "C") -> None:
        path = self.out / f"{name}.csv"
        lines = [f"t,{label}"]
        for a, b in zip(t, y):
            a_txt = str(int(a)) if float(a).is_integer() else FLOAT_FORMAT % a
            lines.append(f"{a_txt},{FLOAT_FORMAT % b}")
        path.write_text("\n".join(lines) + "\n")
        self._rel(path)

    def json(self, obj, name: str) -> None:
        path = self.out / f"{name}.json"
        path.write_text(json.dumps(obj, indent=1, sort_keys=True, default=_jsonable) + "\n")
        self._rel(path)

    def table(self, rows: List[dict], name: str = "summary") -> None:
        cols: List[str] = []
        for r in rows:
            cols.extend(k for k in r if k not in cols)
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(_fmt(r.get(c)) for c in cols))
        path = self.out / f"{name}.csv"
        path.write_text("\n".join(lines) + "\n")
        self._rel(path)
        self.json(rows, name)

    def finish(self, timings: dict) -> RunManifest:
        self.manifest.timings = timings
        self._rel(self.manifest.write(self.out))
        return self.manifest


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT % v
    return str(v).replace(",", ";")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    return str(v)


def _decay_dict(fit: an.DecayFit) -> dict:
    return {"A": fit.A, "gamma": fit.gamma, "C_bar": fit.C_bar, "residual_rms": fit.residual_rms,
            "window": list(fit.window), "converged": fit.converged}


# ---------------------------------------------------------------------------
# experiments


def _d0_table(cfg: ExperimentConfig, runner: _Runner, col: _Collector) -> Dict[float, float]:
    Ks = sorted(set(cfg.K))
    res = runner.map(_task_d0, [(K, cfg.classical_M, cfg.classical_t_max, cfg.seed) for K in Ks])
    table = {}
    for K, r in zip(Ks, res):
        if isinstance(r, Exception):
            col.fail(f"D0_K{K:g}", repr(r))
        else:
            table[K] = r["D0"]
    return table


def run_single(cfg: ExperimentConfig) -> ExperimentResult:
    """One evolution (ideal, or averaged noisy realizations) with its decay fit."""
    cfg.validate()
    col = _Collector(cfg)
    t0 = time.perf_counter()
    n, K, L, eps = cfg.n_q[0], cfg.K[0], cfg.L[0], cfg.epsilon[0]
    tag = _tag(nq=n, K=float(K), L=L, eps=float(eps))
    if eps == 0:
        series = [_task_ideal(n, K, L, cfg.t_max)]
    else:
        seed = point_seed(cfg.seed, 0)
        col.manifest.seeds[tag] = seed
        series = _task_noisy(n, K, L, cfg.t_max, eps, seed, cfg.realizations, cfg.noisy_swaps)
    for i, ts in enumerate(series):
        col.series(ts, f"series_{tag}" + (f"_r{i}" if len(series) > 1 else ""))
    mean_c = np.mean([ts["C"] for ts in series], axis=0)
    col.two_column(series[0].t, mean_c, f"tC_{tag}")
    row = {"n_q": n, "K": K, "L": L, "epsilon": eps, "t_max": cfg.t_max}
    if len(mean_c) >= 100:
        try:
            fit = an.fit_exp_plateau((series[0].t, mean_c))
            row.update(_decay_dict(fit))
            row.pop("window")
        except Exception as exc:
            col.fail(tag, repr(exc))
    else:
        col.notice("series shorter than 100 points; decay fit skipped")
    col.table([row])
    manifest = col.finish({"total": time.perf_counter() - t0})
    return ExperimentResult([row], manifest, {"series": series})


def run_gamma_vs_K(cfg: ExperimentConfig) -> ExperimentResult:
    """Quantum concurrence decay rate against the classical diffusion rate for each K."""
    cfg.validate()
    col = _Collector(cfg)
    runner = _Runner(cfg.workers)
    t0 = time.perf_counter()
    d0 = _d0_table(cfg, runner, col)
    points = [(n, K, L) for n in cfg.n_q for L in cfg.L for K in cfg.K]
    series = runner.map(_task_ideal, [(n, K, L, cfg.t_max) for n, K, L in points])
    rows = []
    for (n, K, L), ts in zip(points, series):
        tag = _tag(nq=n, K=float(K), L=L)
        row = {"n_q": n, "K": K, "L": L, "D0": d0.get(K), "D_ql": cl.D_quasilinear(K)}
        if isinstance(ts, Exception):
            col.fail(tag, repr(ts))
            rows.append(row)
            continue
        col.series(ts, f"series_{tag}")
        try:
            fit = an.fit_exp_plateau(ts)
        except Exception as exc:
            col.fail(tag, repr(exc))
            rows.append(row)
            continue
        gt = 2 * fit.gamma * L ** 2
        row.update(gamma=fit.gamma, C_bar=fit.C_bar, converged=fit.converged,
                   gamma_tilde=gt, R=gt / cl.D_quasilinear(K))
        if K in d0:
            row.update(gamma_c=cl.gamma_c(K, L, d0[K]), D0_over_Dql=d0[K] / cl.D_quasilinear(K),
                       gamma_over_gamma_c=fit.gamma / cl.gamma_c(K, L, d0[K]))
        rows.append(row)
    col.table(rows)
    manifest = col.finish({"total": time.perf_counter() - t0})
    return ExperimentResult(rows, manifest, {"D0": d0})


def run_residual_vs_g(cfg: ExperimentConfig) -> ExperimentResult:
    """Residual concurrence against conductance over an (n_q, L, K) grid."""
    cfg.validate()
    col = _Collector(cfg)
    runner = _Runner(cfg.workers)
    t0 = time.perf_counter()
    d0 = _d0_table(cfg, runner, col)
    points = [(n, K, L) for n in cfg.n_q for L in cfg.L for K in cfg.K]
    series = runner.map(_task_ideal, [(n, K, L, cfg.t_max) for n, K, L in points])
    rows = []
    for (n, K, L), ts in zip(points, series):
        tag = _tag(nq=n, K=float(K), L=L)
        row = {"n_q": n, "K": K, "L": L}
        if isinstance(ts, Exception) or K not in d0:
            col.fail(tag, repr(ts) if isinstance(ts, Exception) else "no D0")
            rows.append(row)
            continue
        col.series(ts, f"series_{tag}")
        p = MapParams(n, K, L)
        gc = cl.gamma_c(K, L, d0[K])
        start = cfg.plateau_start or an.default_plateau_start(gc, cfg.plateau_relaxation_times)
        try:
            cbar = an.residual_concurrence(ts, start)
        except Exception as exc:
            col.fail(tag, repr(exc))
            rows.append(row)
            continue
        row.update(D0=d0[K], g=cl.conductance(p, d0[K]), C_bar=cbar, plateau_start=start)
        rows.append(row)
    col.table(rows)
    pts = [(r["g"], r["C_bar"]) for r in rows if "C_bar" in r and r["C_bar"] > 0]
    extra = {}
    if len(pts) >= 3 and len({x for x, _ in pts}) > 1:
        fit = an.scaling_fit(pts)
        extra["scaling"] = dataclasses.asdict(fit)
        col.json(extra["scaling"], "scaling_fit")
        col.two_column([x for x, _ in pts], [y for _, y in pts], "loglog_g_Cbar", label="C_bar")
    else:
        col.notice("fewer than 3 distinct points; scaling fit skipped")
    manifest = col.finish({"total": time.perf_counter() - t0})
    return ExperimentResult(rows, manifest, extra)


def _noise_point(cfg: ExperimentConfig, n: int, K: float, L: int, eps: float, seed: int,
                 d0: float, ideal: TimeSeries):
    """Noisy ensemble plus fitted Gamma for one (n_q, epsilon)."""
    gc = cl.gamma_c(K, L, d0)
    start = cfg.plateau_start or an.default_plateau_start(gc, cfg.plateau_relaxation_times)
    if eps == 0:
        noisy = [ideal] * cfg.realizations
    else:
        noisy = _task_noisy(n, K, L, cfg.t_max, eps, seed, cfg.realizations, cfg.noisy_swaps)
    fit = an.fit_noise_rate(noisy, ideal, start, window=cfg.moving_window,
                            ratio_floor=cfg.ratio_floor)
    return noisy, fit, start


def _task_noise_point(cfg_dict: dict, n: int, K: float, L: int, eps: float, seed: int, d0: float):
    cfg = ExperimentConfig(**cfg_dict)
    ideal = _task_ideal(n, K, L, cfg.t_max)
    noisy, fit, start = _noise_point(cfg, n, K, L, eps, seed, d0, ideal)
    ratio = an.running_mean(an.noise_ratio(noisy, ideal), cfg.moving_window)
    tc = an.running_mean(ideal.t.astype(float), cfg.moving_window)
    mean_c = np.mean([s["C"] for s in noisy], axis=0)
    return {"fit": fit, "start": start, "ratio": (tc, ratio), "ideal_C": ideal["C"],
            "noisy_C": mean_c, "t": ideal.t}


def _noise_grid(cfg: ExperimentConfig, col: _Collector, runner: _Runner, d0: Dict[float, float]):
    K, L = cfg.K[0], cfg.L[0]
    points = [(n, eps) for eps in cfg.epsilon for n in cfg.n_q]
    args = []
    for i, (n, eps) in enumerate(points):
        seed = point_seed(cfg.seed, i)
        col.manifest.seeds[_tag(nq=n, eps=float(eps))] = seed
        args.append((dataclasses.asdict(cfg), n, K, L, eps, seed, d0[K]))
    return points, runner.map(_task_noise_point, args)


def run_noise_single(cfg: ExperimentConfig) -> ExperimentResult:
    """Ideal vs noisy concurrence and their smoothed ratio at one (n_q, epsilon)."""
    cfg.validate()
    col = _Collector(cfg)
    runner = _Runner(cfg.workers)
    t0 = time.perf_counter()
    if cfg.realizations == 1:
        col.notice("realizations=1: Gamma estimate has high variance")
    d0 = _d0_table(cfg, runner, col)
    if cfg.K[0] not in d0:
        manifest = col.finish({"total": time.perf_counter() - t0})
        return ExperimentResult([], manifest)
    points, res = _noise_grid(cfg, col, runner, d0)
    (n, eps), r = points[0], res[0]
    tag = _tag(nq=n, K=float(cfg.K[0]), L=cfg.L[0], eps=float(eps))
    row = {"n_q": n, "K": cfg.K[0], "L": cfg.L[0], "epsilon": eps, "realizations": cfg.realizations}
    if isinstance(r, Exception):
        col.fail(tag, repr(r))
    else:
        col.two_column(r["t"], r["ideal_C"], f"tC_ideal_{tag}")
        col.two_column(r["t"], r["noisy_C"], f"tC_noisy_{tag}")
        tc, ratio = r["ratio"]
        col.two_column(tc, ratio, f"ratio_{tag}", label="ratio")
        f = r["fit"]
        row.update(Gamma=f.Gamma, Gamma_stderr=f.stderr, fit_start=f.window[0], fit_end=f.window[1])
    col.table([row])
    manifest = col.finish({"total": time.perf_counter() - t0})
    return ExperimentResult([row], manifest)


def run_noise_scaling(cfg: ExperimentConfig) -> ExperimentResult:
    """Decoherence rate over an epsilon x n_q grid and its fit against eps^2 sqrt(N)."""
    cfg.validate()
    if len(cfg.K) != 1 or len(cfg.L) != 1:
        raise ValidationError("noise_scaling takes a single K and L")
    col = _Collector(cfg)
    runner = _Runner(cfg.workers)
    t0 = time.perf_counter()
    if cfg.realizations == 1:
        col.notice("realizations=1: Gamma estimates have high variance")
    d0 = _d0_table(cfg, runner, col)
    if cfg.K[0] not in d0:
        manifest = col.finish({"total": time.perf_counter() - t0})
        return ExperimentResult([], manifest)
    points, res = _noise_grid(cfg, col, runner, d0)
    rows = []
    for (n, eps), r in zip(points, res):
        tag = _tag(nq=n, eps=float(eps))
        N = 1 << n
        row = {"epsilon": eps, "n_q": n, "eps2_sqrtN": eps ** 2 * math.sqrt(N)}
        if isinstance(r, Exception):
            col.fail(tag, repr(r))
        else:
            f = r["fit"]
            tc, ratio = r["ratio"]
            col.two_column(tc, ratio, f"ratio_{tag}", label="ratio")
            row.update(Gamma=f.Gamma, Gamma_stderr=f.stderr, fit_start=f.window[0],
                       fit_end=f.window[1], n_excluded=f.n_excluded)
            if eps > 0:
                row["prefactor"] = f.Gamma / (eps ** 2 * math.sqrt(N))
        rows.append(row)
    col.table(rows)
    pts = [(r["eps2_sqrtN"], r["Gamma"]) for r in rows
           if r["epsilon"] > 0 and r.get("Gamma", 0) > 0]
    extra = {}
    if len(pts) >= 3 and len({x for x, _ in pts}) > 1:
        extra["scaling"] = dataclasses.asdict(an.scaling_fit(pts))
        col.json(extra["scaling"], "scaling_fit")
    else:
        col.notice("fewer than 3 usable points; scaling fit skipped")
    manifest = col.finish({"total": time.perf_counter() - t0})
    return ExperimentResult(rows, manifest, extra)


def run_classical_d0(cfg: ExperimentConfig) -> ExperimentResult:
    """Table of classical diffusion rates for the configured K values."""
    cfg = dataclasses.replace(cfg, kind="gamma_vs_K") if cfg.kind not in KINDS else cfg
    cfg.validate()
    col = _Collector(cfg)
    runner = _Runner(cfg.workers)
    t0 = time.perf_counter()
    Ks = sorted(set(cfg.K))
    res = runner.map(_task_d0, [(K, cfg.classical_M, cfg.classical_t_max, cfg.seed) for K in Ks])
    rows = []
    for K, r in zip(Ks, res):
        if isinstance(r, Exception):
            col.fail(f"K{K:g}", repr(r))
            continue
        r = dict(r, D_ql=cl.D_quasilinear(K), D_cantori=cl.D_cantori(K))
        r["D0_over_Dql"] = r["D0"] / r["D_ql"]
        rows.append(r)
    col.table(rows)
    manifest = col.finish({"total": time.perf_counter() - t0})
    return ExperimentResult(rows, manifest)


RUNNERS = {
    "single_run": run_single,
    "gamma_vs_K": run_gamma_vs_K,
    "residual_vs_g": run_residual_vs_g,
    "noise_single": run_noise_single,
    "noise_scaling": run_noise_scaling,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.kind](cfg)
