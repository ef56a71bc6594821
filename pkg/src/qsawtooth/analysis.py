"""Fits and averaging applied to concurrence time series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import least_squares

from .classical import FitError, _linear_fit
from .series import TimeSeries, stack
from .statevector import DomainError

__all__ = [
    "TimeSeries", "DecayFit", "NoiseDecayFit", "ScalingFit", "FitError",
    "fit_exp_plateau", "moving_average", "running_mean", "fit_noise_rate",
    "residual_concurrence", "scaling_fit", "default_plateau_start",
]


@dataclass
class DecayFit:
    """Result of fitting ``C(t) = A exp(-gamma t) + C_bar``."""

    A: float
    gamma: float
    C_bar: float
    residual_rms: float
    window: Tuple[float, float]
    converged: bool
    stderr: Optional[np.ndarray] = None
    message: str = ""


@dataclass
class NoiseDecayFit:
    Gamma: float
    stderr: float
    window: Tuple[float, float]
    n_realizations: int
    n_points: int
    n_excluded: int
    intercept: float = 0.0


@dataclass
class ScalingFit:
    exponent: float
    prefactor: float
    stderr: float


def _tc(series: Union[TimeSeries, Tuple[np.ndarray, np.ndarray]], column: str = "C"):
    if isinstance(series, TimeSeries):
        return np.asarray(series.t, dtype=float), np.asarray(series[column], dtype=float)
    t, c = series
    return np.asarray(t, dtype=float), np.asarray(c, dtype=float)


def default_plateau_start(gamma_c: float, relaxation_times: float = 7.0) -> int:
    """Seven relaxation times by default."""
    return int(math.ceil(relaxation_times / gamma_c))


def _initial_guess(t: np.ndarray, c: np.ndarray) -> Tuple[float, float, float]:
    t_end = t[-1]
    tail = c[t >= t_end / 10] if t_end > 0 else c
    c_bar = float(np.mean(tail))
    i1 = int(np.searchsorted(t, 1.0))
    i1 = min(i1, len(t) - 1)
    A = float(c[i1] - c_bar)
    gamma = 1.0 / max(t_end, 1.0)
    if A > 0:
        excess = c[i1:] - c_bar
        # first e-folding: points before the excess first drops below A/e
        below = np.nonzero(excess < A / np.e)[0]
        stop = below[0] + 1 if len(below) else len(excess)
        seg = slice(0, max(stop, 2))
        x, y = t[i1:][seg], excess[seg]
        ok = y > 0
        if ok.sum() >= 2:
            slope = np.polyfit(x[ok], np.log(y[ok]), 1)[0]
            if slope < 0:
                gamma = float(-slope)
        # referencing the amplitude to t = 0
        A = A * math.exp(gamma * t[i1])
    return A, gamma, c_bar


def fit_exp_plateau(series, t_max: float = 1e4, t_min: float = 0.0,
                    max_iter: int = 500, tol: float = 1e-10) -> DecayFit:
    """Damped least squares (Levenberg-Marquardt) fit of ``A exp(-gamma t) + C_bar``.

    Unweighted residuals in ``C`` over ``t_min <= t <= t_max``.
    """
    t, c = _tc(series)
    mask = (t >= t_min) & (t <= t_max)
    t, c = t[mask], c[mask]
    if len(t) < 100:
        raise DomainError(f"need at least 100 points, got {len(t)}")
    p0 = _initial_guess(t, c)

    def resid(p):
        A, g, cb = p
        return A * np.exp(-g * t) + cb - c

    res = least_squares(resid, p0, method="lm", xtol=tol, ftol=tol, gtol=tol,
                        max_nfev=max_iter * 4)
    A, g, cb = (float(v) for v in res.x)
    rms = float(np.sqrt(np.mean(res.fun ** 2)))
    stderr = None
    try:
        J = res.jac
        dof = max(len(t) - 3, 1)
        cov = np.linalg.inv(J.T @ J) * (res.fun @ res.fun) / dof
        stderr = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        pass
    converged = bool(res.success and g > 0 and cb >= 0 and np.all(np.isfinite(res.x)))
    return DecayFit(A, g, cb, rms, (float(t[0]), float(t[-1])), converged, stderr, res.message)


def running_mean(x: np.ndarray, window: int, axis: int = -1) -> np.ndarray:
    """Mean over sliding windows of ``window`` samples ("valid" positions only).

    NaN entries are skipped; a window holding only NaN yields NaN.
    """
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    if not 1 <= window <= x.shape[-1]:
        raise DomainError(f"window {window} outside [1, {x.shape[-1]}]")
    valid = np.isfinite(x)
    zero = np.zeros(x.shape[:-1] + (1,))
    s = np.concatenate([zero, np.cumsum(np.where(valid, x, 0.0), axis=-1)], axis=-1)
    n = np.concatenate([zero, np.cumsum(valid, axis=-1)], axis=-1)
    tot = s[..., window:] - s[..., :-window]
    cnt = n[..., window:] - n[..., :-window]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(cnt > 0, tot / np.maximum(cnt, 1), np.nan)
    if window == 1:
        out = np.where(valid, x, np.nan)
    return np.moveaxis(out, -1, axis)


def moving_average(series: TimeSeries, window: int) -> TimeSeries:
    """Centered moving mean of every column; the result is ``window - 1`` shorter."""
    if not 1 <= window <= len(series):
        raise DomainError(f"window {window} outside [1, {len(series)}]")
    if window == 1:
        return TimeSeries(series.t.copy(), {k: v.copy() for k, v in series.values.items()},
                          dict(series.metadata))
    t = running_mean(series.t.astype(float), window)
    vals = {k: running_mean(v, window) for k, v in series.values.items()}
    meta = dict(series.metadata, moving_window=window)
    return TimeSeries(t, vals, meta)


def noise_ratio(noisy: Sequence[TimeSeries], ideal: TimeSeries, column: str = "C") -> np.ndarray:
    """Pointwise ``<C_noisy(t)> / C_ideal(t)``; NaN where the ideal value is zero."""
    mean_noisy = np.mean(stack(noisy, column), axis=0)
    ref = ideal[column]
    if len(ref) != len(mean_noisy):
        raise DomainError("noisy and ideal series differ in length")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ref > 0, mean_noisy / np.where(ref > 0, ref, 1.0), np.nan)


def fit_noise_rate(noisy: Sequence[TimeSeries], ideal: TimeSeries, plateau_start: float,
                   window: int = 100, t_end: Optional[float] = None,
                   ratio_floor: Optional[float] = None,
                   max_excluded: float = 0.5) -> NoiseDecayFit:
    """Decoherence rate ``Gamma`` from the noisy/ideal concurrence ratio.

    The realization-averaged concurrence is divided by the ideal one, the
    ratio is smoothed over ``window`` steps, and ``ln r`` is fitted linearly
    over ``plateau_start <= t <= t_end``.  ``Gamma = -slope``.

    With ``ratio_floor`` set, the window also stops just before the first
    smoothed ratio at or below the floor.  Concurrence is clipped at zero, so
    once the noisy average reaches the clipping level ``ln r`` falls faster
    than exponentially and no longer measures the decay rate.
    """
    if not noisy:
        raise DomainError("no noisy realizations given")
    t = np.asarray(ideal.t, dtype=float)
    r = running_mean(noise_ratio(noisy, ideal), window)
    tc = running_mean(t, window)
    hi = tc[-1] if t_end is None else t_end
    sel = (tc >= plateau_start) & (tc <= hi)
    if ratio_floor is not None:
        low = np.nonzero(sel & ~(r > ratio_floor))[0]
        if len(low):
            sel[low[0]:] = False
    if not sel.any():
        raise DomainError(f"empty fit window [{plateau_start}, {hi}]")
    good = sel & np.isfinite(r) & (r > 0)
    n_sel, n_good = int(sel.sum()), int(good.sum())
    if n_good < 2 or (n_sel - n_good) > max_excluded * n_sel:
        raise FitError(f"{n_sel - n_good} of {n_sel} ratio points are non-positive")
    slope, intercept, stderr, _ = _linear_fit(tc[good], np.log(r[good]))
    return NoiseDecayFit(0.0 - float(slope), float(stderr), (float(tc[sel][0]), float(tc[sel][-1])),
                         len(noisy), n_good, n_sel - n_good, float(intercept))


def residual_concurrence(series, plateau_start: float) -> float:
    """Time average of ``C`` over ``t >= plateau_start``."""
    t, c = _tc(series)
    sel = t >= plateau_start
    if not sel.any():
        raise DomainError(f"no records at t >= {plateau_start}")
    return float(np.mean(c[sel]))


def scaling_fit(points: Sequence[Tuple[float, float]]) -> ScalingFit:
    """Power law ``y = prefactor * x**exponent`` by least squares in log-log space."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise DomainError("need at least 3 (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("scaling_fit needs positive x and y")
    lx = np.log(x)
    if np.ptp(lx) == 0:
        raise DomainError("all x values coincide")
    slope, intercept, stderr, _ = _linear_fit(lx, np.log(y))
    return ScalingFit(float(slope), float(np.exp(intercept)), float(stderr))
