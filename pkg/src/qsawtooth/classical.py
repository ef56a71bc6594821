"""Classical sawtooth map, its diffusion rate and the derived relaxation scales.

The map is ``n' = n + k theta``, ``theta' = theta + T n' (mod 2 pi)`` with
``theta`` kept in ``[-pi, pi)``.  Only ``K = k T`` matters after rescaling
``y = T n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .statevector import DomainError

TWO_PI = 2 * np.pi


class FitError(RuntimeError):
    """A least-squares fit could not produce a meaningful estimate."""


def wrap_phase(theta):
    """Map angles into ``[-pi, pi)``."""
    return np.mod(theta + np.pi, TWO_PI) - np.pi


def classical_step(n, theta, k: float, T: float) -> Tuple[np.ndarray, np.ndarray]:
    n_new = n + k * theta
    return n_new, wrap_phase(theta + T * n_new)


def classical_step_back(n, theta, k: float, T: float) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`classical_step`."""
    theta_old = wrap_phase(theta - T * n)
    return n - k * theta_old, theta_old


def D_quasilinear(K: float) -> float:
    """Random-phase diffusion rate ``pi^2 K^2 / 3``."""
    return np.pi ** 2 * K ** 2 / 3


def D_cantori(K: float) -> float:
    """Small-``K`` asymptote ``1.2 pi^2 K^2.5 / 3``."""
    return 1.2 * np.pi ** 2 * K ** 2.5 / 3


@dataclass
class ClassicalEnsemble:
    """``M`` independent trajectories ``(n, theta)`` of the map with fixed ``(k, T)``."""

    n: np.ndarray
    theta: np.ndarray
    k: float
    T: float

    @classmethod
    def line(cls, M: int, K: float, T: float = 1.0, seed: Optional[int] = None) -> "ClassicalEnsemble":
        """``n = 0`` and ``theta`` uniform on ``[-pi, pi)``."""
        rng = np.random.default_rng(seed)
        theta = rng.uniform(-np.pi, np.pi, M)
        return cls(np.zeros(M), theta, K / T, T)

    def step(self) -> None:
        self.n, self.theta = classical_step(self.n, self.theta, self.k, self.T)

    @property
    def y(self) -> np.ndarray:
        return self.T * self.n


@dataclass
class DiffusionEstimate:
    """Linear fit of ``Var(y_t)`` against ``t``.

    Attributes
    ----------
    D0 : float
        Rescaled diffusion rate (slope in ``y = T n`` units).
    T : float
        Period used for the run; ``D = D0 / T**2`` is the rate in ``n``.
    window : tuple
        ``(t_lo, t_hi)`` fit range.
    stderr : float
        Regression standard error of the slope.  Successive variances are
        correlated, so this understates the true uncertainty.
    r_squared : float
        Coefficient of determination of the linear fit.
    """

    D0: float
    T: float
    window: Tuple[int, int]
    stderr: float
    r_squared: float
    variance: Optional[np.ndarray] = None

    @property
    def D(self) -> float:
        return self.D0 / self.T ** 2

    def __float__(self):
        return float(self.D0)


def _linear_fit(x: np.ndarray, y: np.ndarray):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    dof = max(len(x) - 2, 1)
    s2 = resid @ resid / dof
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = np.sqrt(s2 / sxx) if sxx > 0 else np.inf
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1 - (resid @ resid) / ss_tot if ss_tot > 0 else 0.0
    return slope, intercept, stderr, r2


def estimate_D0(K: float, M: int = 100_000, t_max: int = 1000, seed: Optional[int] = 0,
                T: float = 1.0, t_min: int = 10) -> DiffusionEstimate:
    """Brute-force ensemble estimate of ``D0(K) = <(Delta y)^2> / t``.

    Trajectories start on the line ``n = 0`` with uniform phases and move on
    the unbounded momentum line.  The variance of ``y = T n`` is fitted
    linearly over ``t_min <= t <= t_max``.
    """
    if K <= 0:
        raise DomainError("K must be positive")
    if not 0 <= t_min < t_max:
        raise DomainError("need 0 <= t_min < t_max")
    ens = ClassicalEnsemble.line(M, K, T, seed)
    var = np.empty(t_max + 1)
    var[0] = 0.0
    for t in range(1, t_max + 1):
        ens.step()
        var[t] = np.var(ens.y)
    ts = np.arange(t_min, t_max + 1, dtype=float)
    slope, _, stderr, r2 = _linear_fit(ts, var[t_min:])
    if not slope > 0:
        raise FitError(f"variance does not grow (slope {slope:.3g}) for K={K}")
    return DiffusionEstimate(float(slope), T, (t_min, t_max), float(stderr), float(r2), var)


def gamma_c(K: float, L: int, D0: float) -> float:
    """Relaxation rate to equipartition on the torus, ``D0 / (2 L^2)``.

    ``K`` is carried for bookkeeping only; the rate depends on it through ``D0``.
    """
    if D0 <= 0:
        raise DomainError("D0 must be positive")
    return D0 / (2 * L ** 2)


def gamma_c_from_D(D: float, N: int) -> float:
    """The same rate written as ``2 pi^2 D / N^2`` with ``D`` in momentum units."""
    return 2 * np.pi ** 2 * D / N ** 2


def conductance(p, D0: float) -> float:
    """``g = N D0 / L^2`` for map parameters ``p``."""
    if D0 <= 0:
        raise DomainError("D0 must be positive")
    return p.N * D0 / p.L ** 2


def conductance_from_gamma(gamma: float, N: int) -> float:
    """``g = 2 gamma_c / Delta`` with level spacing ``Delta = 1 / N``."""
    return 2 * gamma * N
