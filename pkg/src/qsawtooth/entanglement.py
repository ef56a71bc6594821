"""Entanglement of the two most significant qubits.

The concurrence is evaluated through the singular values of
``W^T (sy x sy) W`` where ``rho = W W^dagger``.  These singular values are
exactly the square roots of the eigenvalues of ``rho rho~`` (and the
eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``), but an SVD of a small
symmetric matrix stays accurate when ``rho`` is rank deficient, which is the
normal case for nearly pure reduced states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from .statevector import DomainError, StateVector, partition_probabilities

SIGMA_Y2 = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0])).astype(complex)  # sy (x) sy
NEGATIVE_TOL = 1e-10


class NumericalError(ArithmeticError):
    """A density matrix violates positivity beyond round-off."""


@dataclass
class ReducedState:
    rho: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)


@dataclass
class ConcurrenceResult:
    C: float
    lambdas: np.ndarray
    E_f: float


def _blocks(amp: np.ndarray) -> np.ndarray:
    if amp.shape[-1] < 4:
        raise DomainError("need at least two qubits")
    return amp.reshape(amp.shape[:-1] + (4, amp.shape[-1] // 4))


def reduced_rho(amp: np.ndarray) -> np.ndarray:
    """Batched partial trace over all but the top two qubits, shape ``(..., 4, 4)``."""
    b = _blocks(np.asarray(amp))
    rho = b @ np.swapaxes(b.conj(), -1, -2)
    # enforce exact Hermiticity; the matmul is Hermitian only up to round-off
    return 0.5 * (rho + np.swapaxes(rho.conj(), -1, -2))


def reduce_top_two(state: StateVector) -> ReducedState:
    """Trace out qubits 3..n_q."""
    return ReducedState(reduced_rho(state.amp))


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """``rho~ = (sy x sy) rho* (sy x sy)``."""
    return SIGMA_Y2 @ rho.conj() @ SIGMA_Y2


def concurrence_lambdas(rho: np.ndarray) -> np.ndarray:
    """Decreasing ``lambda_i`` for a (batched) two-qubit density matrix."""
    p, V = np.linalg.eigh(rho)
    low = p.min(axis=-1)
    if np.any(low < -NEGATIVE_TOL):
        raise NumericalError(f"density matrix has eigenvalue {low.min():.3e} < -{NEGATIVE_TOL}")
    W = V * np.sqrt(np.clip(p, 0.0, None))[..., None, :]
    tau = np.swapaxes(W, -1, -2) @ SIGMA_Y2 @ W
    return np.linalg.svd(tau, compute_uv=False)


def concurrence_from_lambdas(lam: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])


def binary_entropy(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    return np.where((x <= 0) | (x >= 1), 0.0, h)


def entanglement_of_formation(C) -> np.ndarray:
    C = np.clip(np.asarray(C, dtype=float), 0.0, 1.0)
    return binary_entropy(0.5 * (1 + np.sqrt(1 - C ** 2)))


def concurrence(rs: Union[ReducedState, np.ndarray]) -> ConcurrenceResult:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)`` and entanglement of formation."""
    rho = rs.rho if isinstance(rs, ReducedState) else np.asarray(rs, dtype=complex)
    lam = concurrence_lambdas(rho)
    C = float(concurrence_from_lambdas(lam))
    return ConcurrenceResult(C=C, lambdas=lam, E_f=float(entanglement_of_formation(C)))


def concurrence_by_definition(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))`` via matrix square roots.

    Only well conditioned for full-rank ``rho``; kept as a cross-check.
    """
    from scipy.linalg import sqrtm

    s = sqrtm(rho)
    R = sqrtm(s @ spin_flip(rho) @ s)
    return np.sort(np.linalg.eigvals(R).real)[::-1]


def scalar_product_diagnostics(state: Union[StateVector, np.ndarray]) -> Tuple[float, float]:
    """``(Q14, Q23) = (2|<phi00|phi11>|, 2|<phi01|phi10>|)`` of the block vectors."""
    amp = state.amp if isinstance(state, StateVector) else np.asarray(state)
    b = _blocks(amp)
    q14 = 2 * abs(np.vdot(b[0], b[3]))
    q23 = 2 * abs(np.vdot(b[1], b[2]))
    return float(q14), float(q23)


def symmetry_defect(state: Union[StateVector, np.ndarray]) -> float:
    """``sum_n |amp[n] - amp[(N - n) mod N]|**2``."""
    amp = state.amp if isinstance(state, StateVector) else np.asarray(state)
    mirrored = np.roll(amp[::-1], 1)
    return float(np.sum(np.abs(amp - mirrored) ** 2))


def top_pair_observables(amp: np.ndarray) -> Dict[str, np.ndarray]:
    """All recorded observables for a batch of states ``(..., N)``."""
    rho = reduced_rho(amp)
    lam = concurrence_lambdas(rho)
    W = partition_probabilities(amp)
    return {
        "C": concurrence_from_lambdas(lam),
        "W00": W[..., 0],
        "W01": W[..., 1],
        "W10": W[..., 2],
        "W11": W[..., 3],
        "Q14": 2 * np.abs(rho[..., 0, 3]),
        "Q23": 2 * np.abs(rho[..., 1, 2]),
        "norm": np.sqrt(np.sum(W, axis=-1)),
    }
