"""Dense state vectors over the momentum basis and the elementary gate set.

Qubit 1 is the most significant bit of the basis index ``n``, so that
``n = a_1 a_2 ... a_nq`` in binary.  All low-level kernels accept amplitude
arrays with arbitrary leading batch dimensions, ``(..., N)``, which is how
independent noise realizations are evolved side by side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels

PHASE = "phase"
CPHASE = "cphase"
HADAMARD = "hadamard"
SWAP = "swap"
GATE_KINDS = (PHASE, CPHASE, HADAMARD, SWAP)

_SQRT_HALF = 1.0 / np.sqrt(2.0)

ArrayLike = Union[float, np.ndarray]


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


@dataclass
class StateVector:
    """Unit-norm amplitudes ``amp[n]`` over the momentum basis ``n = 0..N-1``."""

    amp: np.ndarray

    def __post_init__(self):
        self.amp = np.asarray(self.amp, dtype=complex)
        if self.amp.ndim != 1:
            raise DomainError("StateVector holds a single 1-D amplitude array")
        num_qubits(self.amp.shape[-1])

    @property
    def n_q(self) -> int:
        return num_qubits(self.amp.shape[-1])

    @property
    def N(self) -> int:
        return self.amp.shape[-1]

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amp, self.amp).real))

    def copy(self) -> "StateVector":
        return StateVector(self.amp.copy())


def num_qubits(size: int) -> int:
    """Return ``log2(size)``, raising if ``size`` is not a power of two."""
    n_q = int(size).bit_length() - 1
    if size < 1 or (1 << n_q) != size:
        raise DomainError(f"state size {size} is not a power of two")
    return n_q


@dataclass(frozen=True)
class Gate:
    """One elementary gate.

    ``qubits`` holds one index for PHASE/HADAMARD and two for CPHASE/SWAP.
    ``angle`` is the rotation angle in radians; for HADAMARD and SWAP it is
    ignored by the ideal kernels and only its perturbation matters.
    """

    kind: str
    qubits: Tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise DomainError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind in (CPHASE, SWAP) else 1
        if len(self.qubits) != arity:
            raise DomainError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise DomainError("two-qubit gate needs distinct qubits")

    def check(self, n_q: int) -> None:
        for q in self.qubits:
            if not 1 <= q <= n_q:
                raise DomainError(f"qubit {q} out of range [1, {n_q}]")


def phase(q: int, angle: float) -> Gate:
    return Gate(PHASE, (q,), float(angle))


def cphase(qa: int, qb: int, angle: float) -> Gate:
    return Gate(CPHASE, (qa, qb), float(angle))


def hadamard(q: int) -> Gate:
    return Gate(HADAMARD, (q,), np.pi / 2)


def swap(qa: int, qb: int) -> Gate:
    return Gate(SWAP, (qa, qb), np.pi / 2)


# ---------------------------------------------------------------------------
# states


def basis_state(n_q: int, n: int) -> StateVector:
    N = 1 << n_q
    if not 0 <= n < N:
        raise DomainError(f"basis index {n} outside [0, {N})")
    amp = np.zeros(N, dtype=complex)
    amp[n] = 1.0
    return StateVector(amp)


def initial_state(n_q: int) -> StateVector:
    """``(|00> + |11>)|phi>/sqrt(2)`` with ``|phi>`` uniform over the low qubits.

    Equivalently, equal amplitude on ``n`` in ``[0, N/4)`` and ``[3N/4, N)``.
    """
    if n_q < 2:
        raise DomainError("initial_state needs at least two qubits")
    N = 1 << n_q
    quarter = N // 4
    amp = np.zeros(N, dtype=complex)
    amp[:quarter] = 1.0
    amp[3 * quarter:] = 1.0
    amp /= np.sqrt(2 * quarter)
    return StateVector(amp)


def uniform_state(n_q: int) -> StateVector:
    N = 1 << n_q
    return StateVector(np.full(N, 1.0 / np.sqrt(N), dtype=complex))


def random_state(n_q: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state."""
    N = 1 << n_q
    amp = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return StateVector(amp / np.linalg.norm(amp))


# ---------------------------------------------------------------------------
# gate kernels on raw arrays


def _batch_factor(value: ArrayLike, extra_dims: int) -> ArrayLike:
    """Shape a scalar or per-batch array so it broadcasts over gate views."""
    value = np.asarray(value)
    if value.ndim == 0:
        return value[()]
    return value.reshape(value.shape + (1,) * extra_dims)


def _split1(amp: np.ndarray, n_q: int, q: int) -> np.ndarray:
    return amp.reshape(amp.shape[:-1] + (1 << (q - 1), 2, 1 << (n_q - q)))


def _split2(amp: np.ndarray, n_q: int, qa: int, qb: int) -> np.ndarray:
    lo, hi = min(qa, qb), max(qa, qb)
    return amp.reshape(amp.shape[:-1] + (1 << (lo - 1), 2, 1 << (hi - lo - 1), 2, 1 << (n_q - hi)))


def apply_gate_array(
    amp: np.ndarray, n_q: int, gate: Gate, delta: Optional[ArrayLike] = None
) -> None:
    """Apply ``gate`` in place to ``amp`` of shape ``(..., 2**n_q)``.

    ``delta`` perturbs the gate's rotation angle.  It may be a scalar or an
    array matching the batch shape ``amp.shape[:-1]``.  Every gate is treated
    as ``exp(-i angle G)`` for a fixed Hermitian generator ``G``; for the
    Hadamard (``G = H``, ideal angle pi/2) and SWAP (``G = -SWAP``) the global
    phase of the ideal gate is dropped, which leaves
    ``cos(d) H - i sin(d) 1`` and ``cos(d) SWAP + i sin(d) 1``.
    """
    kind = gate.kind
    if kind == PHASE:
        (q,) = gate.qubits
        angle = gate.angle if delta is None else gate.angle + np.asarray(delta)
        view = _split1(amp, n_q, q)
        view[..., 1, :] *= _batch_factor(np.exp(1j * angle), 2)
    elif kind == CPHASE:
        qa, qb = gate.qubits
        angle = gate.angle if delta is None else gate.angle + np.asarray(delta)
        view = _split2(amp, n_q, qa, qb)
        view[..., 1, :, 1, :] *= _batch_factor(np.exp(1j * angle), 3)
    elif kind == HADAMARD and amp.flags.c_contiguous:
        (q,) = gate.qubits
        rows = amp.reshape(-1, amp.shape[-1])
        stride = 1 << (n_q - q)
        if delta is None:
            _kernels.hadamard_ideal(rows, stride, _SQRT_HALF)
        else:
            d = np.broadcast_to(np.asarray(delta, dtype=float), amp.shape[:-1]).reshape(-1)
            c = (np.cos(d) * _SQRT_HALF).astype(complex)
            s = -1j * np.sin(d)
            _kernels.hadamard_rows(rows, stride, c + s, c, s - c)
    elif kind == HADAMARD:
        (q,) = gate.qubits
        view = _split1(amp, n_q, q)
        a = view[..., 0, :].copy()
        b = view[..., 1, :]
        if delta is None:
            view[..., 0, :] = (a + b) * _SQRT_HALF
            view[..., 1, :] = (a - b) * _SQRT_HALF
        else:
            c = _batch_factor(np.cos(delta) * _SQRT_HALF, 2)
            s = _batch_factor(-1j * np.sin(delta), 2)
            new_b = c * (a - b) + s * b
            view[..., 0, :] = c * (a + b) + s * a
            view[..., 1, :] = new_b
    elif kind == SWAP:
        qa, qb = gate.qubits
        view = _split2(amp, n_q, qa, qb)
        a = view[..., 0, :, 1, :].copy()
        b = view[..., 1, :, 0, :]
        if delta is None:
            view[..., 0, :, 1, :] = b
            view[..., 1, :, 0, :] = a
        else:
            c = _batch_factor(np.cos(delta), 3)
            s = _batch_factor(1j * np.sin(delta), 3)
            view[..., 0, :, 1, :] = c * b + s * a
            view[..., 1, :, 0, :] = c * a + s * view[..., 1, :, 0, :]
            # SWAP leaves |00>,|11> fixed, so the identity part is only a phase there
            view[..., 0, :, 0, :] *= c + s
            view[..., 1, :, 1, :] *= c + s


def apply_gates_array(amp: np.ndarray, n_q: int, gates: Iterable[Gate]) -> None:
    for g in gates:
        apply_gate_array(amp, n_q, g)


def apply_gate(state: StateVector, g: Gate) -> StateVector:
    """Return a new state with the ideal gate ``g`` applied."""
    g.check(state.n_q)
    out = state.amp.copy()
    apply_gate_array(out, state.n_q, g)
    return StateVector(out)


def gate_matrix(g: Gate, n_q: int, delta: float = 0.0) -> np.ndarray:
    """Dense ``2**n_q`` square matrix of a (possibly perturbed) gate."""
    N = 1 << n_q
    cols = np.eye(N, dtype=complex)
    apply_gate_array(cols.T, n_q, g, None if delta == 0.0 else delta)
    return cols


# ---------------------------------------------------------------------------
# quantum Fourier transform


def qft_program(n_q: int, inverse: bool = False, swaps: bool = True) -> list:
    """Gate list for ``(F psi)_m = N^-1/2 sum_n exp(+2 pi i m n / N) psi_n``.

    With ``swaps=False`` the final bit reversal is omitted and the output is
    left in bit-reversed qubit order (the caller relabels instead).
    """
    gates = []
    for j in range(1, n_q + 1):
        gates.append(hadamard(j))
        for m in range(j + 1, n_q + 1):
            gates.append(cphase(m, j, 2 * np.pi / (1 << (m - j + 1))))
    if swaps:
        gates.extend(swap(j, n_q + 1 - j) for j in range(1, n_q // 2 + 1))
    if inverse:
        gates = [Gate(g.kind, g.qubits, -g.angle) if g.kind in (PHASE, CPHASE) else g
                 for g in reversed(gates)]
    return gates


def qft(state: StateVector, inverse: bool = False) -> StateVector:
    out = state.amp.copy()
    apply_gates_array(out, state.n_q, qft_program(state.n_q, inverse))
    return StateVector(out)


def dft_matrix(N: int, inverse: bool = False) -> np.ndarray:
    """Dense unitary Fourier matrix with the same sign convention as :func:`qft`."""
    sign = -1.0 if inverse else 1.0
    m = np.arange(N)
    return np.exp(sign * 2j * np.pi * np.outer(m, m) / N) / np.sqrt(N)


# ---------------------------------------------------------------------------
# observables


def partition_probabilities(state: Union[StateVector, np.ndarray]) -> np.ndarray:
    """Probabilities ``(W00, W01, W10, W11)`` of the four top-qubit quarters.

    Accepts a :class:`StateVector` or a batched ``(..., N)`` array; the
    result has shape ``(..., 4)``.
    """
    amp = state.amp if isinstance(state, StateVector) else np.asarray(state)
    blocks = amp.reshape(amp.shape[:-1] + (4, amp.shape[-1] // 4))
    return np.sum(blocks.real ** 2 + blocks.imag ** 2, axis=-1)


def bit_reversal(n_q: int) -> np.ndarray:
    idx = np.arange(1 << n_q)
    out = np.zeros_like(idx)
    for i in range(n_q):
        out |= ((idx >> i) & 1) << (n_q - 1 - i)
    return out


def qubit_bits(n_q: int, q: int) -> np.ndarray:
    """Value of qubit ``q`` (1 = most significant) for every basis index."""
    return (np.arange(1 << n_q) >> (n_q - q)) & 1


def diagonal_of(gates: Sequence[Gate], n_q: int) -> np.ndarray:
    """Diagonal of a product of PHASE/CPHASE gates (they commute)."""
    total = np.zeros(1 << n_q)
    for g in gates:
        if g.kind == PHASE:
            total += g.angle * qubit_bits(n_q, g.qubits[0])
        elif g.kind == CPHASE:
            total += g.angle * (qubit_bits(n_q, g.qubits[0]) & qubit_bits(n_q, g.qubits[1]))
        else:
            raise DomainError(f"{g.kind} is not diagonal")
    return np.exp(1j * total)
