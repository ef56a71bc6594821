"""Gate-level quantum sawtooth map on ``n_q`` qubits.

One map step is ``U = exp(i k theta^2 / 2) exp(-i T n^2 / 2)`` on a torus of
``N = 2**n_q`` momentum levels with ``T = 2 pi L / N`` (quantum resonance).
It is realized as

    rotation (diagonal in n) -> QFT -> kick (diagonal in theta) -> inverse QFT

where both diagonal operators are products of ``n_q`` PHASE and
``n_q (n_q - 1) / 2`` CPHASE gates obtained by expanding the quadratic phase
in the bits of the register index.

The QFT with the ``exp(+2 pi i m n / N)`` convention leaves the phase
register index ``j`` holding ``theta = 2 pi j / N (mod 2 pi)``, so the kick
reads ``j`` as a two's-complement integer ``s`` and uses
``theta = 2 pi s / N`` in ``[-pi, pi)``.  That is the same set of grid points
as ``-pi + 2 pi j / N`` and makes the gate program equal to the dense
:func:`direct_step` with no leftover phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import _kernels
from . import statevector as sv
from .entanglement import top_pair_observables
from .series import COLUMNS, TimeSeries
from .statevector import DomainError, Gate, StateVector


@dataclass(frozen=True)
class MapParams:
    """Map parameters ``(n_q, K, L)``; ``N``, ``T`` and ``k = K / T`` are derived."""

    n_q: int
    K: float
    L: int

    def __post_init__(self):
        if not (isinstance(self.n_q, (int, np.integer)) and self.n_q >= 2):
            raise DomainError(f"n_q must be an integer >= 2, got {self.n_q!r}")
        if not (isinstance(self.L, (int, np.integer)) and self.L > 0 and self.L % 4 == 0):
            raise DomainError(f"L must be a positive multiple of 4, got {self.L!r}")
        if self.K < 0:
            raise DomainError(f"K must be non-negative, got {self.K}")

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def T(self) -> float:
        return 2 * np.pi * self.L / self.N

    @property
    def k(self) -> float:
        return self.K / self.T


@dataclass(frozen=True)
class NoiseModel:
    """Uniform angle noise in ``(-epsilon/2, epsilon/2)`` on every gate.

    Each realization draws from its own PCG64 stream seeded by
    ``SeedSequence(seed, spawn_key=(realization_id,))``.  With
    ``noisy_swaps`` the QFT bit reversal is done by physical SWAP gates that
    also receive noise; otherwise it is a free relabeling of qubits.
    """

    epsilon: float = 0.0
    seed: int = 0
    realization_id: int = 0
    noisy_swaps: bool = False

    def __post_init__(self):
        if self.epsilon < 0:
            raise DomainError("epsilon must be >= 0")

    @property
    def ideal(self) -> bool:
        return self.epsilon == 0.0

    def rng(self, realization_id: Optional[int] = None) -> np.random.Generator:
        rid = self.realization_id if realization_id is None else realization_id
        ss = np.random.SeedSequence(self.seed, spawn_key=(int(rid),))
        return np.random.Generator(np.random.PCG64(ss))

    def with_realization(self, realization_id: int) -> "NoiseModel":
        return NoiseModel(self.epsilon, self.seed, realization_id, self.noisy_swaps)


IDEAL = NoiseModel()


@dataclass
class GateProgram:
    gates: List[Gate] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "GateProgram") -> "GateProgram":
        return GateProgram(self.gates + other.gates)

    @property
    def counts(self) -> tuple:
        """``(n_single, n_two_qubit, n_hadamard, n_swap)``."""
        kinds = [g.kind for g in self.gates]
        return (kinds.count(sv.PHASE), kinds.count(sv.CPHASE),
                kinds.count(sv.HADAMARD), kinds.count(sv.SWAP))


def expected_counts(n_q: int, physical_swaps: bool = False) -> tuple:
    """Closed-form gate counts of one map step."""
    pairs = n_q * (n_q - 1) // 2
    swaps = 2 * (n_q // 2) if physical_swaps else 0
    return (2 * n_q, 4 * pairs, 2 * n_q, swaps)


# ---------------------------------------------------------------------------
# diagonal programs


def _wrap(angle: float) -> float:
    return float(np.mod(angle, 2 * np.pi))


def build_rotation_program(p: MapParams) -> GateProgram:
    """Gates for ``diag(exp(-i T n^2 / 2))``.

    With ``T = 2 pi L / N`` every angle is ``-(pi / N) * m`` for an integer
    ``m`` which is reduced modulo ``2N`` before converting to radians.
    """
    n, N, L = p.n_q, p.N, p.L
    gates = []
    for i in range(1, n + 1):
        m = (L * (1 << (2 * (n - i)))) % (2 * N)
        gates.append(sv.phase(i, _wrap(-np.pi * m / N)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            m = (2 * L * (1 << (2 * n - i - j))) % (2 * N)
            gates.append(sv.cphase(i, j, _wrap(-np.pi * m / N)))
    return GateProgram(gates)


def _signed_weights(n_q: int) -> List[int]:
    # two's-complement weight of each register bit, qubit 1 first
    return [-(1 << (n_q - 1))] + [1 << (n_q - i) for i in range(2, n_q + 1)]


def build_kick_program(p: MapParams, labels: Optional[Sequence[int]] = None) -> GateProgram:
    """Gates for ``diag(exp(i k theta_j^2 / 2))`` on the phase register.

    ``labels[i-1]`` is the physical qubit that carries register bit ``i``;
    it defaults to the identity and is bit-reversed when the QFT swaps are
    replaced by relabeling.
    """
    n, N = p.n_q, p.N
    labels = list(range(1, n + 1)) if labels is None else list(labels)
    c = _signed_weights(n)
    # k (2 pi / N)^2 = 2 pi K / (L N)
    scale = 2 * np.pi * p.K / (p.L * N)
    gates = []
    for i in range(n):
        gates.append(sv.phase(labels[i], _wrap(0.5 * scale * c[i] * c[i])))
    for i in range(n):
        for j in range(i + 1, n):
            gates.append(sv.cphase(labels[i], labels[j], _wrap(scale * c[i] * c[j])))
    return GateProgram(gates)


def kick_angles(p: MapParams) -> np.ndarray:
    """``theta`` at each phase-register index ``j`` (two's-complement reading)."""
    j = np.arange(p.N)
    s = np.where(j >= p.N // 2, j - p.N, j)
    return 2 * np.pi * s / p.N


def build_step_program(p: MapParams, physical_swaps: bool = False) -> GateProgram:
    """Full gate program of one map step."""
    n = p.n_q
    rot = build_rotation_program(p)
    if physical_swaps:
        fwd = sv.qft_program(n, inverse=False, swaps=True)
        kick = build_kick_program(p)
        back = sv.qft_program(n, inverse=True, swaps=True)
    else:
        fwd = sv.qft_program(n, inverse=False, swaps=False)
        kick = build_kick_program(p, labels=range(n, 0, -1))
        back = sv.qft_program(n, inverse=True, swaps=False)
    return GateProgram(rot.gates + fwd + kick.gates + back)


# ---------------------------------------------------------------------------
# execution


def noisy_angle(phi: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    """``phi + delta`` with ``delta`` uniform in ``(-epsilon/2, epsilon/2)``."""
    if noise.epsilon == 0.0:
        return phi
    return phi + rng.uniform(-0.5 * noise.epsilon, 0.5 * noise.epsilon)


def _compile(program: GateProgram, n_q: int, ideal: bool) -> list:
    """Group the program into runs of commuting diagonal gates and single gates.

    Ideal runs become one precomputed diagonal.  Noisy runs keep the gate
    indices so each gate can receive its own angle perturbation.
    """
    ops, run = [], []

    def flush():
        if run:
            idx = [i for i, _ in run]
            gates = [g for _, g in run]
            ops.append(("diag", sv.diagonal_of(gates, n_q) if ideal else (idx, gates)))
            run.clear()

    for i, g in enumerate(program):
        if g.kind in (sv.PHASE, sv.CPHASE):
            run.append((i, g))
            continue
        flush()
        ops.append(("gate", (i, g)))
    flush()
    return ops


def diagonal_run_factor(gates: Sequence[Gate], deltas: np.ndarray, n_q: int):
    """Diagonal of a run of perturbed PHASE/CPHASE gates for a batch.

    ``deltas`` has shape ``(B, len(gates))``.  Returns ``(q0, F)`` where ``F``
    of shape ``(B, 2**(n_q - q0 + 1))`` is the diagonal restricted to qubits
    ``q0..n_q`` (qubits above ``q0`` are untouched).  ``F`` is built as a
    product of per-gate ``[1, exp(i angle)]`` factors, so only ``B *
    len(gates)`` complex exponentials are evaluated.
    """
    B = deltas.shape[0]
    q0 = min(min(g.qubits) for g in gates)
    m = n_q - q0 + 1
    single = np.ones((B, m), dtype=complex)
    pair = np.ones((B, m, m), dtype=complex)
    active = np.zeros((m, m), dtype=np.bool_)
    phases = np.exp(1j * (np.array([g.angle for g in gates])[None, :] + deltas))
    for col, g in enumerate(gates):
        if g.kind == sv.PHASE:
            single[:, g.qubits[0] - q0] *= phases[:, col]
        else:
            a, b = sorted(q - q0 for q in g.qubits)
            pair[:, a, b] *= phases[:, col]
            active[a, b] = True
    return q0, _kernels.diagonal_factor(single, pair, active)


class Propagator:
    """Applies map steps to a batch of states, one row per noise realization.

    ``realization_ids`` selects the RNG stream of each row.  Runs of
    consecutive diagonal gates are applied as a single factor (they commute
    exactly).  In the noisy case every gate in the run still gets its own
    angle perturbation; ``fused=False`` applies gates one by one instead,
    which is slower and kept as a cross-check.
    """

    def __init__(self, p: MapParams, noise: NoiseModel = IDEAL,
                 realization_ids: Optional[Sequence[int]] = None, fused: bool = True):
        self.params = p
        self.noise = noise
        self.fused = fused
        self.program = build_step_program(p, physical_swaps=noise.noisy_swaps)
        if realization_ids is None:
            realization_ids = [noise.realization_id]
        self.realization_ids = list(realization_ids)
        self.rngs = [noise.rng(r) for r in self.realization_ids]
        self._ops = _compile(self.program, p.n_q, noise.ideal)

    @property
    def batch(self) -> int:
        return len(self.realization_ids)

    def draw_deltas(self) -> np.ndarray:
        """Angle perturbations for one step, shape ``(batch, n_gates)``."""
        half = 0.5 * self.noise.epsilon
        size = len(self.program)
        return np.vstack([rng.uniform(-half, half, size) for rng in self.rngs])

    def step(self, amp: np.ndarray) -> None:
        """Advance ``amp`` of shape ``(batch, N)`` (or ``(N,)`` if batch is 1) in place."""
        n_q = self.params.n_q
        if self.noise.ideal:
            for kind, op in self._ops:
                if kind == "gate":
                    sv.apply_gate_array(amp, n_q, op[1])
                else:
                    amp *= op
            return
        deltas = self.draw_deltas()
        squeeze = amp.ndim == 1
        work = amp[None, :] if squeeze else amp
        if not self.fused:
            for g, d in zip(self.program.gates, deltas.T):
                sv.apply_gate_array(work, n_q, g, d)
            return
        B = work.shape[0]
        for kind, op in self._ops:
            if kind == "gate":
                i, g = op
                sv.apply_gate_array(work, n_q, g, deltas[:, i])
            else:
                idx, gates = op
                q0, F = diagonal_run_factor(gates, deltas[:, idx], n_q)
                view = work.reshape(B, 1 << (q0 - 1), F.shape[1])
                view *= F[:, None, :]


def map_step(state: StateVector, p: MapParams, noise: NoiseModel = IDEAL,
             propagator: Optional[Propagator] = None) -> StateVector:
    """One map step through the gate program.

    Pass a persistent ``propagator`` to continue one noise stream across
    calls; otherwise a fresh stream for ``noise.realization_id`` is used.
    """
    if state.n_q != p.n_q:
        raise DomainError(f"state has {state.n_q} qubits, params expect {p.n_q}")
    prop = propagator if propagator is not None else Propagator(p, noise)
    out = state.amp.copy()
    prop.step(out)
    return StateVector(out)


@lru_cache(maxsize=8)
def _phase_basis(n_q: int) -> np.ndarray:
    N = 1 << n_q
    theta = -np.pi + 2 * np.pi * np.arange(N) / N
    return np.exp(1j * np.outer(theta, np.arange(N))) / np.sqrt(N)


def direct_step(state: StateVector, p: MapParams) -> StateVector:
    """Dense reference step, ``O(N^2)``.

    Uses ``psi(theta_j) = N^-1/2 sum_n exp(i n theta_j) psi_n`` with
    ``theta_j = -pi + 2 pi j / N`` and applies the two diagonal factors of
    the map literally.
    """
    if state.n_q != p.n_q:
        raise DomainError(f"state has {state.n_q} qubits, params expect {p.n_q}")
    if p.n_q > 12:
        raise DomainError("direct_step is limited to n_q <= 12")
    N = p.N
    n = np.arange(N)
    theta = -np.pi + 2 * np.pi * n / N
    M = _phase_basis(p.n_q)
    # T n^2 / 2 = pi L n^2 / N; reduce the integer part exactly
    rot = np.exp(-1j * np.pi * ((p.L * n * n) % (2 * N)) / N)
    kick = np.exp(1j * p.k * theta ** 2 / 2)
    psi = M @ (rot * state.amp)
    return StateVector(M.conj().T @ (kick * psi))


# ---------------------------------------------------------------------------
# time evolution

Observer = Callable[[int, np.ndarray], None]


def _record(amp: np.ndarray) -> dict:
    return top_pair_observables(amp)


def evolve_ensemble(state: StateVector, p: MapParams, t_max: int,
                    noise: NoiseModel = IDEAL,
                    realization_ids: Optional[Sequence[int]] = None,
                    observer: Optional[Observer] = None) -> List[TimeSeries]:
    """Evolve copies of ``state`` under independent noise realizations.

    Returns one :class:`TimeSeries` per realization with records at
    ``t = 0 .. t_max``.  ``observer(t, amp)`` is called after every record
    with a read-only view of the ``(batch, N)`` amplitudes.
    """
    if state.n_q != p.n_q:
        raise DomainError(f"state has {state.n_q} qubits, params expect {p.n_q}")
    if t_max < 0:
        raise DomainError("t_max must be >= 0")
    prop = Propagator(p, noise, realization_ids)
    B = prop.batch
    amp = np.repeat(state.amp[None, :], B, axis=0)
    rec = {name: np.empty((B, t_max + 1)) for name in COLUMNS}

    def take(t):
        obs = _record(amp)
        for name in COLUMNS:
            rec[name][:, t] = obs[name]
        if observer is not None:
            view = amp.view()
            view.flags.writeable = False
            observer(t, view)

    take(0)
    for t in range(1, t_max + 1):
        prop.step(amp)
        take(t)
    t_axis = np.arange(t_max + 1)
    out = []
    for b, rid in enumerate(prop.realization_ids):
        meta = {"n_q": p.n_q, "K": p.K, "L": p.L, "epsilon": noise.epsilon,
                "seed": noise.seed, "realization_id": rid, "noisy_swaps": noise.noisy_swaps}
        out.append(TimeSeries(t_axis.copy(), {k: v[b].copy() for k, v in rec.items()}, meta))
    return out


def evolve(state: StateVector, p: MapParams, t_max: int, noise: NoiseModel = IDEAL,
           observer: Optional[Observer] = None) -> TimeSeries:
    """Iterate the map ``t_max`` times recording the top-pair observables."""
    return evolve_ensemble(state, p, t_max, noise, [noise.realization_id], observer)[0]
