"""
One map step, gate by gate
==========================

The sawtooth map step exp(i k theta^2/2) exp(-i T n^2/2) is built from PHASE,
CPHASE and HADAMARD gates.  Here we count them and check the program against a
dense N x N evaluation of the same step.
"""

import numpy as np

from qsawtooth import quantum_map as qm
from qsawtooth import statevector as sv

p = qm.MapParams(n_q=8, K=0.5, L=4)
print(f"N = {p.N}, T = {p.T:.5f}, k = {p.k:.3f}")

# the program: rotation, QFT, kick, inverse QFT
prog = qm.build_step_program(p)
n_phase, n_cphase, n_had, n_swap = prog.counts
print(f"{len(prog)} gates: {n_phase} PHASE, {n_cphase} CPHASE, {n_had} HADAMARD, {n_swap} SWAP")

# with physical swaps the bit reversal costs floor(n_q/2) gates per transform
phys = qm.build_step_program(p, physical_swaps=True)
print(f"with physical swaps: {len(phys)} gates")

# compare against the dense oracle on a random state
rng = np.random.default_rng(1)
psi = sv.random_state(p.n_q, rng)
gate = qm.map_step(psi, p)
dense = qm.direct_step(psi, p)
print("max |gate - dense| =", np.max(np.abs(gate.amp - dense.amp)))

# gate count grows like n_q^2
for n in (4, 8, 12, 16, 20):
    print(n, len(qm.build_step_program(qm.MapParams(n, 0.5, 4))))
