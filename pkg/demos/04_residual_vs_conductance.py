"""
Residual concurrence against conductance
========================================

After relaxation the concurrence fluctuates around a small residual value.
It shrinks with the conductance g = N D0 / L^2, roughly as 1/sqrt(g).
"""

import numpy as np

from qsawtooth import analysis as an
from qsawtooth import classical as cl
from qsawtooth import quantum_map as qm
from qsawtooth import statevector as sv

K, L = 0.5, 4
D0 = cl.estimate_D0(K, M=20_000).D0
start = an.default_plateau_start(cl.gamma_c(K, L, D0))

points = []
for n_q in (6, 7, 8, 9, 10, 11):
    p = qm.MapParams(n_q, K, L)
    ts = qm.evolve(sv.initial_state(n_q), p, t_max=5000)
    g = cl.conductance(p, D0)
    cbar = an.residual_concurrence(ts, start)
    points.append((g, cbar))
    print(f"n_q={n_q:2d}  g={g:7.2f}  C_bar={cbar:.4f}  C_bar*sqrt(g)={cbar * np.sqrt(g):.3f}")

fit = an.scaling_fit(points)
print(f"C_bar ~ g^{fit.exponent:.2f} (+- {fit.stderr:.2f})")
