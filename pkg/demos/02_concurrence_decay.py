"""
Concurrence relaxation of the top qubit pair
============================================

Start from (|00> + |11>)|phi>/sqrt(2) and iterate the map.  The concurrence of
the two most significant qubits relaxes like A exp(-gamma t) + C_bar, and
gamma should be close to the classical relaxation rate D0 / (2 L^2).
"""

import numpy as np

from qsawtooth import analysis as an
from qsawtooth import classical as cl
from qsawtooth import quantum_map as qm
from qsawtooth import statevector as sv

K, L = 0.5, 4
p = qm.MapParams(10, K, L)
ts = qm.evolve(sv.initial_state(p.n_q), p, t_max=4000)

for t in (0, 10, 50, 100, 200, 500, 1000, 4000):
    print(f"t={t:5d}  C={ts['C'][t]:.4f}  W00+W11={ts['W00'][t] + ts['W11'][t]:.4f}")

fit = an.fit_exp_plateau(ts)
print(f"fit: A={fit.A:.3f} gamma={fit.gamma:.5f} C_bar={fit.C_bar:.4f} converged={fit.converged}")

# classical prediction (a smaller ensemble than the default keeps this quick)
D0 = cl.estimate_D0(K, M=20_000, t_max=1000).D0
gc = cl.gamma_c(K, L, D0)
print(f"D0={D0:.4f} gamma_c={gc:.5f} gamma/gamma_c={fit.gamma / gc:.2f}")

# the plateau value, averaged from seven relaxation times on
start = an.default_plateau_start(gc)
print(f"C_bar (t >= {start}) = {an.residual_concurrence(ts, start):.4f}")

np.savetxt("concurrence_nq10.txt", np.column_stack([ts.t, ts["C"]]), header="t C")
