"""
Noisy gates and the decay of residual entanglement
==================================================

Every gate angle is perturbed by a uniform random amount in (-eps/2, eps/2).
The state fidelity decays slowly, at a rate set by eps^2 times the gate
count.  The residual concurrence is far more fragile: the ratio of the
noise-averaged concurrence to the ideal one falls off much faster.
"""

import numpy as np

from qsawtooth import analysis as an
from qsawtooth import quantum_map as qm
from qsawtooth import statevector as sv

p = qm.MapParams(8, 0.5, 4)
eps = 0.01
psi0 = sv.initial_state(p.n_q)

ideal = qm.Propagator(p)
noisy = qm.Propagator(p, qm.NoiseModel(eps, seed=7), realization_ids=range(20))
a = psi0.amp.copy()
b = np.repeat(psi0.amp[None], noisy.batch, axis=0)
for t in range(1, 2001):
    ideal.step(a)
    noisy.step(b)
    if t % 500 == 0:
        F = np.mean(np.abs(b.conj() @ a) ** 2)
        print(f"t={t}  fidelity={F:.4f}  -ln(F)/t={-np.log(F) / t:.2e}")

# concurrence: ideal run against 20 noisy realizations
t_max = 6000
ideal_ts = qm.evolve(psi0, p, t_max)
noisy_ts = qm.evolve_ensemble(psi0, p, t_max, qm.NoiseModel(eps, seed=7), range(20))
fit = an.fit_noise_rate(noisy_ts, ideal_ts, plateau_start=338)
print(f"Gamma = {fit.Gamma:.2e} per step, Gamma/(eps^2 sqrt N) = {fit.Gamma / (eps**2 * np.sqrt(p.N)):.2f}")
print(f"fit window {fit.window}, {fit.n_excluded} of {fit.n_points + fit.n_excluded} points excluded")
