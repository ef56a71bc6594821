"""
Classical diffusion rate D0(K)
==============================

For the classical sawtooth map, the momentum y = T n spreads diffusively with
rate D0(K).  At large K it approaches the random-phase value pi^2 K^2/3; at
small K cantori suppress it toward 1.2 pi^2 K^2.5/3.
"""

from qsawtooth import classical as cl

print(" K      D0      D0/D_ql   cantori   R^2")
for K in (0.1, 0.2, 0.5, 1.0, 2.0, 3.0):
    est = cl.estimate_D0(K, M=20_000, t_max=1000, seed=1)
    print(f"{K:4.1f}  {est.D0:8.4f}  {est.D0 / cl.D_quasilinear(K):7.3f}  "
          f"{cl.D_cantori(K):8.4f}  {est.r_squared:.4f}")

# forward then backward: the map is exactly invertible
n, th = 0.3, 1.2
n1, th1 = cl.classical_step(n, th, 2.0, 1.0)
n2, th2 = cl.classical_step_back(n1, th1, 2.0, 1.0)
print(f"round trip: ({n2:.15f}, {th2:.15f}) from ({n}, {th})")
