"""Acceptance suite: one PASS/FAIL line per criterion at the stated tolerances.

Run with ``pytest -v tests/test_acceptance.py``.  The physics criteria (3-5)
evolve n_q up to 14 for 10^4 steps and take several minutes each on one core.
Set ``QSAWTOOTH_ACCEPTANCE_OUT`` to keep the experiment outputs.
"""

import os
import tempfile
from pathlib import Path

import numpy as np
import pytest

from qsawtooth import classical as cl
from qsawtooth import entanglement as ent
from qsawtooth import harness
from qsawtooth import quantum_map as qm
from qsawtooth import statevector as sv
from qsawtooth.harness import ExperimentConfig


@pytest.fixture(scope="module")
def out_dir():
    root = os.environ.get("QSAWTOOTH_ACCEPTANCE_OUT")
    if root:
        Path(root).mkdir(parents=True, exist_ok=True)
        return Path(root)
    return Path(tempfile.mkdtemp(prefix="qsawtooth-acceptance-"))


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok
    return emit


def up_to_phase(a, b):
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.max(np.abs(a - ph * b)))


def test_criterion_1_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n_q in (4, 6, 8, 10):
        for _ in range(20):
            p = qm.MapParams(n_q, float(rng.uniform(0.1, 3.0)), int(rng.choice([4, 8])))
            s = sv.random_state(n_q, rng)
            worst = max(worst, up_to_phase(qm.map_step(s, p).amp, qm.direct_step(s, p).amp))
    ok = worst <= 1e-9
    report(1, ok, f"gate program vs dense step, max elementwise error {worst:.2e} (tol 1e-9)")
    assert ok


def test_criterion_2_concurrence_suite(report):
    bell = ent.reduce_top_two(sv.initial_state(6))
    c_bell = ent.concurrence(bell).C
    c_mixed = ent.concurrence(np.eye(4) / 4).C
    werner = 0.5 * bell.rho + 0.5 * np.eye(4) / 4
    c_werner = ent.concurrence(werner).C

    rng = np.random.default_rng(7)
    n_q = 7
    amp = sv.random_state(n_q, rng).amp + 2 * sv.initial_state(n_q).amp
    s = sv.StateVector(amp / np.linalg.norm(amp))
    c0 = ent.concurrence(ent.reduce_top_two(s)).C
    for q in range(3, n_q + 1):
        s = sv.apply_gate(s, sv.hadamard(q))
        s = sv.apply_gate(s, sv.phase(q, rng.uniform(0, 2 * np.pi)))
    lu_shift = abs(ent.concurrence(ent.reduce_top_two(s)).C - c0)

    lo, hi = np.inf, -np.inf
    for n_q in range(4, 9):
        a = rng.standard_normal((2000, 1 << n_q)) + 1j * rng.standard_normal((2000, 1 << n_q))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        C = ent.concurrence_from_lambdas(ent.concurrence_lambdas(ent.reduced_rho(a)))
        lo, hi = min(lo, C.min()), max(hi, C.max())

    ok = (abs(c_bell - 1) <= 1e-10 and abs(c_mixed) <= 1e-10 and abs(c_werner - 0.25) <= 1e-10
          and lu_shift <= 1e-10 and lo >= 0 and hi <= 1)
    report(2, ok, f"Bell C={c_bell:.12f}, mixed C={c_mixed:.1e}, Werner(0.5) C={c_werner:.12f}, "
                  f"local-unitary shift {lu_shift:.1e}, 10^4 random states C in [{lo:.3f}, {hi:.3f}]")
    assert ok


@pytest.fixture(scope="module")
def gamma_table(out_dir):
    cfg = ExperimentConfig(kind="gamma_vs_K", n_q=[12], K=[0.3, 0.5, 1.0, 2.0], L=[4],
                           t_max=10_000, seed=0, out=str(out_dir / "gamma_vs_K"))
    return harness.run_gamma_vs_K(cfg)


def test_criterion_3a_gamma_equals_gamma_c(gamma_table, report):
    row = next(r for r in gamma_table.rows if r["K"] == 0.5)
    ratio = row["gamma_over_gamma_c"]
    ok = abs(ratio - 1) <= 0.25
    report("3a", ok, f"K=0.5 n_q=12: gamma={row['gamma']:.5f}, gamma_c={row['gamma_c']:.5f}, "
                     f"ratio {ratio:.3f} (tol +-25%)")
    assert ok


def test_criterion_3b_gamma_tracks_D0(gamma_table, report):
    parts, ok = [], True
    for r in gamma_table.rows:
        dev = r["gamma_tilde"] / r["D0"] - 1
        ok &= abs(dev) <= 0.35
        parts.append(f"K={r['K']:g}: {r['gamma_tilde']:.4f}/{r['D0']:.4f} ({dev:+.1%})")
    report("3b", ok, "2 gamma L^2 vs D0 per point (tol +-35%): " + "; ".join(parts))
    assert ok


def test_criterion_4_residual_scaling(out_dir, report):
    cfg = ExperimentConfig(kind="residual_vs_g", n_q=[8, 10, 12, 14], K=[0.5], L=[4],
                           t_max=10_000, seed=0, out=str(out_dir / "residual_vs_g"))
    res = harness.run_residual_vs_g(cfg)
    slope = res.extra["scaling"]["exponent"]
    pts = ", ".join(f"g={r['g']:.1f}: {r['C_bar']:.4f}" for r in res.rows)
    ok = abs(slope + 0.5) <= 0.15
    report(4, ok, f"log C_bar vs log g slope {slope:.3f} (target -0.5 +- 0.15); {pts}")
    assert ok


def test_criterion_5_decoherence_law(out_dir, report):
    eps = [0.004, 0.007, 0.01]
    nqs = [8, 10, 12]
    cfg = ExperimentConfig(kind="noise_scaling", n_q=nqs, K=[0.5], L=[4], epsilon=eps,
                           t_max=10_000, realizations=20, seed=0,
                           out=str(out_dir / "noise_scaling"))
    res = harness.run_noise_scaling(cfg)
    table = {(r["n_q"], r["epsilon"]): r for r in res.rows if "Gamma" in r}
    missing = [(n, e) for n in nqs for e in eps if (n, e) not in table]

    spreads = {}
    for n in nqs:
        if any((n, e) in missing for e in eps):
            continue
        per_eps2 = np.array([table[n, e]["Gamma"] / e ** 2 for e in eps])
        spreads[n] = float(np.max(np.abs(per_eps2 / per_eps2.mean() - 1)))
    ok_a = not missing and all(v <= 0.30 for v in spreads.values())

    prefactors = np.array([r["prefactor"] for r in table.values() if r.get("Gamma", 0) > 0])
    pooled = float(np.exp(np.mean(np.log(prefactors)))) if len(prefactors) else float("nan")
    ok_b = not missing and 0.29 <= pooled <= 1.16

    cells = " ".join(f"({n},{e:g})={table[n, e]['prefactor']:.2f}" for n, e in sorted(table))
    lost = " ".join(f"({n},{e:g})" for n, e in missing) or "none"
    spread_txt = ", ".join(f"n_q={n}: {v:.1%}" for n, v in spreads.items()) or "none computable"
    report("5a", ok_a, f"Gamma/eps^2 spread across eps at fixed n_q (tol 30%): {spread_txt}; "
                       f"failed fits: {lost}")
    report("5b", ok_b, f"pooled Gamma/(eps^2 sqrt N) = {pooled:.3f} over fitted points "
                       f"(band [0.29, 1.16]); per (n_q, eps): {cells}; failed fits: {lost}")
    assert ok_a and ok_b


def test_criterion_6_classical_suite(report):
    rng = np.random.default_rng(5)
    n0, th0 = rng.standard_normal(10_000), rng.uniform(-np.pi, np.pi, 10_000)
    errs = []
    for K in (0.1, 0.5, 2.0):
        n1, th1 = cl.classical_step(n0, th0, K, 1.0)
        n2, th2 = cl.classical_step_back(n1, th1, K, 1.0)
        errs.append(max(np.max(np.abs(n2 - n0)), np.max(np.abs(np.angle(np.exp(1j * (th2 - th0)))))))
    rev = float(max(errs))
    r2 = cl.estimate_D0(2.0).D0 / cl.D_quasilinear(2.0)
    r01 = cl.estimate_D0(0.1).D0 / cl.D_quasilinear(0.1)
    d05 = cl.estimate_D0(0.5).D0
    f05 = d05 / cl.D_cantori(0.5)
    ok = rev <= 1e-10 and 0.5 <= r2 <= 1.5 and r01 < 0.5 and 0.5 <= f05 <= 2
    report(6, ok, f"reversibility {rev:.1e}; D0/D_ql at K=2: {r2:.3f}, at K=0.1: {r01:.3f}; "
                  f"D0(0.5)={d05:.4f} vs {cl.D_cantori(0.5):.4f} (ratio {f05:.2f})")
    assert ok


def test_criterion_7_invariants(tmp_path, report):
    p = qm.MapParams(6, 0.5, 4)
    ts = qm.evolve(sv.initial_state(6), p, 10_000, qm.NoiseModel(0.05, seed=3))
    norm_drift = float(np.max(np.abs(ts["norm"] - 1)))

    rt = 0.0
    for n_q in (4, 8, 12):
        s = sv.random_state(n_q, np.random.default_rng(n_q))
        rt = max(rt, float(np.max(np.abs(sv.qft(sv.qft(s), inverse=True).amp - s.amp))))

    herm, tr, neg = 0.0, 0.0, 0.0

    def check(t, amp):
        nonlocal herm, tr, neg
        rho = ent.reduced_rho(amp)
        b = amp.reshape(amp.shape[0], 4, -1)
        raw = b @ np.swapaxes(b.conj(), -1, -2)  # before symmetrization
        herm = max(herm, float(np.max(np.abs(raw - np.swapaxes(raw.conj(), -1, -2)))))
        tr = max(tr, float(np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1))))
        neg = min(neg, float(np.min(np.linalg.eigvalsh(rho))))

    qm.evolve(sv.initial_state(10), qm.MapParams(10, 0.5, 4), 500, qm.NoiseModel(0.01, seed=4),
              observer=check)

    kw = dict(kind="single_run", n_q=[8], K=[0.5], L=[4], epsilon=[0.01], t_max=300,
              realizations=2, seed=11)
    harness.run_single(ExperimentConfig(out=str(tmp_path / "a"), **kw))
    harness.run_single(ExperimentConfig(out=str(tmp_path / "b"), **kw))
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in os.listdir(tmp_path / "a") if f.endswith(".csv"))

    ok = norm_drift <= 1e-8 and rt <= 1e-10 and herm <= 1e-12 and tr <= 1e-10 and neg >= -1e-10 and same
    report(7, ok, f"norm drift {norm_drift:.1e} over 10^4 noisy steps; QFT round trip {rt:.1e}; "
                  f"rho Hermiticity {herm:.1e}, trace {tr:.1e}, min eigenvalue {neg:.1e}; "
                  f"seeded CSV reruns identical: {same}")
    assert ok
