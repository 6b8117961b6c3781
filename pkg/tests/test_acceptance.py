"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one `criterion N: PASS/FAIL` line (run with `-s` or
`-rA` to see them on success). The two Monte-Carlo sweeps are shared
session fixtures; expect the full module to take on the order of ten
minutes on a laptop-class machine.
"""

import subprocess
import sys

import numpy as np
import pytest

from sparsebeam import (
    Infeasible,
    MultibandProblem,
    PowerModel,
    QosTargets,
    sinr_of,
    solve_total_power_multiband,
    solve_total_power_narrowband,
    solve_total_power_papc,
    solve_weighted,
)
from sparsebeam.baselines import oracle_solve_weighted, solve_qos_papc
from sparsebeam.harness import preset_config, run_experiment, summarize
from sparsebeam.papc import CS_TOL
from conftest import channel_set, rayleigh

# reference mean active-antenna counts at the default operating point
# (K=4 users, 3 dB targets, unit noise, c1=0.3 W, 30% amplifier
# efficiency, cap 0.4 W, delta=1e-4, 6 reweighting iterations)
TABLE1_NT = (8, 12, 16, 20, 24, 28, 32)
TABLE1_ALG1 = (7.41, 8.82, 9.22, 9.32, 9.33, 9.27, 9.30)
TABLE1_ALG2 = (7.47, 8.83, 9.22, 9.32, 9.33, 9.27, 9.30)
TABLE1_GREEDY = (7.80, 9.91, 9.87, 9.71, 9.36, 9.12, 9.01)
TABLE2_NB = tuple(range(1, 11))
TABLE2_MULTIBAND = (11, 17, 21, 25, 27, 29, 30, 31, 31, 32)

C2 = 1.0 / 0.3


def report(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)


@pytest.fixture(scope="session")
def antenna_sweep():
    """500-trial sweep of all narrowband methods over the antenna grid."""
    cfg = preset_config("fig1", trials=500)
    return run_experiment(cfg, "fig1", parallel=2)


@pytest.fixture(scope="session")
def band_sweep():
    """300-trial multiband sweep over 1..10 bands at 32 antennas."""
    cfg = preset_config("table2", trials=300)
    return run_experiment(cfg, "table2", parallel=2)


def test_criterion_1_closed_form_exactness():
    rng = np.random.default_rng(101)
    worst_p = worst_u = 0.0
    for _ in range(50):
        h = rayleigh(rng, 1, 6)
        gamma = float(rng.uniform(0.5, 4.0))
        sigma2 = float(rng.uniform(0.5, 2.0))
        w, _ = solve_weighted(h, np.array([gamma]), np.array([sigma2]), 1.0, np.zeros(6))
        gain = np.linalg.norm(h[0]) ** 2
        worst_p = max(worst_p, abs(np.sum(np.abs(w) ** 2) - gamma * sigma2 / gain))
        u = w[0] / np.linalg.norm(w[0])
        worst_u = max(worst_u, abs(abs(np.vdot(u, h[0] / np.linalg.norm(h[0]))) - 1.0))
    # orthogonal channels decouple user by user
    worst_orth = 0.0
    for trial in range(20):
        k, nt = 3, 9
        h = np.zeros((k, nt), dtype=complex)
        gains = rng.uniform(0.5, 2.0, k)
        for i in range(k):
            h[i, 3 * i] = gains[i] * np.exp(1j * rng.uniform(0, 2 * np.pi))
        gamma = rng.uniform(1.0, 3.0, k)
        sigma2 = rng.uniform(0.5, 2.0, k)
        w, _ = solve_weighted(h, gamma, sigma2, 1.0, np.zeros(nt))
        p = np.sum(np.abs(w) ** 2, axis=1)
        worst_orth = max(worst_orth, np.max(np.abs(p - gamma * sigma2 / gains ** 2)))
    ok = worst_p < 1e-10 and worst_u < 1e-10 and worst_orth < 1e-9
    report(1, ok, f"single-user err p={worst_p:.1e} u={worst_u:.1e}, "
                  f"orthogonal err {worst_orth:.1e}")
    assert worst_p < 1e-10
    assert worst_u < 1e-10
    assert worst_orth < 1e-9


def test_criterion_2_kkt_suite():
    rng = np.random.default_rng(202)
    dims = [(nt, k) for nt in (4, 8, 16) for k in (2, 4)]
    worst = dict(residual=0.0, eigen=0.0, sinr=0.0, minpower=np.inf)
    for i in range(1000):
        nt, k = dims[i % len(dims)]
        h = rayleigh(rng, k, nt)
        gamma = rng.uniform(0.5, 4.0, k)
        sigma2 = rng.uniform(0.5, 2.0, k)
        kind = i % 3
        d = (np.zeros(nt) if kind == 0 else
             np.full(nt, 0.3) if kind == 1 else rng.uniform(0.0, 1.0, nt))
        w, nu = solve_weighted(h, gamma, sigma2, C2, d)
        # independent residual recompute
        a = C2 * np.eye(nt, dtype=complex) + np.diag(d).astype(complex)
        for j in range(k):
            a += nu[j] * np.outer(h[j], h[j].conj())
        rhs = np.array([np.real(h[j].conj() @ np.linalg.solve(a, h[j])) for j in range(k)])
        worst["residual"] = max(worst["residual"],
                                np.max(np.abs(nu * (1 + 1 / gamma) * rhs - 1)))
        u = w / np.linalg.norm(w, axis=1, keepdims=True)
        for j in range(k):
            bracket = (nu[j] / gamma[j]) * np.outer(h[j], h[j].conj()) - np.diag(d).astype(complex)
            for m in range(k):
                if m != j:
                    bracket -= nu[m] * np.outer(h[m], h[m].conj())
            worst["eigen"] = max(worst["eigen"], np.linalg.norm(C2 * u[j] - bracket @ u[j]))
        worst["sinr"] = max(worst["sinr"],
                            np.max(np.abs(sinr_of(w, h, sigma2) / gamma - 1)))
        worst["minpower"] = min(worst["minpower"], np.min(np.sum(np.abs(w) ** 2, axis=1)))
    ok = (worst["residual"] <= 1e-9 and worst["eigen"] <= 1e-6
          and worst["sinr"] <= 1e-6 and worst["minpower"] >= 0)
    report(2, ok, f"1000 instances: residual {worst['residual']:.1e}, eigen "
                  f"{worst['eigen']:.1e}, sinr {worst['sinr']:.1e}, "
                  f"min power {worst['minpower']:.1e}")
    assert worst["residual"] <= 1e-9
    assert worst["eigen"] <= 1e-6
    assert worst["sinr"] <= 1e-6
    assert worst["minpower"] >= 0


def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(303)
    worst = 0.0
    for i in range(200):
        k = int(rng.integers(2, 5))
        nt = int(rng.integers(k, 9))
        h = rayleigh(rng, k, nt)
        gamma = rng.uniform(0.8, 3.0, k)
        sigma2 = rng.uniform(0.5, 2.0, k)
        for d in (np.zeros(nt), np.full(nt, 0.3)):
            w, _ = solve_weighted(h, gamma, sigma2, C2, d)
            w_o = oracle_solve_weighted(h, gamma, sigma2, C2, d)
            weights = C2 + d
            obj = float(np.sum(weights * np.sum(np.abs(w) ** 2, axis=0)))
            obj_o = float(np.sum(weights * np.sum(np.abs(w_o) ** 2, axis=0)))
            worst = max(worst, abs(obj - obj_o) / obj_o)
    ok = worst < 1e-3
    report(3, ok, f"200 instances x two loadings: worst objective gap {worst:.2e}")
    assert worst < 1e-3


def test_criterion_4_mm_descent():
    pm = PowerModel()
    qos = QosTargets.uniform(4)
    worst_rise = -np.inf
    for seed in range(100):
        rng = np.random.default_rng(40_000 + seed)
        nt = int(rng.choice([8, 12, 16]))
        ch = channel_set(rayleigh(rng, 4, nt))
        sol = solve_total_power_narrowband(ch, qos, pm)
        surr = np.array([it.surrogate_objective for it in sol.diagnostics.history])
        worst_rise = max(worst_rise, float(np.max(np.diff(surr))))
    ok = worst_rise <= 1e-9
    report(4, ok, f"100 instances, 6 iterations: max surrogate increase {worst_rise:.2e}")
    assert worst_rise <= 1e-9


def test_criterion_5_antenna_table(antenna_sweep):
    stats = summarize(antenna_sweep)
    rows = {"alg1": TABLE1_ALG1, "alg2": TABLE1_ALG2, "greedy": TABLE1_GREEDY}
    details = []
    ok = True
    for method, expected in rows.items():
        means = [stats[(nt, 1, method)]["mean_n_active"] for nt in TABLE1_NT]
        gaps = [abs(m - e) for m, e in zip(means, expected)]
        ok &= max(gaps) <= 1.0
        details.append(f"{method} worst gap {max(gaps):.2f}")
        print(f"  {method} mean n_active: "
              + " ".join(f"{m:.2f}" for m in means)
              + f"  (reference { expected })", flush=True)
    report(5, ok, "; ".join(details) + " (tolerance 1.0)")
    for method, expected in rows.items():
        means = [stats[(nt, 1, method)]["mean_n_active"] for nt in TABLE1_NT]
        for nt, m, e in zip(TABLE1_NT, means, expected):
            assert abs(m - e) <= 1.0, f"{method} at nt={nt}: {m:.2f} vs {e}"


def test_criterion_6_total_power_trends(antenna_sweep):
    stats = summarize(antenna_sweep)
    naive_total = {nt: stats[(nt, 1, "naive")]["mean_total_power_w"] for nt in TABLE1_NT}
    fit_nts = [nt for nt in TABLE1_NT if 20 <= nt <= 32]
    slope = float(np.polyfit(fit_nts, [naive_total[nt] for nt in fit_nts], 1)[0])
    slope_ok = 0.25 <= slope <= 0.35

    dominance_ok = all(
        stats[(nt, 1, "alg1")]["mean_total_power_w"] <= naive_total[nt]
        for nt in TABLE1_NT if nt >= 16
    )

    transmit = {}
    for r in antenna_sweep:
        if r.method == "naive":
            transmit.setdefault(r.trial, {})[r.nt] = r.transmit_power_w
    mono_ok = all(
        all(series[b] <= series[a] * (1 + 1e-9)
            for a, b in zip(TABLE1_NT, TABLE1_NT[1:]))
        for series in transmit.values()
    )

    report(6, slope_ok and dominance_ok and mono_ok,
           f"naive slope {slope:.4f} W/antenna (window [0.25, 0.35]): "
           f"{'PASS' if slope_ok else 'FAIL'}; sparse total <= naive for nt>=16: "
           f"{'PASS' if dominance_ok else 'FAIL'}; per-trial naive transmit "
           f"non-increasing: {'PASS' if mono_ok else 'FAIL'}")
    assert dominance_ok
    assert mono_ok
    assert slope_ok, (
        f"naive total-power slope {slope:.4f} W/antenna outside [0.25, 0.35]; "
        "the measured marginal transmit saving c2*dT/dNt at this operating "
        "point is about -0.054 W/antenna, so the slope sits near 0.246"
    )


def test_criterion_7_band_table(band_sweep):
    stats = summarize(band_sweep)
    means = [stats[(32, nb, "multiband")]["mean_n_active"] for nb in TABLE2_NB]
    gaps = [abs(m - e) for m, e in zip(means, TABLE2_MULTIBAND)]
    ok = max(gaps) <= 2.0
    print("  multiband mean n_active: " + " ".join(f"{m:.2f}" for m in means)
          + f"  (reference {TABLE2_MULTIBAND})", flush=True)
    report(7, ok, f"worst gap {max(gaps):.2f} (tolerance 2.0)")
    for nb, m, e in zip(TABLE2_NB, means, TABLE2_MULTIBAND):
        assert abs(m - e) <= 2.0, f"nb={nb}: {m:.2f} vs {e}"


def test_criterion_8_cap_enforcement():
    pm = PowerModel(p_a=0.4)
    qos = QosTargets.uniform(4)
    worst_cap = 0.0
    worst_slack = 0.0
    feasible = 0
    for seed in range(40):
        rng = np.random.default_rng(80_000 + seed)
        ch = channel_set(rayleigh(rng, 4, 8))
        try:
            sol = solve_total_power_papc(ch, qos, pm)
        except Infeasible:
            continue
        feasible += 1
        worst_cap = max(worst_cap, sol.p_antenna.max() / pm.p_a - 1.0)
        worst_slack = max(worst_slack,
                          float(np.max(sol.diagnostics.duals.q
                                       * (pm.p_a - sol.p_antenna))))
        # capped plain minimization obeys the same bound
        try:
            w = solve_qos_papc(ch.h[0], qos.gamma, qos.sigma2, pm.p_a)
            worst_cap = max(worst_cap,
                            np.sum(np.abs(w) ** 2, axis=0).max() / pm.p_a - 1.0)
        except Infeasible:
            pass
    cap_ok = worst_cap <= 1e-6
    slack_ok = worst_slack <= CS_TOL * pm.p_a

    bit_ok = True
    for seed in range(5):
        rng = np.random.default_rng(90_000 + seed)
        ch = channel_set(rayleigh(rng, 4, 12))
        narrow = solve_total_power_narrowband(ch, qos, PowerModel())
        prob = MultibandProblem(ch, qos.gamma[None, :], qos.sigma2[None, :], PowerModel())
        joint = solve_total_power_multiband(prob)
        bit_ok &= bool(np.array_equal(joint.w, narrow.w)
                       and joint.total_power == narrow.total_power)

    ok = cap_ok and slack_ok and bit_ok and feasible > 0
    report(8, ok, f"{feasible}/40 feasible; worst cap excess {worst_cap:.1e}, "
                  f"worst q*(cap-p) {worst_slack:.1e}, single-band multiband "
                  f"bit-identical: {bit_ok}")
    assert feasible > 0
    assert cap_ok
    assert slack_ok
    assert bit_ok


def test_criterion_9_deterministic_reproduction(tmp_path):
    def reproduce(out, extra=()):
        cmd = [sys.executable, "-m", "sparsebeam.cli", "reproduce", "table1",
               "--trials", "50", "--seed", "7", "--out", str(out), *extra]
        subprocess.run(cmd, check=True, timeout=1800)
        return out.read_bytes()

    first = reproduce(tmp_path / "a.csv")
    second = reproduce(tmp_path / "b.csv")
    third = reproduce(tmp_path / "c.csv", extra=("--parallel", "2"))
    ok = first == second == third
    report(9, ok, f"3 runs (serial x2, parallel), {len(first)} bytes each, "
                  f"byte-identical: {ok}")
    assert first == second
    assert first == third
