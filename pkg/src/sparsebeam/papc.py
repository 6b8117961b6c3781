"""Total power minimization with per-antenna power caps.

The caps add one dual variable q_i per antenna. For fixed q the problem
is the weighted one of :mod:`sparsebeam.qos_core` with loading lam + q,
and q itself is driven by projected subgradient ascent

    q_i <- max(q_i + t_n (P_i - p_a), 0),

so q_i stays zero while antenna i's cap is slack. The subgradient loop
nests inside the reweighting loop: each outer iteration repeats
solve / cap check / q update until every per-antenna power is within
violation_tol of the cap, then refreshes the antenna weights. The loop
additionally requires approximate complementary slackness
q_i (p_a - P_i) <= 1e-3 p_a before accepting an iterate, which rules
out stopping on a feasible-by-overshoot point far from the cap optimum.

Cap duals carry over between outer iterations by default (reset_q flips
that), and the dual fixed point is warm-started throughout. With the
cap disabled (p_a = inf) every inner loop exits after one solve with
q = 0, reproducing the uncapped solver output exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    BeamformerSolution,
    ChannelSet,
    ConfigError,
    DimensionMismatch,
    DualState,
    Infeasible,
    IterationStats,
    PowerModel,
    QosTargets,
    SolveDiagnostics,
    assemble_solution,
    validate,
)
from .qos_core import _solve_weighted
from .sparse import reweight, surrogate_objective

# complementary-slackness acceptance level, relative to the cap
CS_TOL = 1e-3


@dataclass(frozen=True)
class SubgradientSchedule:
    """Step-size schedule for the cap-dual updates.

    t0 = None picks 1/p_a at solve time. rule "diminishing" uses
    t_n = t0/sqrt(n) (guarantees convergence of the dual iterates);
    "constant" keeps t_n = t0.
    """

    t0: Optional[float] = None
    rule: str = "diminishing"
    max_inner: int = 1000
    violation_tol: float = 1e-6
    reset_q: bool = False

    def __post_init__(self):
        if self.t0 is not None and not self.t0 > 0:
            raise ConfigError(f"t0 must be positive when set, got {self.t0}")
        if self.rule not in ("constant", "diminishing"):
            raise ConfigError(f"unknown step rule {self.rule!r}")
        if self.max_inner < 1:
            raise ConfigError(f"max_inner must be >= 1, got {self.max_inner}")
        if self.violation_tol <= 0:
            raise ConfigError(f"violation_tol must be positive, got {self.violation_tol}")

    def step(self, p_a: float, n: int) -> float:
        t0 = self.t0 if self.t0 is not None else 1.0 / p_a
        return t0 if self.rule == "constant" else t0 / np.sqrt(n)


def q_update(q: np.ndarray, p_antenna: np.ndarray, p_a: float, t_n: float) -> np.ndarray:
    """Projected subgradient step on the per-antenna cap duals."""
    return np.maximum(np.asarray(q, float) + t_n * (np.asarray(p_antenna, float) - p_a), 0.0)


def _cap_loop(h, gamma, sigma2, c2, lam, q, p_a, sched, nu0):
    """Solve at fixed antenna weights until the caps hold.

    Returns (w, nu, q, p_antenna, inner_iters, fp_iters, residual).
    Raises Infeasible when max_inner updates cannot clear the caps.
    """
    nu = nu0
    fp_total = 0
    for n in range(1, sched.max_inner + 1):
        w, nu, fp, residual = _solve_weighted(h, gamma, sigma2, c2, lam + q, nu0=nu)
        fp_total += fp
        p = np.sum(np.abs(w) ** 2, axis=0)
        cap_ok = p.max() <= p_a * (1.0 + sched.violation_tol)
        # a disabled cap (p_a = inf) is trivially slack; 0 * inf would be nan
        slack_ok = (
            not np.isfinite(p_a)
            or np.max(q * (p_a - p), initial=0.0) <= CS_TOL * p_a
        )
        if cap_ok and slack_ok:
            return w, nu, q, p, n, fp_total, residual
        q = q_update(q, p, p_a, sched.step(p_a, n))
    raise Infeasible(
        f"per-antenna cap {p_a} not met after {sched.max_inner} dual updates "
        f"(max per-antenna power {p.max():.4g}); more antennas lower the "
        "per-antenna load"
    )


def solve_total_power_papc(
    channels: ChannelSet,
    qos: QosTargets,
    pm: PowerModel,
    sched: Optional[SubgradientSchedule] = None,
) -> BeamformerSolution:
    """Minimize circuit plus transmit power under per-antenna caps pm.p_a.

    On success every per-antenna power is at most
    p_a * (1 + sched.violation_tol). Raises Infeasible when the inner
    loop exhausts with a persistent violation.
    """
    validate(channels, qos, pm)
    if channels.n_bands != 1:
        raise DimensionMismatch(
            f"capped solver requires one band, got {channels.n_bands}"
        )
    if pm.p_a is None:
        raise ConfigError("pm.p_a must be set for the capped solver")
    sched = sched if sched is not None else SubgradientSchedule()
    h = channels.h[0]
    nt = channels.n_antennas
    s = np.ones(nt)
    q = np.zeros(nt)
    nu = None
    history = []
    inner_total = 0
    fp_total = 0
    for _ in range(pm.outer_iters):
        lam = pm.c1 * s
        if sched.reset_q:
            q = np.zeros(nt)
        w, nu, q, p, inner, fp, residual = _cap_loop(
            h, qos.gamma, qos.sigma2, pm.c2, lam, q, pm.p_a, sched, nu
        )
        inner_total += inner
        fp_total += fp
        history.append(
            IterationStats(
                transmit_power=float(p.sum()),
                n_active=int(np.sum(p > pm.eps_off)),
                surrogate_objective=surrogate_objective(p, pm),
            )
        )
        s = reweight(p, pm.delta)
    duals = DualState(nu=nu[None, :], lam=lam, q=q)
    diagnostics = SolveDiagnostics(
        outer_iters=pm.outer_iters,
        inner_iters=inner_total,
        fixed_point_iters=fp_total,
        final_residual=residual,
        duals=duals,
        history=tuple(history),
    )
    return assemble_solution(w, pm, diagnostics)
