"""Reweighted antenna-sparsity loop minimizing total consumed power.

The number of active antennas enters the objective through a weighted
sum of per-antenna powers, c1 * sum_i s_i P_i + c2 * sum ||w||^2, with
the weights refreshed between solves as s_i = 1/(P_i + delta). Each pass
is the convex weighted problem solved exactly in closed form by
:mod:`sparsebeam.qos_core` with diagonal loading lam_i = c1 * s_i, so
the surrogate objective c1 * sum_i log(P_i + delta) + c2 * sum ||w||^2
is non-increasing across outer iterations (majorize-minimize).

Antennas are never hard-removed: suppression acts only through the
loading, and the final per-antenna powers decide the active set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    BeamformerSolution,
    BeamformingError,
    ChannelSet,
    DimensionMismatch,
    DualState,
    IterationStats,
    PowerModel,
    QosTargets,
    SolveDiagnostics,
    assemble_solution,
    validate,
)
from .qos_core import _solve_weighted


@dataclass
class ReweightState:
    """Current weights, outer-iteration index, and per-iteration history."""

    s: np.ndarray
    iteration: int = 0
    history: list = field(default_factory=list)


def reweight(p_antenna: np.ndarray, delta: float) -> np.ndarray:
    """Next antenna weights, s_i = 1/(P_i + delta)."""
    return 1.0 / (np.asarray(p_antenna, float) + delta)


def surrogate_objective(p_antenna: np.ndarray, pm: PowerModel) -> float:
    """c1 * sum_i log(P_i + delta) + c2 * sum_i P_i, the quantity the
    reweighting descends on."""
    p = np.asarray(p_antenna, float)
    return float(pm.c1 * np.sum(np.log(p + pm.delta)) + pm.c2 * np.sum(p))


def run_reweighted(h_bands: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray,
                   pm: PowerModel) -> BeamformerSolution:
    """Shared engine behind the narrowband and multi-band solvers.

    h_bands is (n_bands, K, N_t); gamma and sigma2 are (n_bands, K). One
    set of antenna weights is shared by all bands; given the weights the
    bands decouple and are solved independently per sweep, with the
    per-antenna powers aggregated across bands before each weight update.
    """
    nb, k, nt = h_bands.shape
    state = ReweightState(np.ones(nt))
    nus = [None] * nb
    w = np.empty((nb, k, nt), dtype=complex)
    fp_total = 0
    for _ in range(pm.outer_iters):
        lam = pm.c1 * state.s
        p = np.zeros(nt)
        residual = 0.0
        for j in range(nb):
            try:
                wj, nus[j], fp, res = _solve_weighted(
                    h_bands[j], gamma[j], sigma2[j], pm.c2, lam, nu0=nus[j]
                )
            except BeamformingError as exc:
                if nb > 1:
                    raise type(exc)(f"band {j}: {exc}") from exc
                raise
            w[j] = wj
            p += np.sum(np.abs(wj) ** 2, axis=0)
            fp_total += fp
            residual = max(residual, res)
        state.iteration += 1
        state.history.append(
            IterationStats(
                transmit_power=float(p.sum()),
                n_active=int(np.sum(p > pm.eps_off)),
                surrogate_objective=surrogate_objective(p, pm),
            )
        )
        state.s = reweight(p, pm.delta)
    duals = DualState(nu=np.array(nus), lam=lam, q=np.zeros(nt))
    diagnostics = SolveDiagnostics(
        outer_iters=pm.outer_iters,
        inner_iters=0,
        fixed_point_iters=fp_total,
        final_residual=residual,
        duals=duals,
        history=tuple(state.history),
    )
    return assemble_solution(w, pm, diagnostics)


def solve_total_power_narrowband(
    channels: ChannelSet, qos: QosTargets, pm: PowerModel, polish: bool = False
) -> BeamformerSolution:
    """Minimize circuit plus transmit power for a single narrow band.

    Runs pm.outer_iters reweighted passes starting from unit weights.
    ``polish=True`` additionally re-solves the plain transmit-power
    minimization restricted to the returned active set (off by default;
    the reported reference results use the raw loop output).
    """
    validate(channels, qos, pm)
    if channels.n_bands != 1:
        raise DimensionMismatch(
            f"narrowband solver requires one band, got {channels.n_bands}"
        )
    sol = run_reweighted(channels.h, qos.gamma[None, :], qos.sigma2[None, :], pm)
    if polish and sol.n_active < channels.n_antennas:
        sol = _polish_active_set(channels, qos, pm, sol)
    return sol


def _polish_active_set(
    channels: ChannelSet, qos: QosTargets, pm: PowerModel, sol: BeamformerSolution
) -> BeamformerSolution:
    """Re-run plain transmit minimization on the active antennas only."""
    rows = sol.active_set
    hs = np.ascontiguousarray(channels.h[0][:, rows])
    w_sub, nu, fp, res = _solve_weighted(
        hs, qos.gamma, qos.sigma2, 1.0, np.zeros(rows.size)
    )
    w = np.zeros((1, channels.n_users, channels.n_antennas), dtype=complex)
    w[0][:, rows] = w_sub
    d = sol.diagnostics
    diagnostics = SolveDiagnostics(
        outer_iters=d.outer_iters + 1,
        inner_iters=d.inner_iters,
        fixed_point_iters=d.fixed_point_iters + fp,
        final_residual=res,
        duals=DualState(nu=nu[None, :], lam=np.zeros(channels.n_antennas),
                        q=np.zeros(channels.n_antennas)),
        history=d.history,
    )
    return assemble_solution(w, pm, diagnostics)
