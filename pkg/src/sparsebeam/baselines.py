"""Reference solvers: plain transmit-power minimization, its capped
variant, a correlation-based greedy antenna-selection baseline, and an
independent convex solver used by the test suite for cross-validation.

These operate on raw arrays (h of shape (K, N_t)) like the kernels in
:mod:`sparsebeam.qos_core`; callers are expected to have validated
dimensions.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .model import (
    BeamformerSolution,
    DualState,
    IterationStats,
    OracleNoConvergence,
    PowerModel,
    SolveDiagnostics,
    assemble_solution,
)
from .papc import SubgradientSchedule, _cap_loop
from .qos_core import _solve_weighted, solve_weighted


def solve_qos_min_power(h: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray,
                        nu0: Optional[np.ndarray] = None):
    """Minimal transmit power sum ||w_k||^2 meeting all SINR targets.

    The unweighted, uncapped problem: unit radiated-power weight and no
    diagonal loading. Returns (w, nu).
    """
    h = np.asarray(h, dtype=complex)
    return solve_weighted(h, gamma, sigma2, 1.0, np.zeros(h.shape[1]), nu0=nu0)


def solve_qos_papc(h: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray,
                   p_a: float, sched: Optional[SubgradientSchedule] = None) -> np.ndarray:
    """Transmit-power minimization under per-antenna caps.

    Subgradient loop on the cap duals with no antenna weighting; returns
    the beamformer rows. Raises Infeasible when the caps cannot be met.
    """
    h = np.asarray(h, dtype=complex)
    sched = sched if sched is not None else SubgradientSchedule()
    nt = h.shape[1]
    w, _, _, _, _, _, _ = _cap_loop(
        h, np.asarray(gamma, float), np.asarray(sigma2, float),
        1.0, np.zeros(nt), np.zeros(nt), float(p_a), sched, None,
    )
    return w


def _most_correlated_pair(rows: np.ndarray):
    """Indices (i, j) of the two most correlated antenna rows.

    Correlation is |<r_i, r_j>| / (||r_i|| ||r_j||); ties break toward
    the lowest row-major index pair.
    """
    norms = np.linalg.norm(rows, axis=1)
    corr = np.abs(rows.conj() @ rows.T) / np.outer(norms, norms)
    np.fill_diagonal(corr, -1.0)
    i, j = np.unravel_index(int(np.argmax(corr)), corr.shape)
    return (i, j) if i < j else (j, i)


def greedy_antenna_selection(h: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray,
                             pm: PowerModel) -> BeamformerSolution:
    """Antenna selection by repeated deletion of correlated rows.

    At each step the two most correlated rows of the (N_t, K) channel
    matrix are found and the lower-power row (smaller ||r_i||^2) is
    deleted; the plain transmit minimization is re-solved on the
    survivors. Deletion continues down to K rows and the iterate with
    the smallest c1 * (rows kept) + c2 * (transmit power) is returned.
    """
    h = np.asarray(h, dtype=complex)
    k, nt = h.shape
    kept = list(range(nt))
    best = None
    history = []
    nu = None
    fp_total = 0
    evaluated = 0
    while True:
        hs = np.ascontiguousarray(h[:, kept])
        w, nu, fp, residual = _solve_weighted(
            hs, gamma, sigma2, 1.0, np.zeros(len(kept)), nu0=nu
        )
        fp_total += fp
        evaluated += 1
        transmit = float(np.sum(np.abs(w) ** 2))
        total = pm.c1 * len(kept) + pm.c2 * transmit
        history.append(IterationStats(transmit, len(kept), total))
        if best is None or total < best[0]:
            best = (total, list(kept), w, nu.copy(), residual)
        if len(kept) <= k:
            break
        rows = h[:, kept].T  # antennas as rows
        i, j = _most_correlated_pair(rows)
        drop = i if np.linalg.norm(rows[i]) ** 2 <= np.linalg.norm(rows[j]) ** 2 else j
        kept.pop(drop)
    _, rows_kept, w_sub, nu_best, residual = best
    w = np.zeros((1, k, nt), dtype=complex)
    w[0][:, rows_kept] = w_sub
    diagnostics = SolveDiagnostics(
        outer_iters=evaluated,
        inner_iters=0,
        fixed_point_iters=fp_total,
        final_residual=residual,
        duals=DualState(nu=nu_best[None, :], lam=np.zeros(nt), q=np.zeros(nt)),
        history=tuple(history),
    )
    return assemble_solution(w, pm, diagnostics)


def oracle_solve_weighted(h: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray,
                          c2: float, d: np.ndarray) -> np.ndarray:
    """Independent conic solve of the weighted problem, for tests only.

    Minimizes sum_k w_k^H (c2 I + D) w_k subject to the second-order-cone
    form of each SINR constraint, via cvxpy. Production solvers never
    call this; it exists to cross-check the closed-form path. Intended
    for small instances (N_t <= 8, K <= 4).
    """
    import cvxpy as cp

    h = np.asarray(h, dtype=complex)
    gamma = np.asarray(gamma, float)
    sigma2 = np.asarray(sigma2, float)
    d = np.asarray(d, float)
    k, nt = h.shape
    wv = cp.Variable((nt, k), complex=True)
    scale = np.sqrt(c2 + d)
    objective = cp.Minimize(cp.sum_squares(cp.multiply(scale[:, None], wv)))
    constraints = []
    for i in range(k):
        received = h[i].conj() @ wv  # row of h_i^H w_j over j
        lhs = np.sqrt(1.0 + 1.0 / gamma[i]) * cp.real(received[i])
        rhs = cp.norm(cp.hstack([received, np.sqrt(sigma2[i])]))
        constraints.append(lhs >= rhs)
    problem = cp.Problem(objective, constraints)
    for solver in (cp.CLARABEL, cp.SCS):
        try:
            problem.solve(solver=solver)
        except cp.SolverError:
            continue
        if problem.status == cp.OPTIMAL and wv.value is not None:
            return np.asarray(wv.value).T
    if problem.status == "optimal_inaccurate" and wv.value is not None:
        return np.asarray(wv.value).T
    raise OracleNoConvergence(f"conic reference solve ended with status {problem.status}")
