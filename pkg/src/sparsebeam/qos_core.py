"""Closed-form kernels shared by every solver in the package.

For one narrow band with channels h_k, targets gamma_k and an arbitrary
nonnegative diagonal loading D, the optimal beamformers of

    minimize   sum_k w_k^H (c2 I + D) w_k
    subject to SINR_k >= gamma_k for all k

factor into three closed-form pieces:

1. SINR duals nu solving the fixed point
       1/nu_k = (1 + 1/gamma_k) h_k^H (c2 I + sum_j nu_j h_j h_j^H + D)^{-1} h_k,
2. unit directions u_k collinear with the loaded-covariance solve
       (c2 I + sum_j nu_j h_j h_j^H + D)^{-1} h_k,
3. powers p making every SINR constraint tight, so w_k = sqrt(p_k) u_k.

The dual update is a standard interference function: iterated from
nu = 0 it increases monotonically to the unique fixed point, so no
damping or step control is needed. Directions are obtained by a linear
solve rather than an eigendecomposition; the two agree at the fixed
point and the linear solve is cheaper and has no eigenpair ambiguity.
Each sweep performs a single Hermitian factorization reused for all K
right-hand sides.

All functions are pure; concurrent calls are safe.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .model import NegativePower, NoConvergence, SingularLoading, SingularSystem

# A nonnegative per-antenna diagonal loading: the antenna-sparsity weights,
# plus the per-antenna cap duals when caps are active.
DiagLoad = np.ndarray

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 2000


def _loaded_covariance(h: np.ndarray, nu: np.ndarray, c2: float, d: DiagLoad) -> np.ndarray:
    """c2 I + sum_k nu_k h_k h_k^H + diag(d), Hermitian positive definite."""
    nt = h.shape[1]
    a = (h.T * nu) @ h.conj()
    a[np.diag_indices(nt)] += c2 + d
    return a


def _factor(a: np.ndarray):
    try:
        return cho_factor(a, lower=True)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(f"loaded covariance could not be factorized: {exc}") from exc


def _fixed_point(
    h: np.ndarray,
    gamma: np.ndarray,
    c2: float,
    d: DiagLoad,
    tol: float,
    max_iter: int,
    nu0: Optional[np.ndarray],
    trace: Optional[list] = None,
):
    """Iterate the dual map until max_k |nu_k * rhs_k(nu) - 1| <= tol.

    Returns (nu, iterations, residual). The residual bound holds for the
    returned nu itself, not for a lagging iterate. ``trace``, when given,
    collects the post-update iterates (used by monotonicity tests).
    """
    k = h.shape[0]
    nu = np.zeros(k) if nu0 is None else np.array(nu0, dtype=float, copy=True)
    rhs_cols = np.ascontiguousarray(h.T)  # columns h_k
    pref = 1.0 + 1.0 / gamma
    for it in range(1, max_iter + 1):
        a = _loaded_covariance(h, nu, c2, d)
        x = cho_solve(_factor(a), rhs_cols)
        t = np.einsum("ki,ik->k", h.conj(), x).real  # h_k^H A^{-1} h_k
        residual = float(np.abs(nu * pref * t - 1.0).max())
        if residual <= tol:
            return nu, it, residual
        nu = 1.0 / (pref * t)
        if trace is not None:
            trace.append(nu.copy())
    raise NoConvergence(
        f"dual fixed point residual {residual:.3e} > {tol:.1e} after {max_iter} sweeps"
    )


def nu_fixed_point(
    h: np.ndarray,
    gamma: np.ndarray,
    c2: float,
    d: DiagLoad,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    nu0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """SINR duals nu for channels h (K, N_t) under loading d.

    On return all nu_k > 0 and the fixed-point residual is <= tol.
    Raises NoConvergence when max_iter sweeps do not reach tolerance.
    """
    nu, _, _ = _fixed_point(h, np.asarray(gamma, float), c2, np.asarray(d, float), tol, max_iter, nu0)
    return nu


def beam_directions(h: np.ndarray, nu: np.ndarray, c2: float, d: DiagLoad) -> np.ndarray:
    """Unit-norm beam directions, one row per user.

    u_k is collinear with (c2 I + sum_j nu_j h_j h_j^H + D)^{-1} h_k with
    the phase fixed so h_k^H u_k is real and nonnegative.
    """
    a = _loaded_covariance(h, np.asarray(nu, float), c2, np.asarray(d, float))
    u = cho_solve(_factor(a), np.ascontiguousarray(h.T))
    u /= np.linalg.norm(u, axis=0, keepdims=True)
    z = np.einsum("ki,ik->k", h.conj(), u)  # h_k^H u_k
    zabs = np.abs(z)
    phase = np.where(zabs > 0, z.conj() / np.where(zabs > 0, zabs, 1.0), 1.0)
    return (u * phase).T


def power_loading(
    h: np.ndarray, u: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray
) -> np.ndarray:
    """Powers p such that w_k = sqrt(p_k) u_k meets every target with equality.

    Solves M p = sigma2 with M_kk = |h_k^H u_k|^2 / gamma_k and
    M_ki = -|h_k^H u_i|^2 for i != k. Raises SingularLoading when M is
    singular and NegativePower when any p_k < -1e-10 (directions not
    taken at a valid fixed point).
    """
    gamma = np.asarray(gamma, float)
    cross = np.abs(h.conj() @ u.T) ** 2  # cross[k, i] = |h_k^H u_i|^2
    m = -cross
    idx = np.diag_indices(h.shape[0])
    m[idx] = np.diagonal(cross) / gamma
    try:
        p = np.linalg.solve(m, np.asarray(sigma2, float))
    except LinAlgError as exc:
        raise SingularLoading(f"power-loading system is singular: {exc}") from exc
    if p.min() < -1e-10:
        raise NegativePower(f"negative loading {p.min():.3e}; directions invalid")
    return np.maximum(p, 0.0)


def sinr_of(w: np.ndarray, h: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """Achieved SINR of each user for beamformer rows w under channels h."""
    g = np.abs(h.conj() @ w.T) ** 2  # g[k, i] = |h_k^H w_i|^2
    signal = np.diagonal(g)
    interference = g.sum(axis=1) - signal
    return signal / (interference + np.asarray(sigma2, float))


def _solve_weighted(
    h: np.ndarray,
    gamma: np.ndarray,
    sigma2: np.ndarray,
    c2: float,
    d: DiagLoad,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    nu0: Optional[np.ndarray] = None,
):
    """solve_weighted plus iteration count and final residual."""
    gamma = np.asarray(gamma, float)
    d = np.asarray(d, float)
    nu, iters, residual = _fixed_point(h, gamma, c2, d, tol, max_iter, nu0)
    u = beam_directions(h, nu, c2, d)
    p = power_loading(h, u, gamma, np.asarray(sigma2, float))
    w = u * np.sqrt(p)[:, None]
    return w, nu, iters, residual


def solve_weighted(
    h: np.ndarray,
    gamma: np.ndarray,
    sigma2: np.ndarray,
    c2: float,
    d: DiagLoad,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    nu0: Optional[np.ndarray] = None,
):
    """Globally optimal beamformers of the diagonally weighted problem.

    Returns (w, nu) with w of shape (K, N_t); the problem is convex in
    its conic form so the KKT point returned here is the optimum.
    """
    w, nu, _, _ = _solve_weighted(h, gamma, sigma2, c2, d, tol, max_iter, nu0)
    return w, nu
