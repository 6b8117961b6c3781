"""Domain types, validation, and unit conversions shared by all solvers.

Conventions used throughout the package:

* channels are stored as an (n_bands, n_users, n_antennas) complex array,
  so ``h[j, k]`` is user k's channel vector on band j;
* beamformers mirror that layout, ``w[j, k]`` being the complex weight
  vector applied to user k's symbol on band j (units sqrt(Watt));
* all targets and powers are linear scale internally; dB enters only at
  the configuration boundary via :func:`db_to_linear`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class BeamformingError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(BeamformingError):
    """Array shapes are inconsistent, or channel entries are not finite."""


class NonPositiveTarget(BeamformingError):
    """An SINR target or noise power is not strictly positive."""


class TooFewAntennas(BeamformingError):
    """More users than transmit antennas (K > N_t)."""


class NoConvergence(BeamformingError):
    """The dual fixed-point iteration did not reach tolerance."""


class SingularSystem(BeamformingError):
    """Loaded covariance could not be factorized (signals NaN/Inf input)."""


class SingularLoading(BeamformingError):
    """The per-user power-loading system is singular."""


class NegativePower(BeamformingError):
    """Power loading produced a negative power; directions are invalid."""


class Infeasible(BeamformingError):
    """No beamformer meets the SINR targets under the per-antenna caps."""


class OracleNoConvergence(BeamformingError):
    """The independent convex reference solver failed to converge."""


class ConfigError(BeamformingError):
    """Invalid experiment or solver configuration."""


def db_to_linear(x_db: float) -> float:
    """Convert a dB value to linear scale, 10**(x_db/10)."""
    return float(10.0 ** (x_db / 10.0))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChannelSet:
    """Per-band complex channels between the base station and each user."""

    n_antennas: int
    n_users: int
    n_bands: int
    h: np.ndarray  # (n_bands, n_users, n_antennas)

    def __post_init__(self):
        object.__setattr__(self, "h", _readonly(np.asarray(self.h, dtype=complex)))

    def band(self, j: int) -> np.ndarray:
        """The (n_users, n_antennas) channel matrix of band j."""
        return self.h[j]


@dataclass(frozen=True)
class QosTargets:
    """Linear SINR targets and noise powers, one entry per user.

    For multi-band problems gamma/sigma2 may carry a leading band axis;
    see :class:`sparsebeam.multiband.MultibandProblem`.
    """

    gamma: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _readonly(np.asarray(self.gamma, dtype=float)))
        object.__setattr__(self, "sigma2", _readonly(np.asarray(self.sigma2, dtype=float)))

    @classmethod
    def uniform(cls, n_users: int, gamma_db: float = 3.0, sigma2: float = 1.0) -> "QosTargets":
        """Identical dB target and noise power for every user."""
        return cls(np.full(n_users, db_to_linear(gamma_db)), np.full(n_users, float(sigma2)))


@dataclass(frozen=True)
class PowerModel:
    """Consumed-power model and reweighting constants.

    c1 is the circuit power drawn per active antenna (W), c2 the inverse
    amplifier efficiency multiplying radiated power. eps_off is the
    per-antenna power below which an antenna counts as switched off; it
    sits above the reweighting regularizer delta (suppressed antennas
    decay through delta scale and far below) and well under the smallest
    genuinely used per-antenna powers at the default operating point.
    """

    c1: float = 0.3
    c2: float = 1.0 / 0.3
    p_a: Optional[float] = None
    delta: float = 1e-4
    outer_iters: int = 6
    eps_off: float = 4e-4

    def __post_init__(self):
        if self.c1 < 0:
            raise ConfigError(f"c1 must be nonnegative, got {self.c1}")
        if self.c2 <= 0:
            raise ConfigError(f"c2 must be positive, got {self.c2}")
        if self.p_a is not None and not self.p_a > 0:
            raise ConfigError(f"p_a must be positive when set, got {self.p_a}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if self.outer_iters < 1:
            raise ConfigError(f"outer_iters must be >= 1, got {self.outer_iters}")
        if self.eps_off <= 0:
            raise ConfigError(f"eps_off must be positive, got {self.eps_off}")


@dataclass(frozen=True)
class DualState:
    """Multipliers at the returned iterate: SINR duals nu (per band, user),
    antenna-weight diagonal lam, and per-antenna cap duals q."""

    nu: np.ndarray
    lam: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class IterationStats:
    """One outer-iteration row of a solver's history."""

    transmit_power: float
    n_active: int
    surrogate_objective: float


@dataclass(frozen=True)
class SolveDiagnostics:
    outer_iters: int
    inner_iters: int
    fixed_point_iters: int
    final_residual: float
    duals: Optional[DualState] = None
    history: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class BeamformerSolution:
    """Beamformers plus the derived power breakdown.

    Invariants: p_antenna[i] equals the i-th diagonal of the summed
    beamformer outer products; transmit_power equals sum(p_antenna);
    total_power = c1 * n_active + c2 * transmit_power.
    """

    w: np.ndarray            # (n_bands, n_users, n_antennas)
    p_antenna: np.ndarray    # (n_antennas,)
    active_set: np.ndarray   # indices with p_antenna > eps_off, ascending
    transmit_power: float
    n_active: int
    total_power: float
    feasible: bool
    diagnostics: SolveDiagnostics


def per_antenna_power(w: np.ndarray) -> np.ndarray:
    """Per-antenna transmit power summed over all bands and users."""
    w = np.asarray(w)
    if w.ndim == 2:
        w = w[None]
    return np.sum(np.abs(w) ** 2, axis=(0, 1))


def assemble_solution(
    w: np.ndarray,
    pm: PowerModel,
    diagnostics: SolveDiagnostics,
    feasible: bool = True,
) -> BeamformerSolution:
    """Derive the power breakdown of beamformers ``w`` under ``pm``."""
    w = np.asarray(w, dtype=complex)
    if w.ndim == 2:
        w = w[None]
    p = per_antenna_power(w)
    active = np.flatnonzero(p > pm.eps_off)
    transmit = float(np.sum(p))
    n_active = int(active.size)
    return BeamformerSolution(
        w=_readonly(w),
        p_antenna=_readonly(p),
        active_set=_readonly(active),
        transmit_power=transmit,
        n_active=n_active,
        total_power=pm.c1 * n_active + pm.c2 * transmit,
        feasible=feasible,
        diagnostics=diagnostics,
    )


def validate(channels: ChannelSet, qos: QosTargets, pm: PowerModel) -> None:
    """Check dimensional and positivity invariants before solving.

    Raises DimensionMismatch, NonPositiveTarget or TooFewAntennas.
    """
    nb, k, nt = channels.n_bands, channels.n_users, channels.n_antennas
    if min(nb, k, nt) < 1:
        raise DimensionMismatch(
            f"dimensions must be positive, got bands={nb} users={k} antennas={nt}"
        )
    if channels.h.shape != (nb, k, nt):
        raise DimensionMismatch(
            f"channel array has shape {channels.h.shape}, expected {(nb, k, nt)}"
        )
    if not np.all(np.isfinite(channels.h.view(float))):
        raise DimensionMismatch("channel entries must be finite")
    gamma, sigma2 = qos.gamma, qos.sigma2
    for name, arr in (("gamma", gamma), ("sigma2", sigma2)):
        if arr.shape not in ((k,), (nb, k)):
            raise DimensionMismatch(
                f"{name} has shape {arr.shape}, expected ({k},) or ({nb}, {k})"
            )
        if not np.all(np.isfinite(arr)):
            raise NonPositiveTarget(f"{name} entries must be finite and positive")
        if np.any(arr <= 0):
            raise NonPositiveTarget(f"all {name} entries must be > 0")
    if k > nt:
        raise TooFewAntennas(f"{k} users need at least {k} antennas, got {nt}")
