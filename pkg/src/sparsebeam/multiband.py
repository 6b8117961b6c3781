"""Joint antenna sparsity across simultaneously operating narrow bands.

An antenna only switches off when it carries no power on any band, so
the per-antenna powers feeding the weight update aggregate over all
bands, P_i = sum_{k,j} |w_{k,i}^j|^2, while the SINR duals, directions
and power loading stay per band. Given the shared weights the bands
decouple completely; they are solved in band order so results do not
depend on any execution interleaving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    BeamformerSolution,
    ChannelSet,
    DimensionMismatch,
    PowerModel,
    QosTargets,
    validate,
)
from .sparse import run_reweighted


@dataclass(frozen=True)
class MultibandProblem:
    """A channel set with per-(band, user) targets and a power model."""

    channels: ChannelSet
    gamma: np.ndarray   # (n_bands, n_users)
    sigma2: np.ndarray  # (n_bands, n_users)
    pm: PowerModel

    def __post_init__(self):
        nb, k = self.channels.n_bands, self.channels.n_users
        gamma = np.broadcast_to(np.asarray(self.gamma, float), (nb, k)).copy()
        sigma2 = np.broadcast_to(np.asarray(self.sigma2, float), (nb, k)).copy()
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma2", sigma2)

    @classmethod
    def uniform(cls, channels: ChannelSet, pm: PowerModel,
                gamma_db: float = 3.0, sigma2: float = 1.0) -> "MultibandProblem":
        """Identical target and noise power for every band and user."""
        qos = QosTargets.uniform(channels.n_users, gamma_db, sigma2)
        return cls(channels, np.tile(qos.gamma, (channels.n_bands, 1)),
                   np.tile(qos.sigma2, (channels.n_bands, 1)), pm)


def solve_total_power_multiband(prob: MultibandProblem) -> BeamformerSolution:
    """Reweighted total-power minimization over all bands jointly.

    With a single band this reduces to, and returns exactly the same
    floating-point output as, the narrowband solver.
    """
    channels = prob.channels
    validate(channels, QosTargets(prob.gamma, prob.sigma2), prob.pm)
    if prob.gamma.shape != (channels.n_bands, channels.n_users):
        raise DimensionMismatch(
            f"targets have shape {prob.gamma.shape}, expected "
            f"{(channels.n_bands, channels.n_users)}"
        )
    return run_reweighted(channels.h, prob.gamma, prob.sigma2, prob.pm)
