"""SINR-constrained downlink beamforming that minimizes total consumed
power (circuit plus transmit) by jointly selecting active antennas and
beamformers, with per-antenna power-cap and multi-band variants, plus a
seeded Monte-Carlo experiment harness."""

from .model import (
    BeamformerSolution,
    BeamformingError,
    ChannelSet,
    ConfigError,
    DimensionMismatch,
    DualState,
    Infeasible,
    IterationStats,
    NegativePower,
    NoConvergence,
    NonPositiveTarget,
    OracleNoConvergence,
    PowerModel,
    QosTargets,
    SingularLoading,
    SingularSystem,
    SolveDiagnostics,
    TooFewAntennas,
    assemble_solution,
    db_to_linear,
    per_antenna_power,
    validate,
)
from .qos_core import beam_directions, nu_fixed_point, power_loading, sinr_of, solve_weighted
from .sparse import ReweightState, reweight, solve_total_power_narrowband, surrogate_objective
from .papc import SubgradientSchedule, q_update, solve_total_power_papc
from .multiband import MultibandProblem, solve_total_power_multiband
from .baselines import (
    greedy_antenna_selection,
    oracle_solve_weighted,
    solve_qos_min_power,
    solve_qos_papc,
)
from .harness import (
    ExperimentConfig,
    TrialRecord,
    derive_trial_seed,
    generate_channels,
    parse_config_file,
    parse_config_text,
    preset_config,
    records_to_csv,
    run_experiment,
    summarize,
)

__version__ = "0.1.0"
