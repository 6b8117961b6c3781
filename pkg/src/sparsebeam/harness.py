"""Seeded Monte-Carlo experiment runner: channel generation, method
sweeps over antenna and band counts, aggregation, CSV emission.

Determinism contract: every trial derives its own seed from the
experiment seed and trial index, channels are a pure function of
(seed, k, nb) with antennas drawn row by row so smaller antenna counts
are prefixes of larger ones, and records are emitted in a fixed sort
order. Output is therefore byte-identical across runs and across
parallelism settings. Measured wall times live on the in-memory records
only; the CSV writes zeros there unless real timing is requested, since
timing is the one field that cannot be reproducible.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Iterable, Optional

import numpy as np

from . import baselines, multiband, papc, sparse
from .model import (
    BeamformingError,
    ChannelSet,
    ConfigError,
    PowerModel,
    QosTargets,
    SolveDiagnostics,
    assemble_solution,
)

_SEED_MASK = (1 << 64) - 1

NARROWBAND_METHODS = ("naive", "alg1", "alg2", "greedy")
ALL_METHODS = NARROWBAND_METHODS + ("multiband",)

CSV_HEADER = (
    "experiment,trial,seed,nt,k,nb,method,feasible,transmit_power_w,"
    "n_active,total_power_w,outer_iters,inner_iters,wall_ms"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep description; field names double as config-file keys."""

    seed: int = 1
    trials: int = 500
    nt_list: tuple = (8, 12, 16, 20, 24, 28, 32)
    k: int = 4
    nb_list: tuple = (1,)
    gamma_db: float = 3.0
    sigma2: float = 1.0
    c1: float = 0.3
    c2: float = 1.0 / 0.3
    p_a: Optional[float] = 0.4
    delta: float = 1e-4
    outer_iters: int = 6
    eps_off: float = 4e-4
    methods: tuple = ("naive", "alg1", "alg2", "greedy")

    def power_model(self) -> PowerModel:
        return PowerModel(c1=self.c1, c2=self.c2, p_a=self.p_a, delta=self.delta,
                          outer_iters=self.outer_iters, eps_off=self.eps_off)

    def qos(self) -> QosTargets:
        return QosTargets.uniform(self.k, self.gamma_db, self.sigma2)


def validate_config(cfg: ExperimentConfig) -> None:
    """Raise ConfigError for any inconsistent sweep description."""
    if cfg.trials < 0:
        raise ConfigError(f"trials must be >= 0, got {cfg.trials}")
    if cfg.k < 1:
        raise ConfigError(f"k must be >= 1, got {cfg.k}")
    if not cfg.nt_list:
        raise ConfigError("nt_list must not be empty")
    if not cfg.nb_list:
        raise ConfigError("nb_list must not be empty")
    for nt in cfg.nt_list:
        if nt < cfg.k:
            raise ConfigError(f"nt={nt} is smaller than k={cfg.k}")
    for nb in cfg.nb_list:
        if nb < 1:
            raise ConfigError(f"nb must be >= 1, got {nb}")
    if cfg.sigma2 <= 0:
        raise ConfigError(f"sigma2 must be positive, got {cfg.sigma2}")
    if not cfg.methods:
        raise ConfigError("methods must not be empty")
    for m in cfg.methods:
        if m not in ALL_METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {ALL_METHODS}")
    narrow = [m for m in cfg.methods if m in NARROWBAND_METHODS]
    if narrow and 1 not in cfg.nb_list:
        raise ConfigError(
            f"methods {narrow} run at nb=1 only, but nb_list={cfg.nb_list}"
        )
    if "alg2" in cfg.methods and cfg.p_a is None:
        raise ConfigError("method alg2 requires p_a")
    cfg.power_model()  # re-raises ConfigError on bad power constants


@dataclass(frozen=True)
class TrialRecord:
    """One (trial, dimensions, method) outcome; one CSV row."""

    experiment: str
    trial: int
    seed: int
    nt: int
    k: int
    nb: int
    method: str
    feasible: bool
    transmit_power_w: float
    n_active: int
    total_power_w: float
    outer_iters: int
    inner_iters: int
    wall_ms: float


def derive_trial_seed(seed: int, trial: int) -> int:
    """Stable 64-bit per-trial seed from the experiment seed."""
    ss = np.random.SeedSequence([seed & _SEED_MASK, trial])
    return int(ss.generate_state(1, np.uint64)[0])


def generate_channels(seed: int, nt: int, k: int, nb: int) -> ChannelSet:
    """IID unit-variance circularly symmetric Gaussian channels.

    Deterministic in (seed, nt, k, nb). The stream is keyed on
    (seed, k, nb) with the antenna axis drawn slowest, so for a fixed
    key the first nt antenna rows coincide across different nt values
    (nested-antenna construction for paired sweeps).
    """
    ss = np.random.SeedSequence([seed & _SEED_MASK, k, nb])
    rng = np.random.default_rng(ss)
    z = rng.standard_normal((nt, nb, k, 2))
    h = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    return ChannelSet(nt, k, nb, np.ascontiguousarray(np.transpose(h, (1, 2, 0))))


def _run_method(method: str, channels: ChannelSet, cfg: ExperimentConfig):
    pm = cfg.power_model()
    qos = cfg.qos()
    if method == "naive":
        w, _ = baselines.solve_qos_min_power(channels.h[0], qos.gamma, qos.sigma2)
        return assemble_solution(w, pm, SolveDiagnostics(1, 0, 0, 0.0))
    if method == "alg1":
        return sparse.solve_total_power_narrowband(channels, qos, pm)
    if method == "alg2":
        return papc.solve_total_power_papc(channels, qos, pm)
    if method == "greedy":
        return baselines.greedy_antenna_selection(channels.h[0], qos.gamma, qos.sigma2, pm)
    if method == "multiband":
        prob = multiband.MultibandProblem.uniform(channels, pm, cfg.gamma_db, cfg.sigma2)
        return multiband.solve_total_power_multiband(prob)
    raise ConfigError(f"unknown method {method!r}")


def _run_point(args):
    """All applicable methods at one (trial, nt, nb) grid point."""
    cfg, experiment_id, trial, nt, nb = args
    seed = derive_trial_seed(cfg.seed, trial)
    channels = generate_channels(seed, nt, cfg.k, nb)
    records = []
    for method in cfg.methods:
        if method in NARROWBAND_METHODS and nb != 1:
            continue
        start = time.perf_counter()
        try:
            sol = _run_method(method, channels, cfg)
            feasible = sol.feasible
            transmit, n_active, total = sol.transmit_power, sol.n_active, sol.total_power
            outer = sol.diagnostics.outer_iters
            inner = sol.diagnostics.inner_iters
        except BeamformingError:
            feasible = False
            transmit = total = float("nan")
            n_active = 0
            outer = inner = 0
        wall_ms = (time.perf_counter() - start) * 1e3
        records.append(TrialRecord(
            experiment=experiment_id, trial=trial, seed=seed, nt=nt, k=cfg.k,
            nb=nb, method=method, feasible=feasible, transmit_power_w=transmit,
            n_active=n_active, total_power_w=total, outer_iters=outer,
            inner_iters=inner, wall_ms=wall_ms,
        ))
    return records


def run_experiment(cfg: ExperimentConfig, experiment_id: str = "run",
                   parallel: int = 1) -> list:
    """Run the configured sweep and return records in canonical order.

    Per-trial errors from the solvers are recorded as infeasible rows
    and never abort the sweep. Trials are independent; with parallel > 1
    they run in a process pool, and the deterministic per-trial seeds
    plus the final sort make the output independent of scheduling.
    """
    validate_config(cfg)
    tasks = [
        (cfg, experiment_id, trial, nt, nb)
        for nt in cfg.nt_list
        for nb in cfg.nb_list
        for trial in range(cfg.trials)
    ]
    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(_run_point, tasks, chunksize=8))
    else:
        chunks = [_run_point(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.nt, r.nb, r.method, r.trial))
    return records


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def records_to_csv(records: Iterable[TrialRecord], timing: bool = False) -> str:
    """Render records as CSV text; wall_ms is zeroed unless timing=True
    (measured times would break byte-level reproducibility)."""
    lines = [CSV_HEADER]
    for r in records:
        wall = r.wall_ms if timing else 0.0
        lines.append(
            f"{r.experiment},{r.trial},{r.seed},{r.nt},{r.k},{r.nb},{r.method},"
            f"{'true' if r.feasible else 'false'},{_fmt(r.transmit_power_w)},"
            f"{r.n_active},{_fmt(r.total_power_w)},{r.outer_iters},"
            f"{r.inner_iters},{_fmt(wall)}"
        )
    return "\n".join(lines) + "\n"


def summarize(records: Iterable[TrialRecord]) -> dict:
    """Per (nt, nb, method): means over feasible rows plus an
    infeasible count. Order-insensitive."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.nt, r.nb, r.method), []).append(r)
    out = {}
    for key, rows in sorted(groups.items()):
        feas = [r for r in rows if r.feasible]
        out[key] = {
            "trials": len(rows),
            "infeasible": len(rows) - len(feas),
            "mean_n_active": float(np.mean([r.n_active for r in feas])) if feas else float("nan"),
            "mean_transmit_power_w": float(np.mean([r.transmit_power_w for r in feas])) if feas else float("nan"),
            "mean_total_power_w": float(np.mean([r.total_power_w for r in feas])) if feas else float("nan"),
        }
    return out


_LIST_KEYS = {"nt_list", "nb_list"}
_INT_KEYS = {"seed", "trials", "k", "outer_iters"}
_FLOAT_KEYS = {"gamma_db", "sigma2", "c1", "c2", "delta", "eps_off"}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse line-oriented ``key = value`` text into an ExperimentConfig.

    Keys are exactly the ExperimentConfig field names; lists are
    comma-separated; blank lines and lines starting with '#' are
    skipped; unknown keys are errors.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in overrides:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            overrides[key] = _parse_value(key, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    cfg = replace(ExperimentConfig(), **overrides)
    validate_config(cfg)
    return cfg


def _parse_value(key: str, value: str):
    if key in _LIST_KEYS:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip())
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key == "p_a":
        return None if value.lower() in ("none", "") else float(value)
    if key == "methods":
        return tuple(v.strip() for v in value.split(",") if v.strip())
    raise ConfigError(f"unhandled key {key!r}")


def parse_config_file(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


_PRESETS = {
    "table1": dict(methods=("alg1", "alg2", "greedy"), trials=500),
    "fig1": dict(methods=("naive", "alg1", "alg2", "greedy"), trials=500),
    "table2": dict(nt_list=(32,), nb_list=tuple(range(1, 11)),
                   methods=("multiband",), trials=300),
    "fig2": dict(nt_list=(32,), nb_list=tuple(range(1, 11)),
                 methods=("multiband",), trials=300),
}


def preset_config(name: str, trials: Optional[int] = None,
                  seed: Optional[int] = None) -> ExperimentConfig:
    """Sweep configurations for the reference experiments."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    cfg = replace(ExperimentConfig(), **_PRESETS[name])
    if trials is not None:
        cfg = replace(cfg, trials=trials)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    validate_config(cfg)
    return cfg
