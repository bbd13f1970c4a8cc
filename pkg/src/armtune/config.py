"""Run configuration: one YAML file drives both commands.

Every field has a default reproducing the reference experiment (boundary
poses in degrees, 1 s quintic motion, 10 ms sampling with 1 ms
integration substeps, the empirical PD gain table, 12 genes bounded to
[0, 100], crossover probability 0.9 and per-gene mutation probability
1/12), so an empty file is a valid configuration.  Angles in files are
degrees; conversion to radians happens here, once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dynamics import N_JOINTS, RobotModel, default_robot, load_robot
from .moea import OperatorConfig
from .simulation import GainSet, _check_grid
from .trajectory import TrajectorySpec
from .tuning import GENE_COUNT

DEFAULT_Q_INITIAL_DEG = (-20.0, 60.0, -120.0, 0.0, -30.0, 0.0)
DEFAULT_Q_FINAL_DEG = (20.0, -60.0, -60.0, 0.0, 30.0, 0.0)
DEFAULT_KP = (700.0, 1100.0, 400.0, 40.0, 30.0, 40.0)
DEFAULT_KD = (20.0, 20.0, 20.0, 5.0, 5.0, 5.0)


class ConfigError(ValueError):
    """Configuration file problem; the message names file and field."""


@dataclass(frozen=True)
class SimulationSettings:
    dt_control: float = 0.01
    dt_integration: float = 0.001
    initial_offset_rad: float = 0.0


@dataclass(frozen=True)
class OptimizerSettings:
    population: int = 40
    generations: int = 30
    seed: int = 1
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    gene_lower: np.ndarray = None
    gene_upper: np.ndarray = None
    initial_offset_rad: float = 0.05

    def __post_init__(self):
        lo = np.zeros(GENE_COUNT) if self.gene_lower is None \
            else np.broadcast_to(np.asarray(self.gene_lower, float),
                                 (GENE_COUNT,)).copy()
        hi = np.full(GENE_COUNT, 100.0) if self.gene_upper is None \
            else np.broadcast_to(np.asarray(self.gene_upper, float),
                                 (GENE_COUNT,)).copy()
        object.__setattr__(self, "gene_lower", lo)
        object.__setattr__(self, "gene_upper", hi)


@dataclass(frozen=True)
class RunConfig:
    robot_file: str | None = None
    trajectory: TrajectorySpec = None
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    gains: GainSet = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    output_dir: str = "out"

    def __post_init__(self):
        if self.trajectory is None:
            object.__setattr__(self, "trajectory", TrajectorySpec(
                np.deg2rad(DEFAULT_Q_INITIAL_DEG),
                np.deg2rad(DEFAULT_Q_FINAL_DEG), 1.0))
        if self.gains is None:
            object.__setattr__(self, "gains", GainSet(
                np.array(DEFAULT_KP), np.array(DEFAULT_KD)))

    def load_model(self) -> RobotModel:
        if self.robot_file is None:
            return default_robot()
        return load_robot(self.robot_file)


def _reject_unknown(path, section, mapping, known):
    for key in mapping:
        if key not in known:
            raise ConfigError(f"{path}: {section}{key}: unknown field "
                              f"(known: {', '.join(sorted(known))})")


def _number(path, section, mapping, key, default, check=None, why=""):
    raw = mapping.get(key, default)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: {section}{key}: not a number: {raw!r}") \
            from None
    if not np.isfinite(value) or (check is not None and not check(value)):
        raise ConfigError(f"{path}: {section}{key}: {why or 'invalid value'}"
                          f" (got {raw!r})")
    return value


def _vector(path, section, mapping, key, default, length):
    raw = mapping.get(key, default)
    try:
        vec = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: {section}{key}: not a number list: "
                          f"{raw!r}") from None
    if vec.shape != (length,) or not np.all(np.isfinite(vec)):
        raise ConfigError(f"{path}: {section}{key}: must be {length} finite "
                          f"numbers")
    return vec


def _bound(path, mapping, key, default):
    raw = mapping.get(key, default)
    vec = np.asarray(raw, dtype=float)
    if vec.ndim == 0:
        vec = np.full(GENE_COUNT, float(vec))
    if vec.shape != (GENE_COUNT,) or not np.all(np.isfinite(vec)):
        raise ConfigError(f"{path}: optimizer.{key}: must be a number or "
                          f"{GENE_COUNT} numbers")
    return vec


def load_config(path) -> RunConfig:
    """Parse and validate a run-configuration file."""
    path = str(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    _reject_unknown(path, "", doc, {"robot_file", "trajectory", "simulation",
                                    "gains", "optimizer", "output_dir"})

    traj_doc = doc.get("trajectory") or {}
    _reject_unknown(path, "trajectory.", traj_doc,
                    {"q_initial_deg", "q_final_deg", "duration_s"})
    duration = _number(path, "trajectory.", traj_doc, "duration_s", 1.0,
                       lambda v: v > 0, "duration must be positive")
    q_init = _vector(path, "trajectory.", traj_doc, "q_initial_deg",
                     DEFAULT_Q_INITIAL_DEG, N_JOINTS)
    q_fin = _vector(path, "trajectory.", traj_doc, "q_final_deg",
                    DEFAULT_Q_FINAL_DEG, N_JOINTS)
    trajectory = TrajectorySpec(np.deg2rad(q_init), np.deg2rad(q_fin),
                                duration)

    sim_doc = doc.get("simulation") or {}
    _reject_unknown(path, "simulation.", sim_doc,
                    {"dt_control_s", "dt_integration_s", "initial_offset_rad"})
    dt_c = _number(path, "simulation.", sim_doc, "dt_control_s", 0.01,
                   lambda v: v > 0, "must be positive")
    dt_i = _number(path, "simulation.", sim_doc, "dt_integration_s", 0.001,
                   lambda v: v > 0, "must be positive")
    offset = _number(path, "simulation.", sim_doc, "initial_offset_rad", 0.0)
    try:
        _check_grid(trajectory.t_f, dt_c, dt_i)
    except ValueError as exc:
        raise ConfigError(f"{path}: simulation.dt_control_s/"
                          f"dt_integration_s: {exc}") from exc
    simulation = SimulationSettings(dt_c, dt_i, offset)

    gains_doc = doc.get("gains") or {}
    _reject_unknown(path, "gains.", gains_doc, {"kp", "kd"})
    kp = _vector(path, "gains.", gains_doc, "kp", DEFAULT_KP, N_JOINTS)
    kd = _vector(path, "gains.", gains_doc, "kd", DEFAULT_KD, N_JOINTS)
    if (kp < 0).any() or (kd < 0).any():
        raise ConfigError(f"{path}: gains.kp/kd: gains must be nonnegative")
    gains = GainSet(kp, kd)

    opt_doc = doc.get("optimizer") or {}
    _reject_unknown(path, "optimizer.", opt_doc,
                    {"population", "generations", "seed",
                     "crossover_probability", "mutation_probability",
                     "operator_family", "recombination_spread",
                     "mutation_range_fraction", "mutation_precision",
                     "sbx_eta", "polynomial_eta", "gene_lower", "gene_upper",
                     "initial_offset_rad"})
    population = int(_number(path, "optimizer.", opt_doc, "population", 40,
                             lambda v: v >= 2 and v == int(v) and int(v) % 2 == 0,
                             "must be an even integer >= 2"))
    generations = int(_number(path, "optimizer.", opt_doc, "generations", 30,
                              lambda v: v >= 1 and v == int(v),
                              "must be an integer >= 1"))
    seed = int(_number(path, "optimizer.", opt_doc, "seed", 1,
                       lambda v: v >= 0 and v == int(v),
                       "must be a nonnegative integer"))
    family = opt_doc.get("operator_family", "real")
    if family not in ("real", "sbx"):
        raise ConfigError(f"{path}: optimizer.operator_family: must be "
                          f"'real' or 'sbx' (got {family!r})")
    try:
        operators = OperatorConfig(
            crossover_probability=_number(path, "optimizer.", opt_doc,
                                          "crossover_probability", 0.9),
            mutation_probability=_number(path, "optimizer.", opt_doc,
                                         "mutation_probability",
                                         1.0 / GENE_COUNT),
            family=family,
            spread=_number(path, "optimizer.", opt_doc,
                           "recombination_spread", 0.25),
            range_fraction=_number(path, "optimizer.", opt_doc,
                                   "mutation_range_fraction", 0.1),
            precision=_number(path, "optimizer.", opt_doc,
                              "mutation_precision", 16.0),
            sbx_eta=_number(path, "optimizer.", opt_doc, "sbx_eta", 20.0),
            poly_eta=_number(path, "optimizer.", opt_doc, "polynomial_eta",
                             20.0))
    except ValueError as exc:
        raise ConfigError(f"{path}: optimizer: {exc}") from exc
    lower = _bound(path, opt_doc, "gene_lower", 0.0)
    upper = _bound(path, opt_doc, "gene_upper", 100.0)
    if not np.all(lower < upper):
        raise ConfigError(f"{path}: optimizer.gene_lower/gene_upper: every "
                          f"lower bound must be below its upper bound")
    opt_offset = _number(path, "optimizer.", opt_doc, "initial_offset_rad",
                         0.05)
    optimizer = OptimizerSettings(population=population,
                                  generations=generations, seed=seed,
                                  operators=operators, gene_lower=lower,
                                  gene_upper=upper,
                                  initial_offset_rad=opt_offset)

    robot_file = doc.get("robot_file")
    if robot_file is not None:
        robot_file = str(robot_file)
        if not Path(robot_file).is_absolute():
            robot_file = str((Path(path).parent / robot_file).resolve())

    output_dir = str(doc.get("output_dir", "out"))
    return RunConfig(robot_file=robot_file, trajectory=trajectory,
                     simulation=simulation, gains=gains, optimizer=optimizer,
                     output_dir=output_dir)
