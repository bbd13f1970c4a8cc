"""Computed-torque gain tuning for a six-joint arm.

Building blocks: rigid-body dynamics of the arm, a quintic joint-space
reference, the closed tracking loop with its per-joint error scores, an
elitist non-dominated-sorting optimizer, and the 12-gene gain encoding
that ties them together.
"""

from .config import ConfigError, RunConfig, load_config
from .dynamics import (N_JOINTS, RobotModel, SingularConfigurationError,
                       bias_torques, default_robot, forward_dynamics,
                       inverse_dynamics, load_robot, mass_matrix)
from .moea import (FAILURE_OBJECTIVES, EvolveResult, Individual,
                   OperatorConfig, crowded_compare, crowding_distance,
                   dominates, evolve, mutate_polynomial, mutate_real,
                   nondominated_sort, recombine_real, recombine_sbx)
from .simulation import (DIVERGED_IAE, GainSet, SimResult, control_torque,
                         iae, simulate, write_joint_tracking_csvs,
                         write_trajectory_csv)
from .trajectory import TrajectorySpec, desired_state, scaling
from .tuning import GENE_COUNT, OBJECTIVE_COUNT, decode, encode, \
    make_objective

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "RunConfig", "load_config",
    "N_JOINTS", "RobotModel", "SingularConfigurationError", "bias_torques",
    "default_robot", "forward_dynamics", "inverse_dynamics", "load_robot",
    "mass_matrix",
    "FAILURE_OBJECTIVES", "EvolveResult", "Individual", "OperatorConfig",
    "crowded_compare", "crowding_distance", "dominates", "evolve",
    "mutate_polynomial", "mutate_real", "nondominated_sort",
    "recombine_real", "recombine_sbx",
    "DIVERGED_IAE", "GainSet", "SimResult", "control_torque", "iae",
    "simulate", "write_joint_tracking_csvs", "write_trajectory_csv",
    "TrajectorySpec", "desired_state", "scaling",
    "GENE_COUNT", "OBJECTIVE_COUNT", "decode", "encode", "make_objective",
    "__version__",
]
