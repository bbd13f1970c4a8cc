"""Binding between the optimizer's gene space and the control problem.

A candidate solution is a 12-gene real vector: the six proportional gains
followed by the six derivative gains.  Its six objectives are the
per-joint sums of absolute tracking error from one closed-loop run.
"""

from __future__ import annotations

import numpy as np

from .dynamics import N_JOINTS, RobotModel
from .simulation import GainSet, simulate
from .trajectory import TrajectorySpec

GENE_COUNT = 2 * N_JOINTS
OBJECTIVE_COUNT = N_JOINTS


def decode(chromosome) -> GainSet:
    """Split a 12-gene vector into (kp, kd)."""
    c = np.asarray(chromosome, dtype=float)
    if c.shape != (GENE_COUNT,):
        raise ValueError(f"chromosome must have {GENE_COUNT} genes, got "
                         f"shape {c.shape}")
    return GainSet(kp=c[:N_JOINTS].copy(), kd=c[N_JOINTS:].copy())


def encode(gains: GainSet) -> np.ndarray:
    """Inverse of decode."""
    return np.concatenate([gains.kp, gains.kd])


def make_objective(model: RobotModel, spec: TrajectorySpec,
                   dt_control: float, dt_integration: float,
                   initial_offset: float = 0.05):
    """Build the 6-objective evaluator used by the tuner.

    Each evaluation simulates the loop from rest at the trajectory start
    displaced by ``initial_offset`` on every joint (without the offset the
    exact-model problem scores every gain set equally) and returns the
    per-joint error sums.  Diverged runs come back with the divergence
    sentinel rather than raising.
    """
    q0 = spec.q_initial + initial_offset

    def objective(chromosome) -> np.ndarray:
        gains = decode(chromosome)
        result = simulate(model, gains, spec, dt_control, dt_integration,
                          q0=q0)
        return result.iae

    return objective
