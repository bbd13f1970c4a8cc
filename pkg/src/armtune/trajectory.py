"""Joint-space reference motion from fifth-order polynomial time scaling.

A single scalar profile r(t) = 10 s^3 - 15 s^4 + 6 s^5 (s = t/t_f) sweeps
every joint from its initial to its final angle; velocity and acceleration
references are the analytic derivatives, so they start and end exactly at
zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import N_JOINTS, _check_joint_vector


@dataclass(frozen=True)
class TrajectorySpec:
    """Rest-to-rest joint-space motion: initial pose, final pose, duration."""

    q_initial: np.ndarray  # (6,) rad
    q_final: np.ndarray    # (6,) rad
    t_f: float             # s

    def __post_init__(self):
        qi = _check_joint_vector(self.q_initial, "q_initial")
        qf = _check_joint_vector(self.q_final, "q_final")
        qi.setflags(write=False)
        qf.setflags(write=False)
        object.__setattr__(self, "q_initial", qi)
        object.__setattr__(self, "q_final", qf)
        if not (np.isfinite(self.t_f) and self.t_f > 0):
            raise ValueError(f"t_f must be positive and finite, got {self.t_f}")

    @property
    def displacement(self) -> np.ndarray:
        """Total joint travel, final minus initial."""
        return self.q_final - self.q_initial


def _check_time(t: float, t_f: float) -> None:
    if not (0.0 <= t <= t_f):
        raise ValueError(f"t={t} outside the trajectory interval [0, {t_f}]")


def scaling(t: float, t_f: float) -> float:
    """Quintic time-scaling r(t) in [0, 1], monotone, with r(0)=0, r(t_f)=1."""
    _check_time(t, t_f)
    s = t / t_f
    return 10.0 * s**3 - 15.0 * s**4 + 6.0 * s**5


def desired_state(spec: TrajectorySpec, t: float):
    """Reference (position, velocity, acceleration) at time t in [0, t_f].

    Position is q_initial + r(t) * displacement; the velocity and
    acceleration are the exact time derivatives of that expression.
    """
    _check_time(t, spec.t_f)
    t_f = spec.t_f
    s = t / t_f
    r = 10.0 * s**3 - 15.0 * s**4 + 6.0 * s**5
    rd = 30.0 * s**2 * (1.0 - s) ** 2 / t_f
    rdd = (60.0 * s - 180.0 * s**2 + 120.0 * s**3) / t_f**2
    D = spec.displacement
    return spec.q_initial + r * D, rd * D, rdd * D
