"""Closed-loop tracking simulation and its scoring.

The loop couples a computed-torque controller to the forward-dynamics
plant.  The controller output

    tau = A(q) tau' + h(q, qd),   tau' = qdd_des + kd (qd_des - qd)
                                         + kp (q_des - q)

is evaluated continuously, i.e. inside every stage of the fixed-step RK4
integrator, which is what a continuous-time block-diagram simulation of
the same loop does.  The control period only sets the sampling grid on
which states are logged and the error is scored.  Scoring is the
per-joint sum of absolute position errors over the logged samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics as dyn
from .dynamics import N_JOINTS, RobotModel, _check_joint_vector
from .trajectory import TrajectorySpec, desired_state

#: per-joint score assigned to runs that blow up
DIVERGED_IAE = 1.0e9


@dataclass(frozen=True)
class GainSet:
    """Diagonal PD gains of the auxiliary controller, all entries >= 0."""

    kp: np.ndarray  # (6,) 1/s^2
    kd: np.ndarray  # (6,) 1/s

    def __post_init__(self):
        kp = _check_joint_vector(self.kp, "kp")
        kd = _check_joint_vector(self.kd, "kd")
        if (kp < 0).any() or (kd < 0).any():
            raise ValueError("gains must be nonnegative")
        kp.setflags(write=False)
        kd.setflags(write=False)
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "kd", kd)


@dataclass(frozen=True)
class SimResult:
    """Sampled closed-loop run: states, references, torques and scores.

    Arrays carry one row per logged control instant; ``iae`` is the
    per-joint sum of absolute position errors over those rows (set to
    ``DIVERGED_IAE`` when ``diverged``, in which case the arrays stop at
    the last finite sample).
    """

    t: np.ndarray       # (K,)
    q: np.ndarray       # (K,6) rad
    qd: np.ndarray      # (K,6) rad/s
    q_des: np.ndarray   # (K,6) rad
    qd_des: np.ndarray  # (K,6) rad/s
    tau: np.ndarray     # (K,6) N m
    iae: np.ndarray     # (6,) rad (summed over samples)
    diverged: bool


def iae(errors) -> np.ndarray:
    """Per-joint sum of absolute errors over a sequence of error vectors."""
    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 2 or errors.shape[0] == 0 or errors.shape[1] != N_JOINTS:
        raise ValueError(
            f"errors must be a nonempty (K,{N_JOINTS}) sequence, got shape "
            f"{errors.shape}")
    if not np.all(np.isfinite(errors)):
        raise ValueError("errors contain non-finite entries")
    return np.abs(errors).sum(axis=0)


def control_torque(model: RobotModel, gains: GainSet, q, qd,
                   q_des, qd_des, qdd_des) -> np.ndarray:
    """Computed-torque law: model feedforward plus PD feedback.

    Equivalent to inverse_dynamics(model, q, qd, tau') with the auxiliary
    acceleration tau' = qdd_des + kd (qd_des - qd) + kp (q_des - q).
    """
    q = _check_joint_vector(q, "q")
    qd = _check_joint_vector(qd, "qd")
    q_des = _check_joint_vector(q_des, "q_des")
    qd_des = _check_joint_vector(qd_des, "qd_des")
    qdd_des = _check_joint_vector(qdd_des, "qdd_des")
    aux = qdd_des + gains.kd * (qd_des - qd) + gains.kp * (q_des - q)
    return dyn.inverse_dynamics(model, q, qd, aux)


class _ControlledPlant:
    """Preallocated controller+plant right-hand side for the integrator.

    One batched Newton-Euler call per evaluation yields the inertia-matrix
    columns, the bias torques and the controller torque; the plant
    acceleration then solves A qdd = tau - h.
    """

    def __init__(self, model: RobotModel, gains: GainSet,
                 spec: TrajectorySpec):
        self.model = model
        self.gains = gains
        self.spec = spec
        n = N_JOINTS
        self._qd_rows = np.zeros((n + 2, n))
        self._qdd_rows = np.zeros((n + 2, n))
        self._qdd_rows[:n] = np.eye(n)
        self._base_acc = np.zeros((n + 2, 3))
        self._base_acc[n] = -model.gravity
        self._base_acc[n + 1] = -model.gravity

    def __call__(self, t: float, y: np.ndarray):
        """Return (state derivative, controller torque) at (t, y)."""
        n = N_JOINTS
        q = y[:n]
        qd = y[n:]
        # step arithmetic may overshoot t_f by an ulp at the last stage
        q_des, qd_des, qdd_des = desired_state(self.spec,
                                               min(t, self.spec.t_f))
        aux = qdd_des + self.gains.kd * (qd_des - qd) \
            + self.gains.kp * (q_des - q)
        self._qd_rows[n] = qd
        self._qd_rows[n + 1] = qd
        self._qdd_rows[n + 1] = aux
        rot = dyn._link_rotations(self.model, q)
        out = dyn._rne_batch(self.model, rot, self._qd_rows, self._qdd_rows,
                             self._base_acc)
        A = out[:n].T
        h = out[n]
        tau = out[n + 1]
        qdd = np.linalg.solve(A, tau - h)
        dy = np.empty(2 * n)
        dy[:n] = qd
        dy[n:] = qdd
        return dy, tau


def _check_grid(t_f: float, dt_control: float, dt_integration: float):
    if dt_control <= 0 or dt_integration <= 0:
        raise ValueError("time steps must be positive")
    n_ctrl = t_f / dt_control
    if abs(n_ctrl - round(n_ctrl)) > 1e-9 * max(1.0, n_ctrl):
        raise ValueError(
            f"dt_control={dt_control} does not divide t_f={t_f}")
    n_sub = dt_control / dt_integration
    if abs(n_sub - round(n_sub)) > 1e-9 * max(1.0, n_sub):
        raise ValueError(
            f"dt_integration={dt_integration} does not divide "
            f"dt_control={dt_control}")
    return int(round(n_ctrl)), int(round(n_sub))


def simulate(model: RobotModel, gains: GainSet, spec: TrajectorySpec,
             dt_control: float, dt_integration: float,
             q0=None, qd0=None) -> SimResult:
    """Run the tracking loop over [0, t_f] and score it.

    The initial state defaults to rest at the start of the reference
    trajectory.  A state that stops being finite (or a configuration the
    linear solve rejects) marks the run as diverged: logging stops at the
    last good sample and every joint scores ``DIVERGED_IAE``.
    """
    n_ctrl, n_sub = _check_grid(spec.t_f, dt_control, dt_integration)
    q0 = spec.q_initial if q0 is None else _check_joint_vector(q0, "q0")
    qd0 = np.zeros(N_JOINTS) if qd0 is None else _check_joint_vector(qd0, "qd0")

    rhs = _ControlledPlant(model, gains, spec)
    n = N_JOINTS
    K = n_ctrl + 1
    t_log = np.arange(K) * dt_control
    t_log[-1] = spec.t_f  # exact endpoint
    q_log = np.empty((K, n))
    qd_log = np.empty((K, n))
    qdes_log = np.empty((K, n))
    qddes_log = np.empty((K, n))
    tau_log = np.empty((K, n))

    y = np.concatenate([q0, qd0])
    h = dt_integration
    diverged = False
    k_done = 0
    # unstable gain sets overflow on purpose; the finiteness checks and
    # the except clauses below are the divergence handling
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            t_k = t_log[k]
            try:
                deriv, tau_k = rhs(t_k, y)
            except np.linalg.LinAlgError:
                diverged = True
                break
            if not (np.all(np.isfinite(y)) and np.all(np.isfinite(tau_k))):
                diverged = True
                break
            q_log[k] = y[:n]
            qd_log[k] = y[n:]
            qdes_log[k], qddes_log[k], _ = desired_state(spec, t_k)
            tau_log[k] = tau_k
            k_done = k + 1
            if k == n_ctrl:
                break
            try:
                for j in range(n_sub):
                    t = t_k + j * h
                    k1 = deriv if j == 0 else rhs(t, y)[0]
                    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)[0]
                    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)[0]
                    k4 = rhs(t + h, y + h * k3)[0]
                    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                    if not np.all(np.isfinite(y)):
                        raise FloatingPointError
            except (np.linalg.LinAlgError, FloatingPointError):
                diverged = True
                break

    if diverged:
        sl = slice(0, k_done)
        return SimResult(t=t_log[sl], q=q_log[sl], qd=qd_log[sl],
                         q_des=qdes_log[sl], qd_des=qddes_log[sl],
                         tau=tau_log[sl], iae=np.full(n, DIVERGED_IAE),
                         diverged=True)
    scores = iae(qdes_log - q_log)
    return SimResult(t=t_log, q=q_log, qd=qd_log, q_des=qdes_log,
                     qd_des=qddes_log, tau=tau_log, iae=scores,
                     diverged=False)


def write_trajectory_csv(result: SimResult, path) -> None:
    """Write the sampled run: time, desired/actual positions and
    velocities, torques; 12 significant digits."""
    cols = (["time"]
            + [f"q_des_{j+1}" for j in range(N_JOINTS)]
            + [f"q_{j+1}" for j in range(N_JOINTS)]
            + [f"qd_des_{j+1}" for j in range(N_JOINTS)]
            + [f"qd_{j+1}" for j in range(N_JOINTS)]
            + [f"tau_{j+1}" for j in range(N_JOINTS)])
    data = np.hstack([result.t[:, None], result.q_des, result.q,
                      result.qd_des, result.qd, result.tau])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def write_joint_tracking_csvs(result: SimResult, outdir) -> list:
    """Emit per-joint desired-vs-actual files (one panel per joint)."""
    from pathlib import Path

    outdir = Path(outdir)
    paths = []
    for j in range(N_JOINTS):
        path = outdir / f"joint{j+1}_tracking.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("time,q_des,q,qd_des,qd\n")
            for k in range(len(result.t)):
                fh.write(",".join(
                    f"{v:.12g}" for v in (result.t[k], result.q_des[k, j],
                                          result.q[k, j],
                                          result.qd_des[k, j],
                                          result.qd[k, j])) + "\n")
        paths.append(path)
    return paths
