"""Rigid-body dynamics of a 6-joint revolute serial arm.

The model is the standard joint-space form

    tau = A(q) qdd + h(q, qd)

where A is the 6x6 joint-space inertia (kinetic energy) matrix and h
collects Coriolis, centrifugal and gravity torques.  Everything is
evaluated numerically with a recursive Newton-Euler sweep over the
kinematic chain (standard Denavit-Hartenberg frames, all joints
revolute); A is never stored symbolically.  Columns of A come from
unit-acceleration sweeps with gravity switched off, h from a
zero-acceleration sweep, and forward dynamics solves the 6x6 linear
system.

The Newton-Euler core is batched: one call evaluates the sweep for many
(qd, qdd, gravity) rows sharing the same configuration q, which is what
makes closed-loop simulation affordable in pure numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

N_JOINTS = 6

_Z3 = np.zeros(3)


class SingularConfigurationError(RuntimeError):
    """Raised when the inertia matrix cannot be solved against."""


@dataclass(frozen=True)
class RobotModel:
    """Kinematic and inertial parameters of a 6R arm, immutable after load.

    All vectors are expressed in standard-DH link frames: ``com[i]`` is the
    centre of mass of link i relative to frame i, ``inertia[i]`` the 3x3
    rotational inertia of link i about its centre of mass.  ``rotor_inertia``
    holds the motor rotor inertia referred to the joint (gear ratio squared
    already applied); it enters the model as an extra diagonal inertia term.
    """

    name: str
    alpha: np.ndarray          # (6,) link twist, rad
    a: np.ndarray              # (6,) link length, m
    d: np.ndarray              # (6,) joint offset, m
    mass: np.ndarray           # (6,) kg
    com: np.ndarray            # (6,3) m
    inertia: np.ndarray        # (6,3,3) kg m^2, about COM
    rotor_inertia: np.ndarray  # (6,) kg m^2, joint-referred
    gravity: np.ndarray        # (3,) m/s^2, base frame
    # derived, cached at construction
    _pstar: np.ndarray = field(init=False, repr=False)
    _cos_alpha: np.ndarray = field(init=False, repr=False)
    _sin_alpha: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("alpha", "a", "d", "mass", "com", "inertia",
                     "rotor_inertia", "gravity"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ca, sa = np.cos(self.alpha), np.sin(self.alpha)
        # origin of frame i relative to frame i-1, expressed in frame i;
        # _plever stacks [pstar, pstar + com] per link for the batched sweep
        pstar = np.column_stack([self.a, self.d * sa, self.d * ca])
        plever = np.stack([pstar, pstar + self.com], axis=1)
        for name, arr in (("_pstar", pstar), ("_plever", plever),
                          ("_cos_alpha", ca), ("_sin_alpha", sa)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def with_gravity(self, gravity) -> "RobotModel":
        """Copy of the model with a different base-frame gravity vector."""
        return replace(self, gravity=np.asarray(gravity, dtype=float))


def _check_joint_vector(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (N_JOINTS,):
        raise ValueError(f"{name} must have shape ({N_JOINTS},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries: {x}")
    return x


def _link_rotations(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Rotations R_i mapping link-frame-i coordinates to frame i-1, (6,3,3)."""
    cq, sq = np.cos(q), np.sin(q)
    ca, sa = model._cos_alpha, model._sin_alpha
    rot = np.empty((N_JOINTS, 3, 3))
    rot[:, 0, 0] = cq
    rot[:, 0, 1] = -sq * ca
    rot[:, 0, 2] = sq * sa
    rot[:, 1, 0] = sq
    rot[:, 1, 1] = cq * ca
    rot[:, 1, 2] = -cq * sa
    rot[:, 2, 0] = 0.0
    rot[:, 2, 1] = sa
    rot[:, 2, 2] = ca
    return rot


def _cross(a, b):
    """Cross product over the last axis; broadcasts (3,) against (B,3)."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    c0 = a1 * b2 - a2 * b1
    c1 = a2 * b0 - a0 * b2
    c2 = a0 * b1 - a1 * b0
    out = np.empty(c0.shape + (3,)) if isinstance(c0, np.ndarray) \
        else np.empty((3,))
    out[..., 0] = c0
    out[..., 1] = c1
    out[..., 2] = c2
    return out


def _rne_batch(model: RobotModel, rot: np.ndarray, qd: np.ndarray,
               qdd: np.ndarray, base_acc: np.ndarray) -> np.ndarray:
    """Newton-Euler sweep for B rows sharing one configuration.

    ``rot`` is the per-link rotation stack for the shared q, ``qd`` and
    ``qdd`` are (B,6), ``base_acc`` is the (B,3) fictitious base linear
    acceleration (-gravity for rows that feel gravity, zero otherwise).
    Returns the (B,6) joint torques.  Link-frame vectors are kept as rows,
    so frame changes appear as right-multiplications: into frame i via
    ``x @ R_i``, back out via ``x @ R_i.T``.
    """
    B = qd.shape[0]
    w = np.zeros((B, 3))
    wd = np.zeros((B, 3))
    vd = base_acc.copy()

    force = []
    moment = []
    pstar = model._pstar
    plever = model._plever
    mass = model.mass
    inertia = model.inertia
    rotor = model.rotor_inertia

    # outward sweep: propagate angular velocity/acceleration and linear
    # acceleration down the chain, collect net force/moment per link
    for i in range(N_JOINTS):
        R = rot[i]
        qdi = qd[:, i]
        # joint axis is z of frame i-1, i.e. (0,0,1) before rotating into i
        wd[:, 0] += w[:, 1] * qdi           # w x (z0*qdi)
        wd[:, 1] -= w[:, 0] * qdi
        wd[:, 2] += qdd[:, i]
        w = w.copy()
        w[:, 2] += qdi
        w = w @ R
        wd = wd @ R
        p = pstar[i]
        vd = vd @ R + _cross(wd, p) + _cross(w, _cross(w, p))
        s = model.com[i]
        acc_com = vd + _cross(wd, s) + _cross(w, _cross(w, s))
        force.append(mass[i] * acc_com)
        Jw = w @ inertia[i]                 # inertia is symmetric
        moment.append(wd @ inertia[i] + _cross(w, Jw))

    # inward sweep: accumulate interbody force/moment, project on joint axes
    tau = np.empty((B, N_JOINTS))
    f = np.zeros((B, 3))
    nn = np.zeros((B, 3))
    for i in range(N_JOINTS - 1, -1, -1):
        if i < N_JOINTS - 1:
            Rc = rot[i + 1]
            f = f @ Rc.T
            nn = nn @ Rc.T + _cross(pstar[i], f)
        nn = nn + _cross(plever[i, 1], force[i]) + moment[i]
        f = f + force[i]
        # joint axis z_{i-1} has coordinates rot[i][2,:] in frame i
        tau[:, i] = nn @ rot[i][2, :] + rotor[i] * qdd[:, i]
    return tau


def rne(model: RobotModel, q: np.ndarray, qd_rows: np.ndarray,
        qdd_rows: np.ndarray, gravity_on: np.ndarray) -> np.ndarray:
    """Batched inverse dynamics: torque rows for (qd, qdd) rows at one q.

    ``gravity_on`` is a (B,) boolean mask selecting which rows feel the
    model's gravity field.  No input validation; callers own that.
    """
    rot = _link_rotations(model, q)
    base_acc = np.where(gravity_on[:, None], -model.gravity, _Z3)
    return _rne_batch(model, rot, qd_rows, qdd_rows, base_acc)


def inverse_dynamics(model: RobotModel, q, qd, qdd) -> np.ndarray:
    """Joint torques tau = A(q) qdd + h(q, qd) for one state."""
    q = _check_joint_vector(q, "q")
    qd = _check_joint_vector(qd, "qd")
    qdd = _check_joint_vector(qdd, "qdd")
    on = np.ones(1, dtype=bool)
    return rne(model, q, qd[None, :], qdd[None, :], on)[0]


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    """Joint-space inertia matrix A(q), symmetric positive definite.

    Column j is the torque produced by a unit acceleration of joint j with
    zero velocity and gravity switched off.
    """
    q = _check_joint_vector(q, "q")
    rot = _link_rotations(model, q)
    zeros = np.zeros((N_JOINTS, N_JOINTS))
    cols = _rne_batch(model, rot, zeros, np.eye(N_JOINTS),
                      np.zeros((N_JOINTS, 3)))
    return cols.T


def bias_torques(model: RobotModel, q, qd) -> np.ndarray:
    """Coriolis + centrifugal + gravity torques h(q, qd)."""
    q = _check_joint_vector(q, "q")
    qd = _check_joint_vector(qd, "qd")
    on = np.ones(1, dtype=bool)
    return rne(model, q, qd[None, :], np.zeros((1, N_JOINTS)), on)[0]


def forward_dynamics(model: RobotModel, q, qd, tau) -> np.ndarray:
    """Joint accelerations solving A(q) qdd = tau - h(q, qd)."""
    q = _check_joint_vector(q, "q")
    qd = _check_joint_vector(qd, "qd")
    tau = _check_joint_vector(tau, "tau")
    rot = _link_rotations(model, q)
    rows_qd = np.zeros((N_JOINTS + 1, N_JOINTS))
    rows_qd[N_JOINTS] = qd
    rows_qdd = np.vstack([np.eye(N_JOINTS), np.zeros(N_JOINTS)])
    base_acc = np.zeros((N_JOINTS + 1, 3))
    base_acc[N_JOINTS] = -model.gravity
    out = _rne_batch(model, rot, rows_qd, rows_qdd, base_acc)
    A = out[:N_JOINTS].T
    h = out[N_JOINTS]
    try:
        qdd = np.linalg.solve(A, tau - h)
    except np.linalg.LinAlgError as exc:
        raise SingularConfigurationError(
            f"inertia matrix is numerically singular at q={q}") from exc
    return qdd


def _require(cond: bool, path: str, joint: int | None, fld: str, msg: str):
    where = f"{path}: " + (f"joint {joint}: " if joint is not None else "")
    if not cond:
        raise ValueError(f"{where}field '{fld}': {msg}")


def load_robot(path: str) -> RobotModel:
    """Load a robot parameter file (YAML, one block per joint).

    Each joint block needs: alpha_deg, a, d, mass, com (3 numbers),
    inertia (6 numbers, order Ixx Iyy Izz Ixy Iyz Ixz, about the COM) and
    rotor_inertia.  The top level needs a gravity 3-vector; name is
    optional.  Errors name the file, joint index and field.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    _require("joints" in doc, path, None, "joints", "missing")
    _require("gravity" in doc, path, None, "gravity", "missing")
    joints = doc["joints"]
    _require(isinstance(joints, list) and len(joints) == N_JOINTS, path, None,
             "joints", f"need exactly {N_JOINTS} joint blocks")

    gravity = np.asarray(doc["gravity"], dtype=float)
    _require(gravity.shape == (3,) and np.all(np.isfinite(gravity)),
             path, None, "gravity", "must be a finite 3-vector")

    alpha = np.empty(N_JOINTS)
    a = np.empty(N_JOINTS)
    d = np.empty(N_JOINTS)
    mass = np.empty(N_JOINTS)
    com = np.empty((N_JOINTS, 3))
    inertia = np.empty((N_JOINTS, 3, 3))
    rotor = np.empty(N_JOINTS)
    for j, blk in enumerate(joints):
        _require(isinstance(blk, dict), path, j, "joint", "must be a mapping")
        for fld in ("alpha_deg", "a", "d", "mass", "com", "inertia",
                    "rotor_inertia"):
            _require(fld in blk, path, j, fld, "missing")

        def scalar(fld, lo=None):
            try:
                v = float(blk[fld])
            except (TypeError, ValueError):
                raise ValueError(
                    f"{path}: joint {j}: field '{fld}': not a number") from None
            _require(math.isfinite(v), path, j, fld, "not finite")
            if lo is not None:
                _require(v >= lo, path, j, fld, f"must be >= {lo}")
            return v

        alpha[j] = math.radians(scalar("alpha_deg"))
        a[j] = scalar("a")
        d[j] = scalar("d")
        # the canonical published parameter set carries a zero mass for the
        # first link, so only nonnegativity is enforced here
        mass[j] = scalar("mass", lo=0.0)
        rotor[j] = scalar("rotor_inertia", lo=0.0)

        cv = np.asarray(blk["com"], dtype=float)
        _require(cv.shape == (3,) and np.all(np.isfinite(cv)), path, j, "com",
                 "must be a finite 3-vector")
        com[j] = cv
        iv = np.asarray(blk["inertia"], dtype=float)
        _require(iv.shape == (6,) and np.all(np.isfinite(iv)), path, j,
                 "inertia", "must be 6 finite numbers (Ixx Iyy Izz Ixy Iyz Ixz)")
        ixx, iyy, izz, ixy, iyz, ixz = iv
        tensor = np.array([[ixx, ixy, ixz],
                           [ixy, iyy, iyz],
                           [ixz, iyz, izz]])
        eigvals = np.linalg.eigvalsh(tensor)
        _require(eigvals.min() >= -1e-12, path, j, "inertia",
                 "tensor must be positive semidefinite")
        inertia[j] = tensor

    return RobotModel(name=str(doc.get("name", "robot")), alpha=alpha, a=a,
                      d=d, mass=mass, com=com, inertia=inertia,
                      rotor_inertia=rotor, gravity=gravity)


def default_robot() -> RobotModel:
    """The packaged PUMA 560 parameter set."""
    from importlib.resources import files

    return load_robot(str(files("armtune").joinpath("data/puma560.yaml")))
