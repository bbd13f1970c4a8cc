import numpy as np
import pytest

from armtune import GainSet, TrajectorySpec, default_robot

BOUNDARY_Q_INITIAL_DEG = (-20.0, 60.0, -120.0, 0.0, -30.0, 0.0)
BOUNDARY_Q_FINAL_DEG = (20.0, -60.0, -60.0, 0.0, 30.0, 0.0)
TABLE_KP = (700.0, 1100.0, 400.0, 40.0, 30.0, 40.0)
TABLE_KD = (20.0, 20.0, 20.0, 5.0, 5.0, 5.0)


@pytest.fixture(scope="session")
def model():
    return default_robot()


@pytest.fixture(scope="session")
def boundary_spec():
    """The reference rest-to-rest motion between the two boundary poses."""
    return TrajectorySpec(np.deg2rad(BOUNDARY_Q_INITIAL_DEG),
                          np.deg2rad(BOUNDARY_Q_FINAL_DEG), 1.0)


@pytest.fixture(scope="session")
def table_gains():
    """The empirical PD gain table used by the reference experiment."""
    return GainSet(np.array(TABLE_KP), np.array(TABLE_KD))


def dh_com_positions(model, q):
    """Forward kinematics for link centres of mass, written independently
    of the dynamics module (plain 4x4 DH transforms)."""
    T = np.eye(4)
    out = []
    for i in range(6):
        ct, st = np.cos(q[i]), np.sin(q[i])
        ca, sa = np.cos(model.alpha[i]), np.sin(model.alpha[i])
        A = np.array([[ct, -st * ca,  st * sa, model.a[i] * ct],
                      [st,  ct * ca, -ct * sa, model.a[i] * st],
                      [0.0,      sa,       ca, model.d[i]],
                      [0.0,     0.0,      0.0, 1.0]])
        T = T @ A
        out.append(T[:3, :3] @ model.com[i] + T[:3, 3])
    return out
