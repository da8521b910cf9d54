import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from exokin.gait import load_gait
from exokin.tree import SIDES, build_default_exoskeleton


@pytest.fixture(scope="session")
def tree():
    return build_default_exoskeleton()


@pytest.fixture(scope="session")
def traj():
    return load_gait()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_transform(rng):
    from exokin.transforms import Transform

    return Transform(Rotation.random(random_state=rng).as_matrix(), rng.normal(size=3))


def homogeneous(rotation, translation):
    m = np.eye(4)
    m[:3, :3] = rotation
    m[:3, 3] = translation
    return m


def oracle_local_matrix(axis, offset, q):
    """4x4 joint transform with the attitude block from scipy's rotation vector."""
    return homogeneous(Rotation.from_rotvec(np.asarray(axis) * q).as_matrix(), offset)


def oracle_chain(tree, side, q6):
    """Explicit 4x4 chain product: world->joint frames and world->foot."""
    m = tree.base_pose.as_matrix()
    frames = []
    for spec, q in zip(tree.chain(side), q6):
        m = m @ oracle_local_matrix(spec.axis, spec.offset, q)
        frames.append(m)
    foot = m @ homogeneous(np.eye(3), tree.foot_offset(side))
    return frames, foot


def oracle_fk_batch(tree, Q):
    """Vectorized chain-product oracle for many configurations.

    Returns an (n, 14, 4, 4) array: right joints, left joints, right foot, left foot.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    out = np.empty((n, 14, 4, 4))
    for s, side in enumerate(SIDES):
        m = np.broadcast_to(tree.base_pose.as_matrix(), (n, 4, 4)).copy()
        for k, spec in enumerate(tree.chain(side)):
            local = np.zeros((n, 4, 4))
            local[:, :3, :3] = Rotation.from_rotvec(np.outer(Q[:, 6 * s + k], spec.axis)).as_matrix()
            local[:, :3, 3] = spec.offset
            local[:, 3, 3] = 1.0
            m = m @ local
            out[:, 6 * s + k] = m
        out[:, 12 + s] = m @ homogeneous(np.eye(3), tree.foot_offset(side))
    return out


def series_exp(k_matrix, terms=20):
    """Truncated matrix exponential sum_{k<=terms} K^k / k!."""
    result = np.eye(3)
    power = np.eye(3)
    for k in range(1, terms + 1):
        power = power @ k_matrix
        result = result + power / math.factorial(k)
    return result


def random_in_limit(tree, rng, n=None, side=None, margin=0.0):
    lo, hi = tree.limits(side)
    size = (lo.size,) if n is None else (n, lo.size)
    return rng.uniform(lo + margin, hi - margin, size=size)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one PASS/FAIL line per acceptance criterion for the run summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
