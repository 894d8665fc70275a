"""Rigid transforms and the vector pose parameterizations.

A :class:`Transform` is stored as a rotation matrix plus translation; the
4x4 homogeneous matrix is available through :attr:`Transform.matrix`.

The three parameterized poses correspond to the three regression heads:

* :class:`Pose6`: translation + Euler angles (6 values)
* :class:`Pose7`: translation + raw quaternion (7 values, normalized on use)
* :class:`TangentPose`: translation + exponential coordinates (6 values);
  the rotation is ``exp_so3(w)`` while the translation is taken as is.
"""
from dataclasses import dataclass

import numpy as np

from . import rotations as rot
from .errors import NearPiRotation, PoseError, ZeroQuaternion


def _frozen(a, shape):
    a = np.array(a, dtype=float)
    if a.shape != shape:
        raise PoseError(f"expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise PoseError(f"non-finite values: {a}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Transform:
    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _frozen(rot.check_rotation(self.R), (3, 3)))
        object.__setattr__(self, "t", _frozen(self.t, (3,)))

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T):
        T = np.asarray(T, dtype=float)
        if T.shape == (4, 4) and not np.allclose(T[3], [0, 0, 0, 1]):
            raise PoseError(f"bottom row of homogeneous matrix is {T[3]}")
        return cls(T[:3, :3], T[:3, 3])

    @property
    def matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.t
        return T

    def allclose(self, other, atol=1e-9):
        return (np.allclose(self.R, other.R, rtol=0, atol=atol)
                and np.allclose(self.t, other.t, rtol=0, atol=atol))

    def __repr__(self):
        return f"Transform(R={self.R.tolist()}, t={self.t.tolist()})"


def compose(A, B):
    return Transform(A.R @ B.R, A.R @ B.t + A.t)


def inverse(T):
    return Transform(T.R.T, -T.R.T @ T.t)


def relative(A, B):
    """``inverse(A) @ B``; the pose of B expressed in the frame of A."""
    return Transform(A.R.T @ B.R, A.R.T @ (B.t - A.t))


# ---------------------------------------------------------------------------
# Parameterized poses
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Pose6:
    t: np.ndarray
    euler: np.ndarray
    size = 6

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t, (3,)))
        object.__setattr__(self, "euler", _frozen(self.euler, (3,)))

    @property
    def vector(self):
        return np.concatenate([self.t, self.euler])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:6])


@dataclass(frozen=True, eq=False)
class Pose7:
    t: np.ndarray
    q: np.ndarray
    size = 7

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t, (3,)))
        object.__setattr__(self, "q", _frozen(self.q, (4,)))

    @property
    def vector(self):
        return np.concatenate([self.t, self.q])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:7])


@dataclass(frozen=True, eq=False)
class TangentPose:
    t: np.ndarray
    w: np.ndarray
    size = 6

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t, (3,)))
        object.__setattr__(self, "w", _frozen(self.w, (3,)))

    @property
    def vector(self):
        return np.concatenate([self.t, self.w])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:6])


def pose6_to_transform(p):
    return Transform(rot.euler_to_matrix(p.euler), p.t)


def transform_to_pose6(T, strict=False):
    return Pose6(T.t, rot.matrix_to_euler(T.R, strict=strict))


def pose7_to_transform(p):
    n = np.linalg.norm(p.q)
    if n < 1e-12:
        raise ZeroQuaternion(f"quaternion {p.q} has norm {n:g}")
    return Transform(rot.quat_to_matrix(p.q / n), p.t)


def transform_to_pose7(T):
    return Pose7(T.t, rot.matrix_to_quat(T.R))


def tangent_to_transform(p):
    """Translation passed through, rotation via the so(3) exponential."""
    return Transform(rot.exp_so3(p.w), p.t)


def transform_to_tangent(T):
    return TangentPose(T.t, rot.log_so3(T.R))


# ---------------------------------------------------------------------------
# Full SE(3) exponential, xi = [rho, w]
# ---------------------------------------------------------------------------

def _left_jacobian(w):
    theta = np.linalg.norm(w)
    K = rot.hat(w)
    t2 = theta * theta
    if theta < rot.EXP_TAYLOR:
        b = 0.5 - t2 / 24 + t2 * t2 / 720
        c = 1.0 / 6 - t2 / 120 + t2 * t2 / 5040
    else:
        b = (1 - np.cos(theta)) / t2
        c = (theta - np.sin(theta)) / (t2 * theta)
    return np.eye(3) + b * K + c * (K @ K)


def left_jacobian_so3(w):
    """V matrix: ``exp_se3([rho, w]).t == V(w) @ rho``."""
    return _left_jacobian(np.asarray(w, dtype=float))


def exp_se3(xi):
    xi = np.asarray(xi, dtype=float)
    rho, w = xi[:3], xi[3:]
    return Transform(rot.exp_so3(w), _left_jacobian(w) @ rho)


def log_se3(T):
    theta = float(rot.rotation_angle(T.R))
    if theta > np.pi - 1e-6:
        raise NearPiRotation(f"rotation angle {theta!r} too close to pi")
    w = rot.log_so3(T.R)
    rho = np.linalg.solve(_left_jacobian(w), T.t)
    return np.concatenate([rho, w])
