"""Orientation parameterizations and the so(3) exponential/logarithm.

Representations are plain float arrays:

* Euler angles ``[yaw, pitch, roll]`` (radians), intrinsic Z-Y-X, so that
  ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
* Quaternions ``[w, x, y, z]``, scalar first.
* Rotation matrices, shape ``(3, 3)``.
* Axis vectors (exponential coordinates), shape ``(3,)``; the norm is the
  rotation angle.

Functions that are cheap to vectorize (``hat``, ``exp_so3``,
``rotation_angle``, ``quat_to_matrix``) accept leading batch dimensions.
"""
import warnings

import numpy as np

from .errors import GimbalLock, GimbalLockWarning, NotRotation, NotSkew, ZeroQuaternion

ORTHO_TOL = 1e-9
UNIT_TOL = 1e-9
GIMBAL_TOL = 1e-7
EXP_TAYLOR = 1e-4
LOG_TAYLOR = 1e-6
LOG_PI_BRANCH = 1e-6


def is_rotation(R, tol=ORTHO_TOL):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        return False
    return abs(np.linalg.det(R) - 1.0) <= tol


def check_rotation(R, tol=ORTHO_TOL):
    """Return ``R`` as a float array, raising NotRotation if it is not in SO(3)."""
    R = np.asarray(R, dtype=float)
    if not is_rotation(R, tol):
        raise NotRotation(f"not a rotation matrix within {tol:g}:\n{R}")
    return R


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


# ---------------------------------------------------------------------------
# Euler angles
# ---------------------------------------------------------------------------

def euler_to_matrix(euler):
    """Rotation matrix of ``[yaw, pitch, roll]`` (intrinsic Z-Y-X)."""
    yaw, pitch, roll = np.asarray(euler, dtype=float)
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def _wrap_half_open(a):
    # atan2 may return -pi; canonical range is (-pi, pi]
    return np.pi if a == -np.pi else a


def matrix_to_euler(R, strict=False):
    """Canonical ``[yaw, pitch, roll]`` of a rotation matrix.

    pitch lies in [-pi/2, pi/2] and yaw, roll in (-pi, pi]. At gimbal lock
    (|pitch| within 1e-7 of pi/2) roll is fixed to 0 and yaw carries the free
    angle; a GimbalLockWarning is emitted, or GimbalLock raised if ``strict``.
    """
    R = np.asarray(R, dtype=float)
    pitch = np.arctan2(-R[2, 0], np.hypot(R[0, 0], R[1, 0]))
    if abs(abs(pitch) - np.pi / 2) < GIMBAL_TOL:
        if strict:
            raise GimbalLock(f"pitch {pitch!r} is at gimbal lock")
        warnings.warn("gimbal lock: roll set to 0", GimbalLockWarning, stacklevel=2)
        yaw = np.arctan2(-R[0, 1], R[1, 1])
        roll = 0.0
    else:
        yaw = np.arctan2(R[1, 0], R[0, 0])
        roll = np.arctan2(R[2, 1], R[2, 2])
    return np.array([_wrap_half_open(yaw), pitch, _wrap_half_open(roll)])


def is_gimbal_locked(R):
    R = np.asarray(R, dtype=float)
    pitch = np.arctan2(-R[2, 0], np.hypot(R[0, 0], R[1, 0]))
    return abs(abs(pitch) - np.pi / 2) < GIMBAL_TOL


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------

def normalize_quat(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ZeroQuaternion(f"cannot normalize quaternion {q}")
    return q / n


def canonical_quat(q):
    """Flip ``q`` onto the w >= 0 hemisphere (first nonzero entry positive when w = 0)."""
    q = np.asarray(q, dtype=float)
    nz = np.flatnonzero(q)
    if nz.size and q[nz[0]] < 0:
        return -q
    return q


def check_unit_quat(q, tol=UNIT_TOL):
    q = np.asarray(q, dtype=float)
    if q.shape != (4,) or abs(q @ q - 1.0) > tol:
        raise NotRotation(f"not a unit quaternion within {tol:g}: {q}")
    return q


def quat_to_matrix(q):
    """Rotation matrix of a unit quaternion ``[w, x, y, z]`` (batched)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    R = np.empty(q.shape[:-1] + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - w * z)
    R[..., 0, 2] = 2 * (x * z + w * y)
    R[..., 1, 0] = 2 * (x * y + w * z)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - w * x)
    R[..., 2, 0] = 2 * (x * z - w * y)
    R[..., 2, 1] = 2 * (y * z + w * x)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def matrix_to_quat(R):
    """Canonical (w >= 0) unit quaternion of ``R``, Shepperd branch selection."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    k = int(np.argmax([tr, R[0, 0], R[1, 1], R[2, 2]]))
    if k == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = [s / 4, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif k == 1:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, s / 4, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif k == 2:
        s = 2.0 * np.sqrt(1.0 - R[0, 0] + R[1, 1] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, s / 4, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 - R[0, 0] - R[1, 1] + R[2, 2])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, s / 4]
    return canonical_quat(normalize_quat(q))


# ---------------------------------------------------------------------------
# so(3)
# ---------------------------------------------------------------------------

def hat(w):
    """Skew-symmetric matrix of ``w`` so that ``hat(w) @ v == cross(w, v)``."""
    w = np.asarray(w, dtype=float)
    x, y, z = np.moveaxis(w, -1, 0)
    S = np.zeros(w.shape[:-1] + (3, 3))
    S[..., 0, 1] = -z
    S[..., 0, 2] = y
    S[..., 1, 0] = z
    S[..., 1, 2] = -x
    S[..., 2, 0] = -y
    S[..., 2, 1] = x
    return S


def vee(S, tol=1e-9):
    S = np.asarray(S, dtype=float)
    if np.max(np.abs(S + S.T)) > tol:
        raise NotSkew(f"matrix is not skew-symmetric within {tol:g}:\n{S}")
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def _vee_antisym(M):
    # vee(M - M^T) without the skew check; batched
    return np.stack([M[..., 2, 1] - M[..., 1, 2],
                     M[..., 0, 2] - M[..., 2, 0],
                     M[..., 1, 0] - M[..., 0, 1]], axis=-1)


def _sinc_coeffs(theta):
    """(sin t / t, (1 - cos t) / t^2) with a Taylor branch for small t."""
    theta = np.asarray(theta, dtype=float)
    small = theta < EXP_TAYLOR
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1 - t2 / 6 + t2 * t2 / 120, np.sin(t) / t)
    b = np.where(small, 0.5 - t2 / 24 + t2 * t2 / 720, (1 - np.cos(t)) / (t * t))
    return a, b


def exp_so3(w):
    """Rodrigues formula; accepts ``(..., 3)`` and returns ``(..., 3, 3)``."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    a, b = _sinc_coeffs(theta)
    K = hat(w)
    return np.eye(3) + a[..., None, None] * K + b[..., None, None] * (K @ K)


def rotation_angle(R):
    """Rotation angle in [0, pi] of ``(..., 3, 3)`` rotation matrices.

    Uses atan2 of the antisymmetric and trace parts, which keeps full
    precision at both ends of the range where arccos of the trace does not.
    """
    R = np.asarray(R, dtype=float)
    c = (np.trace(R, axis1=-2, axis2=-1) - 1.0) / 2.0
    s = np.linalg.norm(_vee_antisym(R), axis=-1) / 2.0
    return np.arctan2(s, np.clip(c, -1.0, 1.0))


def log_so3(R):
    """Exponential coordinates of ``R`` with norm in [0, pi]."""
    R = np.asarray(R, dtype=float)
    theta = float(rotation_angle(R))
    v = _vee_antisym(R)
    if theta < LOG_TAYLOR:
        # theta / (2 sin theta) ~ 1/2 + theta^2 / 12
        return (0.5 + theta * theta / 12.0) * v
    if np.pi - theta < LOG_PI_BRANCH:
        return theta * _axis_near_pi(R, theta, v)
    return theta / (2.0 * np.sin(theta)) * v


def _axis_near_pi(R, theta, v):
    # symmetric part: (R + R^T)/2 = cos(t) I + (1 - cos(t)) a a^T
    c = np.cos(theta)
    A = ((R + R.T) / 2.0 - c * np.eye(3)) / (1.0 - c)
    k = int(np.argmax(np.diag(A)))
    axis = A[:, k] / np.sqrt(max(A[k, k], 1e-300))
    axis /= np.linalg.norm(axis)
    s = axis @ v
    if abs(s) > 1e-12:
        return axis if s > 0 else -axis
    nz = np.flatnonzero(np.abs(axis) > 1e-12)
    if nz.size and axis[nz[0]] < 0:
        axis = -axis
    return axis


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def random_quats(n, rng):
    """``n`` uniformly distributed canonical unit quaternions."""
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    q[q[:, 0] < 0] *= -1
    return q


def random_rotations(n, rng):
    return quat_to_matrix(random_quats(n, rng))


def random_rotation(seed):
    """Uniform random rotation, deterministic in ``seed``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return random_rotations(1, rng)[0]
