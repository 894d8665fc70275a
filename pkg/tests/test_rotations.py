import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import expm

from posemetric import rotations as rot
from posemetric.errors import GimbalLock, GimbalLockWarning, NotRotation, NotSkew, ZeroQuaternion

from conftest import Rx, Ry, Rz

RZ90 = np.array([[0.0, -1, 0], [1, 0, 0], [0, 0, 1]])
S2 = np.sqrt(2) / 2

finite = st.floats(-10, 10, allow_nan=False)
vec3 = arrays(float, 3, elements=finite)
quat4 = arrays(float, 4, elements=st.floats(-1, 1)).filter(lambda q: np.linalg.norm(q) > 1e-3)


def hamilton(p, q):
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array([pw * qw - px * qx - py * qy - pz * qz,
                     pw * qx + px * qw + py * qz - pz * qy,
                     pw * qy - px * qz + py * qw + pz * qx,
                     pw * qz + px * qy - py * qx + pz * qw])


def rotate_by_quat(q, v):
    conj = q * np.array([1, -1, -1, -1])
    return hamilton(hamilton(q, np.concatenate([[0.0], v])), conj)[1:]


# --- euler -------------------------------------------------------------------

def test_euler_identity():
    np.testing.assert_array_equal(rot.euler_to_matrix([0, 0, 0]), np.eye(3))


def test_euler_yaw_quarter_turn():
    np.testing.assert_allclose(rot.euler_to_matrix([np.pi / 2, 0, 0]), RZ90, atol=1e-15)


@given(vec3)
def test_euler_matches_product_oracle(e):
    np.testing.assert_allclose(rot.euler_to_matrix(e), Rz(e[0]) @ Ry(e[1]) @ Rx(e[2]), atol=1e-12)


def test_gimbal_family_same_matrix():
    A = rot.euler_to_matrix([0.3, np.pi / 2, 0.1])
    B = rot.euler_to_matrix([0.4, np.pi / 2, 0.2])
    np.testing.assert_allclose(A, B, atol=1e-12)
    np.testing.assert_allclose(A, Rz(0.3) @ Ry(np.pi / 2) @ Rx(0.1), atol=1e-12)


def test_matrix_to_euler_examples():
    np.testing.assert_array_equal(rot.matrix_to_euler(np.eye(3)), [0, 0, 0])
    np.testing.assert_allclose(rot.matrix_to_euler(RZ90), [np.pi / 2, 0, 0], atol=1e-15)


def test_matrix_to_euler_gimbal_branch():
    R = rot.euler_to_matrix([0.3, np.pi / 2, 0.1])
    with pytest.warns(GimbalLockWarning):
        e = rot.matrix_to_euler(R)
    assert e[2] == 0.0
    assert e[1] == pytest.approx(np.pi / 2, abs=1e-7)
    np.testing.assert_allclose(rot.euler_to_matrix(e), R, atol=1e-9)
    with pytest.raises(GimbalLock):
        rot.matrix_to_euler(R, strict=True)


def test_matrix_to_euler_negative_gimbal():
    R = rot.euler_to_matrix([0.3, -np.pi / 2, 0.1])
    with pytest.warns(GimbalLockWarning):
        e = rot.matrix_to_euler(R)
    np.testing.assert_allclose(rot.euler_to_matrix(e), R, atol=1e-9)


@given(vec3)
def test_matrix_to_euler_canonical_ranges(e):
    R = rot.euler_to_matrix(e)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GimbalLockWarning)
        yaw, pitch, roll = out = rot.matrix_to_euler(R)
    assert -np.pi / 2 <= pitch <= np.pi / 2
    assert -np.pi < yaw <= np.pi and -np.pi < roll <= np.pi
    np.testing.assert_allclose(rot.euler_to_matrix(out), R, atol=1e-9)


def test_yaw_pi_maps_to_half_open_range():
    assert rot.matrix_to_euler(rot.euler_to_matrix([np.pi, 0, 0]))[0] == pytest.approx(np.pi)
    assert rot.matrix_to_euler(rot.euler_to_matrix([-np.pi, 0, 0]))[0] > 0


# --- quaternions ---------------------------------------------------------------

def test_quat_examples():
    np.testing.assert_array_equal(rot.quat_to_matrix([1, 0, 0, 0]), np.eye(3))
    np.testing.assert_allclose(rot.quat_to_matrix([S2, 0, 0, S2]), RZ90, atol=1e-15)


@given(quat4)
def test_quat_to_matrix_matches_hamilton_oracle(q):
    q = q / np.linalg.norm(q)
    R = rot.quat_to_matrix(q)
    for k in range(3):
        np.testing.assert_allclose(R[:, k], rotate_by_quat(q, np.eye(3)[k]), atol=1e-12)


@given(quat4)
def test_double_cover_exact(q):
    q = q / np.linalg.norm(q)
    np.testing.assert_array_equal(rot.quat_to_matrix(q), rot.quat_to_matrix(-q))


def test_matrix_to_quat_examples():
    np.testing.assert_allclose(rot.matrix_to_quat(np.eye(3)), [1, 0, 0, 0])
    np.testing.assert_allclose(rot.matrix_to_quat(RZ90), [S2, 0, 0, S2], atol=1e-15)
    q = rot.matrix_to_quat(Rx(np.pi))
    np.testing.assert_allclose(q, [0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(rot.quat_to_matrix(q), Rx(np.pi), atol=1e-12)


@pytest.mark.parametrize("axis", [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, -2, 3]])
def test_matrix_to_quat_near_half_turn(axis):
    a = np.array(axis, float) / np.linalg.norm(axis)
    for theta in (np.pi, np.pi - 1e-9, np.pi - 1e-4):
        R = expm(rot.hat(theta * a))
        q = rot.matrix_to_quat(R)
        assert q[0] >= 0
        assert abs(np.linalg.norm(q) - 1) < 1e-12
        np.testing.assert_allclose(rot.quat_to_matrix(q), R, atol=1e-9)


def test_normalize_zero_quat():
    with pytest.raises(ZeroQuaternion):
        rot.normalize_quat([0, 0, 0, 0])


def test_check_unit_quat():
    rot.check_unit_quat([1, 0, 0, 0])
    with pytest.raises(NotRotation):
        rot.check_unit_quat([2, 0, 0, 0])


# --- hat / vee -----------------------------------------------------------------

def test_hat_examples():
    np.testing.assert_array_equal(rot.hat([0, 0, 0]), np.zeros((3, 3)))
    np.testing.assert_array_equal(rot.hat([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])
    np.testing.assert_array_equal(rot.vee(rot.hat([0.1, -0.2, 0.3])), [0.1, -0.2, 0.3])


@given(vec3, vec3)
def test_hat_is_cross_product(w, v):
    S = rot.hat(w)
    np.testing.assert_array_equal(S, -S.T)
    np.testing.assert_allclose(S @ v, np.cross(w, v), atol=1e-12)
    np.testing.assert_array_equal(rot.vee(S), w)


def test_vee_rejects_asymmetric():
    with pytest.raises(NotSkew):
        rot.vee(np.eye(3))


# --- exp / log -----------------------------------------------------------------

def test_exp_examples():
    np.testing.assert_array_equal(rot.exp_so3([0, 0, 0]), np.eye(3))
    np.testing.assert_allclose(rot.exp_so3([0, 0, np.pi / 2]), RZ90, atol=1e-15)
    np.testing.assert_allclose(rot.exp_so3([0, 0, 2 * np.pi]), np.eye(3), atol=1e-9)


@given(arrays(float, 3, elements=st.floats(-4, 4)))
def test_exp_matches_expm_oracle(w):
    np.testing.assert_allclose(rot.exp_so3(w), expm(rot.hat(w)), atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 1e-12, 1e-8, 5e-5, 9.99e-5, 1e-4, 1.01e-4, 1e-3])
def test_exp_taylor_branch_accuracy(theta):
    w = theta * np.array([0.6, -0.8, 0.0])
    np.testing.assert_allclose(rot.exp_so3(w), expm(rot.hat(w)), atol=1e-15)


def test_exp_batched(rng):
    w = rng.normal(size=(4, 5, 3))
    R = rot.exp_so3(w)
    assert R.shape == (4, 5, 3, 3)
    np.testing.assert_allclose(R[2, 3], rot.exp_so3(w[2, 3]), atol=0)


def test_log_examples():
    np.testing.assert_array_equal(rot.log_so3(np.eye(3)), [0, 0, 0])
    np.testing.assert_allclose(rot.log_so3(RZ90), [0, 0, np.pi / 2], atol=1e-15)
    w = rot.log_so3(Rx(np.pi))
    np.testing.assert_allclose(np.abs(w), [np.pi, 0, 0], atol=1e-12)
    np.testing.assert_allclose(rot.exp_so3(w), Rx(np.pi), atol=1e-7)


def test_log_exact_half_turn_sign_convention():
    # exactly antisymmetric-free matrix: first nonzero axis component positive
    R = np.diag([-1.0, 1.0, -1.0])
    np.testing.assert_allclose(rot.log_so3(R), [0, np.pi, 0], atol=1e-15)
    R = 2 * np.outer([0, -0.6, 0.8], [0, -0.6, 0.8]) - np.eye(3)
    w = rot.log_so3(R)
    np.testing.assert_allclose(w, np.pi * np.array([0, 0.6, -0.8]), atol=1e-12)


def test_log_inverse_of_exp_full_range(rng):
    axes = rng.normal(size=(10_000, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    thetas = rng.uniform(0, np.pi - 1e-3, 10_000)
    for a, th in zip(axes, thetas):
        w = th * a
        assert np.linalg.norm(rot.log_so3(rot.exp_so3(w)) - w) < 1e-9


def test_log_norm_at_most_pi(rng):
    for R in rot.random_rotations(2000, rng):
        w = rot.log_so3(R)
        assert np.linalg.norm(w) <= np.pi
        np.testing.assert_allclose(rot.exp_so3(w), R, atol=1e-7)


def test_rotation_angle_precision_near_zero():
    for theta in (1e-12, 1e-10, 1e-8):
        R = rot.exp_so3([theta, 0, 0])
        assert rot.rotation_angle(R) == pytest.approx(theta, rel=1e-6)


# --- sampling & invariants -------------------------------------------------------

def test_random_rotation_valid_and_deterministic():
    for seed in range(50):
        R = rot.random_rotation(seed)
        assert rot.is_rotation(R)
    np.testing.assert_array_equal(rot.random_rotation(7), rot.random_rotation(7))
    assert not np.array_equal(rot.random_rotation(7), rot.random_rotation(8))


def test_random_rotation_mean_trace():
    # uniform on SO(3): theta density (1 - cos t) / pi gives E[tr R] = 0
    Rs = rot.random_rotations(10_000, np.random.default_rng(3))
    assert abs(np.trace(Rs, axis1=1, axis2=2).mean()) < 0.1


def test_roundtrips_on_random_rotations():
    Rs = rot.random_rotations(10_000, np.random.default_rng(4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GimbalLockWarning)
        for R in Rs:
            np.testing.assert_allclose(rot.quat_to_matrix(rot.matrix_to_quat(R)), R, atol=1e-7)
            np.testing.assert_allclose(rot.euler_to_matrix(rot.matrix_to_euler(R)), R, atol=1e-7)
            np.testing.assert_allclose(rot.exp_so3(rot.log_so3(R)), R, atol=1e-7)


@settings(max_examples=200)
@given(vec3, quat4)
def test_outputs_are_rotations(e, q):
    q = q / np.linalg.norm(q)
    for R in (rot.euler_to_matrix(e), rot.quat_to_matrix(q), rot.exp_so3(e)):
        assert rot.is_rotation(R, 1e-9)


def test_check_rotation_rejects_reflection():
    with pytest.raises(NotRotation):
        rot.check_rotation(np.diag([1.0, 1.0, -1.0]))
