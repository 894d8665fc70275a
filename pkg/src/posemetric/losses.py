"""Pose regression losses over batches of (target, estimate) pairs.

Each loss is ``(1/N) * sum_i sum_j [ |t - t_hat|^2 + k * rot_term ]`` where
``i`` runs over N observations and ``j`` over the M steps of each sequence.
Only the N observations are averaged.

Estimates are raw parameter arrays of shape ``(N, M, P)``:

=========  ===  ===================================
loss       P    layout
=========  ===  ===================================
original   6    ``[tx, ty, tz, yaw, pitch, roll]``
quat       7    ``[tx, ty, tz, qw, qx, qy, qz]``
se3        6    ``[tx, ty, tz, wx, wy, wz]``
=========  ===  ===================================

Estimates may carry extra leading dimensions ``(..., N, M, P)``; the losses
then return an array of shape ``...`` (one loss per stacked estimate set),
which :func:`grad_fd` uses to evaluate all perturbations in one call.
"""
from dataclasses import dataclass

import numpy as np

from . import rotations as rot
from .errors import GimbalLock, GimbalLockTarget, NearPiEstimate, PoseError
from .poses import Pose6, Pose7, TangentPose, Transform


@dataclass(frozen=True)
class LossWeights:
    k1: float = 100.0
    k2: float = 14.0
    k3: float = 153.0

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) <= 0:
            raise ValueError(f"loss weights must be positive: {self}")


DEFAULT_WEIGHTS = LossWeights()


class PoseBatch:
    """N x M targets (rotation + translation) with matching raw estimates.

    Target-side conversions (Euler angles, canonical quaternions) are cached
    and shared with batches derived through :meth:`with_estimates`.
    """

    def __init__(self, target_R, target_t, estimates):
        target_R = np.asarray(target_R, dtype=float)
        target_t = np.asarray(target_t, dtype=float)
        estimates = np.asarray(estimates, dtype=float)
        if target_R.ndim != 4 or target_R.shape[2:] != (3, 3):
            raise PoseError(f"target rotations must be (N, M, 3, 3), got {target_R.shape}")
        nm = target_R.shape[:2]
        if nm[0] < 1 or nm[1] < 1:
            raise PoseError("batch needs N >= 1 and M >= 1")
        if target_t.shape != nm + (3,):
            raise PoseError(f"target translations must be {nm + (3,)}, got {target_t.shape}")
        if estimates.ndim != 3 or estimates.shape[:2] != nm:
            raise PoseError(f"estimates must be {nm} x P, got {estimates.shape}")
        self.target_R = target_R
        self.target_t = target_t
        self.estimates = estimates
        self._cache = {}

    @classmethod
    def from_poses(cls, targets, estimates):
        """Build from nested lists of :class:`Transform` and pose objects."""
        R = np.array([[T.R for T in row] for row in targets])
        t = np.array([[T.t for T in row] for row in targets])
        est = np.array([[p.vector if hasattr(p, "vector") else p for p in row]
                        for row in estimates], dtype=float)
        return cls(R, t, est)

    @property
    def shape(self):
        return self.target_R.shape[:2]

    @property
    def n(self):
        return self.target_R.shape[0]

    def with_estimates(self, estimates):
        b = PoseBatch.__new__(PoseBatch)
        b.target_R, b.target_t = self.target_R, self.target_t
        b.estimates = np.asarray(estimates, dtype=float)
        if b.estimates.ndim < 3 or b.estimates.shape[-3:-1] != self.shape:
            raise PoseError(f"estimates must be {self.shape} x P, got {b.estimates.shape}")
        b._cache = self._cache
        return b

    def target_euler(self):
        if "euler" not in self._cache:
            try:
                e = [rot.matrix_to_euler(R, strict=True) for R in self.target_R.reshape(-1, 3, 3)]
            except GimbalLock as exc:
                raise GimbalLockTarget(f"target has no canonical Euler chart: {exc}") from None
            self._cache["euler"] = np.array(e).reshape(self.shape + (3,))
        return self._cache["euler"]

    def target_quat(self):
        if "quat" not in self._cache:
            q = [rot.matrix_to_quat(R) for R in self.target_R.reshape(-1, 3, 3)]
            self._cache["quat"] = np.array(q).reshape(self.shape + (4,))
        return self._cache["quat"]

    def concat(self, other):
        return PoseBatch(np.concatenate([self.target_R, other.target_R]),
                         np.concatenate([self.target_t, other.target_t]),
                         np.concatenate([self.estimates, other.estimates]))

    def target_transforms(self):
        return [[Transform(R, t) for R, t in zip(Rr, tr)]
                for Rr, tr in zip(self.target_R, self.target_t)]


def _check_width(batch, p, kind):
    if batch.estimates.shape[-1] != p:
        raise PoseError(f"{kind} loss expects {p} parameters per pose, "
                        f"got {batch.estimates.shape[-1]}")


def _translation_sq(batch):
    return np.sum((batch.target_t - batch.estimates[..., :3]) ** 2, axis=-1)


def _mean_over_n(terms, n):
    # numpy pairwise summation over a fixed shape is order-deterministic
    s = np.sum(terms, axis=(-2, -1)) / n
    return float(s) if s.ndim == 0 else s


def loss_original(batch, k1=DEFAULT_WEIGHTS.k1):
    """Translation + Euler-angle squared error."""
    _check_width(batch, 6, "original")
    de = batch.target_euler() - batch.estimates[..., 3:6]
    return _mean_over_n(_translation_sq(batch) + k1 * np.sum(de * de, axis=-1), batch.n)


def loss_quat(batch, k2=DEFAULT_WEIGHTS.k2):
    """Translation + sign-invariant quaternion squared error.

    Target quaternions are canonical (w >= 0); estimates are used raw.
    """
    _check_width(batch, 7, "quat")
    q = batch.target_quat()
    qh = batch.estimates[..., 3:7]
    rq = np.minimum(np.sum((q - qh) ** 2, axis=-1), np.sum((q + qh) ** 2, axis=-1))
    return _mean_over_n(_translation_sq(batch) + k2 * rq, batch.n)


def loss_se3(batch, k3=DEFAULT_WEIGHTS.k3):
    """Translation + squared chordal distance to ``exp_so3(w_hat)``."""
    _check_width(batch, 6, "se3")
    Rh = rot.exp_so3(batch.estimates[..., 3:6])
    dc2 = np.sum((batch.target_R - Rh) ** 2, axis=(-2, -1))
    return _mean_over_n(_translation_sq(batch) + k3 * dc2, batch.n)


LOSSES = {"original": loss_original, "quat": loss_quat, "se3": loss_se3}
PARAM_WIDTH = {"original": 6, "quat": 7, "se3": 6}
POSE_TYPES = {"original": Pose6, "quat": Pose7, "se3": TangentPose}


def grad_fd(loss, batch, h=1e-5):
    """Central finite-difference gradient of ``loss(batch)`` w.r.t. the estimates.

    ``(L(x + h e_k) - L(x - h e_k)) / 2h`` for every scalar parameter. When
    ``loss`` broadcasts over stacked estimates all 2K perturbed batches are
    evaluated in one call, otherwise one coordinate at a time.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    x = batch.estimates
    size = x.size
    steps = np.zeros((2, size) + x.shape)
    flat = steps.reshape(2, size, size)
    np.fill_diagonal(flat[0], h)
    np.fill_diagonal(flat[1], -h)
    try:
        vals = np.asarray(loss(batch.with_estimates(x + steps)))
    except ValueError:
        vals = np.empty(0)
    if vals.shape == (2, size):
        return ((vals[0] - vals[1]) / (2 * h)).reshape(x.shape)

    g = np.empty_like(x)
    xp = x.copy()
    for idx in np.ndindex(x.shape):
        xp[idx] = x[idx] + h
        fp = loss(batch.with_estimates(xp))
        xp[idx] = x[idx] - h
        fm = loss(batch.with_estimates(xp))
        xp[idx] = x[idx]
        g[idx] = (fp - fm) / (2 * h)
    return g


def right_jacobian_so3(w):
    """``J_r(w)`` with ``exp(w + dw) ~= exp(w) exp(J_r(w) dw)``; batched."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    small = theta < rot.EXP_TAYLOR
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    b = np.where(small, 0.5 - t2 / 24 + t2 * t2 / 720, (1 - np.cos(t)) / (t * t))
    c = np.where(small, 1.0 / 6 - t2 / 120 + t2 * t2 / 5040, (t - np.sin(t)) / (t * t * t))
    K = rot.hat(w)
    return np.eye(3) - b[..., None, None] * K + c[..., None, None] * (K @ K)


def grad_se3_analytic(batch, k3=DEFAULT_WEIGHTS.k3):
    """Exact gradient of :func:`loss_se3` w.r.t. ``(t_hat, w_hat)``.

    With ``M = R^T exp(w_hat)`` the chordal term is ``6 - 2 tr(M)``; a right
    perturbation ``exp(w_hat) exp(J_r dw)`` changes it by
    ``2 vee(M - M^T) . J_r dw``.
    """
    _check_width(batch, 6, "se3")
    w = batch.estimates[..., 3:6]
    norms = np.linalg.norm(w, axis=-1)
    if np.any(norms >= np.pi - 1e-3):
        raise NearPiEstimate(f"estimate rotation angle {norms.max()!r} is within 1e-3 of pi")
    n = batch.n
    g = np.empty_like(batch.estimates)
    g[..., :3] = -2.0 * (batch.target_t - batch.estimates[..., :3]) / n
    M = np.swapaxes(batch.target_R, -1, -2) @ rot.exp_so3(w)
    v = rot._vee_antisym(M)
    Jr = right_jacobian_so3(w)
    g[..., 3:6] = (2.0 * k3 / n) * np.einsum("...ji,...j->...i", Jr, v)
    return g
