"""KITTI trajectory I/O and absolute/relative pose error.

Poses are camera-to-world. No alignment or scale correction is applied
before computing APE.
"""
import csv
import logging
from dataclasses import dataclass

import numpy as np

from . import rotations as rot
from .errors import DeltaTooLarge, InvalidRotation, LengthMismatch, ParseError, PoseError
from .poses import Transform

log = logging.getLogger(__name__)

ORTHO_REPAIR_WARN = 1e-6


def nearest_rotation(M):
    """Closest rotation to ``M`` in Frobenius norm (SVD projection)."""
    U, _, Vt = np.linalg.svd(M)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


class Trajectory:
    """Ordered poses held as stacked arrays ``R (n, 3, 3)`` and ``t (n, 3)``."""

    def __init__(self, R, t):
        R = np.asarray(R, dtype=float)
        t = np.asarray(t, dtype=float)
        if R.ndim != 3 or R.shape[1:] != (3, 3) or t.shape != (R.shape[0], 3):
            raise PoseError(f"trajectory arrays have shapes {R.shape} and {t.shape}")
        if len(R):
            defect = np.abs(np.swapaxes(R, 1, 2) @ R - np.eye(3)).max(axis=(1, 2))
            bad = np.flatnonzero((defect > rot.ORTHO_TOL)
                                 | (np.abs(np.linalg.det(R) - 1) > rot.ORTHO_TOL))
            if bad.size:
                raise InvalidRotation(f"pose {bad[0]} is not a rotation")
        self.R = R
        self.t = t

    @classmethod
    def from_transforms(cls, poses):
        poses = list(poses)
        return cls(np.array([p.R for p in poses]).reshape(-1, 3, 3),
                   np.array([p.t for p in poses]).reshape(-1, 3))

    def __len__(self):
        return len(self.R)

    def __getitem__(self, i):
        return Transform(self.R[i], self.t[i])

    @property
    def poses(self):
        return [self[i] for i in range(len(self))]

    def left_multiply(self, T):
        """Apply a fixed world-frame transform ``T`` to every pose."""
        return Trajectory(T.R @ self.R, self.t @ T.R.T + T.t)

    def right_multiply(self, T):
        return Trajectory(self.R @ T.R, self.R @ T.t + self.t)


def parse_kitti_lines(lines):
    Rs, ts = [], []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split()
        if len(fields) != 12:
            raise ParseError(lineno, f"expected 12 values, got {len(fields)}")
        try:
            vals = np.array([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(lineno, f"non-numeric token ({exc})") from None
        if not np.all(np.isfinite(vals)):
            raise ParseError(lineno, "non-finite value")
        P = vals.reshape(3, 4)
        R = P[:, :3]
        if np.linalg.det(R) < 0:
            raise InvalidRotation(f"line {lineno}: rotation block has negative determinant")
        defect = np.max(np.abs(R.T @ R - np.eye(3)))
        if defect > rot.ORTHO_TOL:
            if defect > ORTHO_REPAIR_WARN:
                log.warning("line %d: orthonormality defect %.3g, projecting onto SO(3)",
                            lineno, defect)
            R = nearest_rotation(R)
        Rs.append(R)
        ts.append(P[:, 3])
    return Trajectory(np.array(Rs).reshape(-1, 3, 3), np.array(ts).reshape(-1, 3))


def load_kitti(path):
    with open(path) as fh:
        return parse_kitti_lines(fh)


def kitti_lines(traj):
    for R, t in zip(traj.R, traj.t):
        P = np.hstack([R, t[:, None]])
        yield " ".join(repr(float(v)) for v in P.ravel())


def save_kitti(path, traj):
    with open(path, "w") as fh:
        for line in kitti_lines(traj):
            fh.write(line + "\n")


@dataclass(frozen=True)
class ErrorStats:
    rmse: float
    mean: float
    median: float
    min: float
    max: float
    count: int

    @classmethod
    def from_errors(cls, errors):
        e = np.asarray(errors, dtype=float)
        return cls(rmse=float(np.sqrt(np.mean(e * e))), mean=float(np.mean(e)),
                   median=float(np.median(e)), min=float(np.min(e)),
                   max=float(np.max(e)), count=int(e.size))

    def to_dict(self):
        return {"rmse": self.rmse, "mean": self.mean, "median": self.median,
                "min": self.min, "max": self.max, "count": self.count}


def _check_mode(mode):
    if mode not in ("trans", "rot"):
        raise ValueError(f"mode must be 'trans' or 'rot', got {mode!r}")


def _relative(Ra, ta, Rb, tb):
    # inverse(A) @ B for stacked poses
    RaT = np.swapaxes(Ra, -1, -2)
    return RaT @ Rb, np.einsum("nij,nj->ni", RaT, tb - ta)


def ape_errors(gt, est, mode="trans"):
    _check_mode(mode)
    if len(gt) != len(est):
        raise LengthMismatch(f"trajectory lengths differ: {len(gt)} vs {len(est)}")
    if len(gt) < 1:
        raise LengthMismatch("empty trajectories")
    R, t = _relative(gt.R, gt.t, est.R, est.t)
    if mode == "trans":
        return np.linalg.norm(t, axis=1)
    return rot.rotation_angle(R)


def rpe_errors(gt, est, delta=1, mode="trans"):
    _check_mode(mode)
    if len(gt) != len(est):
        raise LengthMismatch(f"trajectory lengths differ: {len(gt)} vs {len(est)}")
    if delta < 1 or delta >= len(gt):
        raise DeltaTooLarge(f"delta {delta} needs 1 <= delta < {len(gt)}")
    gR, gt_ = _relative(gt.R[:-delta], gt.t[:-delta], gt.R[delta:], gt.t[delta:])
    eR, et = _relative(est.R[:-delta], est.t[:-delta], est.R[delta:], est.t[delta:])
    R, t = _relative(gR, gt_, eR, et)
    if mode == "trans":
        return np.linalg.norm(t, axis=1)
    return rot.rotation_angle(R)


def ape(gt, est, mode="trans"):
    """Absolute pose error: per frame, ``relative(gt_i, est_i)``."""
    return ErrorStats.from_errors(ape_errors(gt, est, mode))


def rpe(gt, est, delta=1, mode="trans"):
    """Relative pose error over frame pairs ``(i, i + delta)``."""
    return ErrorStats.from_errors(rpe_errors(gt, est, delta, mode))


def write_errors_csv(fh, errors):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("index", "error"))
    for i, e in enumerate(errors):
        w.writerow((i, f"{e:.17g}"))
