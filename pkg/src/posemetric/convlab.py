"""Gradient-descent convergence lab for the three pose losses.

Each loss head is fitted directly to a single synthetic target pose by plain
gradient descent from the identity, with no network in between. Progress is
measured the same way for every head: geodesic rotation error and Euclidean
translation error of the current estimate against the target.
"""
import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from . import rotations as rot
from .errors import DivergedLoss, NearPiEstimate
from .losses import LOSSES, PoseBatch, grad_fd, grad_se3_analytic
from .metrics import dist_geodesic
from .poses import Transform

log = logging.getLogger(__name__)

KINDS = ("original", "quat", "se3")
DIVERGENCE_LIMIT = 1e6
TRACE_COLUMNS = ("kind", "trial", "step", "loss", "rot_err_rad", "trans_err_m")


@dataclass(frozen=True)
class LabConfig:
    trials: int = 100
    steps: int = 2000
    lr: float = 0.01
    seed: int = 0
    angle_range: tuple = (0.0, np.pi)
    trans_range: float = 1.0
    tolerance: float = 0.01
    # unit weights: the raw, unweighted losses; the network-training constants
    # (100, 14, 153) make lr = 0.01 unstable for plain descent
    weights: tuple = (1.0, 1.0, 1.0)
    fd_step: float = 1e-5

    def __post_init__(self):
        lo, hi = self.angle_range
        if self.trials < 1 or self.steps < 1:
            raise ValueError("trials and steps must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not 0 <= lo <= hi <= np.pi:
            raise ValueError(f"angle_range must satisfy 0 <= low <= high <= pi, got {self.angle_range}")
        if self.trans_range < 0 or self.tolerance <= 0:
            raise ValueError("trans_range must be >= 0 and tolerance > 0")
        if len(self.weights) != 3 or min(self.weights) <= 0:
            raise ValueError("weights must be three positive numbers")

    def weight(self, kind):
        return self.weights[KINDS.index(kind)]


@dataclass
class FitTrace:
    loss_kind: str
    steps: list = field(default_factory=list)
    loss: list = field(default_factory=list)
    rot_err: list = field(default_factory=list)
    trans_err: list = field(default_factory=list)
    converged: bool = False
    steps_to_tolerance: int = None
    diverged: bool = False
    error: str = None
    final_params: np.ndarray = None

    def record(self, step, loss, rot_err, trans_err):
        self.steps.append(step)
        self.loss.append(loss)
        self.rot_err.append(rot_err)
        self.trans_err.append(trans_err)

    def __len__(self):
        return len(self.steps)

    def rows(self, trial=0):
        for s, l, r, t in zip(self.steps, self.loss, self.rot_err, self.trans_err):
            yield (self.loss_kind, trial, s, l, r, t)


def sample_target(seed, angle_range=(0.0, np.pi), trans_range=1.0):
    """Random axis with angle uniform in ``angle_range``, translation uniform in a cube."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(*angle_range)
    t = rng.uniform(-trans_range, trans_range, 3)
    return Transform(rot.exp_so3(angle * axis), t)


def initial_params(kind):
    x = np.zeros(7 if kind == "quat" else 6)
    if kind == "quat":
        x[3] = 1.0
    return x


def _rotation_of(kind, x):
    if kind == "original":
        return rot.euler_to_matrix(x[3:6])
    if kind == "quat":
        return rot.quat_to_matrix(rot.normalize_quat(x[3:7]))
    if kind == "se3":
        return rot.exp_so3(x[3:6])
    raise ValueError(f"unknown loss kind {kind!r}")


def params_to_transform(kind, x):
    """Transform encoded by one head's raw parameter vector."""
    x = np.asarray(x, dtype=float)
    return Transform(_rotation_of(kind, x), x[:3])


def _errors(kind, x, target):
    R = _rotation_of(kind, x)
    return float(dist_geodesic(target.R, R)), float(np.linalg.norm(x[:3] - target.t))


def fit(kind, target, config):
    """Fit one head to ``target`` by gradient descent from the identity.

    Stops after ``config.steps`` updates, as soon as the geodesic error drops
    below ``config.tolerance``, or when the loss exceeds 1e6 (recorded as a
    divergence on the trace rather than raised).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown loss kind {kind!r}")
    k = config.weight(kind)
    loss_fn = LOSSES[kind]

    def loss(b):
        return loss_fn(b, k)

    x = initial_params(kind)
    batch = PoseBatch(target.R[None, None], target.t[None, None], x[None, None])
    trace = FitTrace(kind)
    for step in range(config.steps + 1):
        value = loss(batch)
        rot_err, trans_err = _errors(kind, x, target)
        trace.record(step, value, rot_err, trans_err)
        if not np.isfinite(value) or value > DIVERGENCE_LIMIT:
            trace.diverged = True
            trace.error = str(DivergedLoss(f"loss {value!r} at step {step}"))
            log.info("%s fit diverged at step %d", kind, step)
            break
        if rot_err < config.tolerance:
            trace.converged = True
            trace.steps_to_tolerance = step
            break
        if step == config.steps:
            break
        x = x - config.lr * _gradient(kind, loss, batch, k, config.fd_step)[0, 0]
        batch = batch.with_estimates(x[None, None])
    trace.final_params = x
    return trace


def _gradient(kind, loss, batch, k, h):
    if kind == "se3":
        try:
            return grad_se3_analytic(batch, k)
        except NearPiEstimate:
            pass
    return grad_fd(loss, batch, h)


def trial_seed(seed, trial):
    """Independent RNG stream per (seed, trial) pair."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def _median_curve(traces, attr, length):
    # traces that stopped early hold their last value
    cols = []
    for tr in traces:
        vals = getattr(tr, attr)
        cols.append(vals + [vals[-1]] * (length - len(vals)))
    return np.median(np.array(cols), axis=0)


def compare(config, return_traces=False):
    """Run every trial target through all three heads (paired comparison).

    Returns a table with one row per loss kind: success rate, median steps to
    tolerance (over successful trials) and per-step median curves.
    """
    targets = [sample_target(trial_seed(config.seed, i), config.angle_range, config.trans_range)
               for i in range(config.trials)]
    traces = {kind: [fit(kind, T, config) for T in targets] for kind in KINDS}
    rows = []
    for kind in KINDS:
        trs = traces[kind]
        hits = [t.steps_to_tolerance for t in trs if t.converged]
        length = max(len(t) for t in trs)
        rows.append({
            "kind": kind,
            "trials": len(trs),
            "success_rate": len(hits) / len(trs),
            "median_steps_to_tolerance": float(np.median(hits)) if hits else None,
            "diverged": sum(t.diverged for t in trs),
            "median_final_rot_err_rad": float(np.median([t.rot_err[-1] for t in trs])),
            "median_final_trans_err_m": float(np.median([t.trans_err[-1] for t in trs])),
            "curves": {
                "loss": _median_curve(trs, "loss", length).tolist(),
                "rot_err_rad": _median_curve(trs, "rot_err", length).tolist(),
                "trans_err_m": _median_curve(trs, "trans_err", length).tolist(),
            },
        })
    table = {
        "config": {
            "trials": config.trials, "steps": config.steps, "lr": config.lr,
            "seed": config.seed, "angle_range": list(config.angle_range),
            "trans_range": config.trans_range, "tolerance": config.tolerance,
            "weights": list(config.weights),
        },
        "rows": rows,
    }
    if return_traces:
        return table, traces
    return table


def write_traces_csv(fh, traces):
    """Write a FitTrace, a list of them, or a ``{kind: [FitTrace]}`` mapping.

    The trial column is the position of the trace within its list.
    """
    if isinstance(traces, FitTrace):
        traces = [traces]
    groups = traces.values() if isinstance(traces, dict) else [traces]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for trial, tr in ((i, t) for group in groups for i, t in enumerate(group)):
        for row in tr.rows(trial):
            w.writerow([row[0], row[1], row[2]] + [f"{v:.17g}" for v in row[3:]])
