"""Distances on orientations and rigid transforms, plus an axiom probe.

All distances return plain (unsquared) norms. Rotation-matrix distances
broadcast over leading batch dimensions.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from . import rotations as rot
from .poses import Transform

AXIOMS = ("non_negativity", "identity", "symmetry", "triangle_inequality")


def dist_euler(a, b):
    """L2 distance of raw Euler triplets; no angle wrapping."""
    return np.linalg.norm(np.asarray(a, float) - np.asarray(b, float), axis=-1)


def dist_quat(a, b):
    """``min(|a - b|, |a + b|)`` on raw 4-vectors."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def dist_geodesic(A, B):
    """Angle of the relative rotation ``A^T B``, in [0, pi]."""
    A = np.asarray(A, float)
    return rot.rotation_angle(np.swapaxes(A, -1, -2) @ np.asarray(B, float))


def dist_geodesic_arccos(A, B):
    """Trace form of the geodesic distance, arccos argument clamped to [-1, 1].

    Loses precision near 0 and pi; kept as an independent cross-check of
    :func:`dist_geodesic`.
    """
    M = np.swapaxes(np.asarray(A, float), -1, -2) @ np.asarray(B, float)
    c = (np.trace(M, axis1=-2, axis2=-1) - 1.0) / 2.0
    return np.abs(np.arccos(np.clip(c, -1.0, 1.0)))


def dist_chordal_so3(A, B):
    """Frobenius norm ``|A - B|_F``, in [0, 2 sqrt 2]."""
    return np.linalg.norm(np.asarray(A, float) - np.asarray(B, float), axis=(-2, -1))


def chordal_so3_product_form(A, B):
    """``|A B^T - I|_F``; equal to :func:`dist_chordal_so3` for rotations."""
    M = np.asarray(A, float) @ np.swapaxes(np.asarray(B, float), -1, -2)
    return np.linalg.norm(M - np.eye(3), axis=(-2, -1))


def dist_chordal_se3(A, B):
    """Frobenius norm of the difference of the homogeneous matrices."""
    return float(np.linalg.norm(A.matrix - B.matrix))


def chordal_se3_cross_form(A, B):
    """``sqrt(d_c(R_A, R_B)^2 + |t_B - R_B t_A|^2)``.

    This alternative closed form does not equal :func:`dist_chordal_se3` in
    general (the Frobenius expansion gives ``|t_A - t_B|``); it is exposed so
    the gap can be measured.
    """
    dr = dist_chordal_so3(A.R, B.R)
    return float(np.sqrt(dr * dr + np.sum((B.t - B.R @ A.t) ** 2)))


# ---------------------------------------------------------------------------
# Equivalence predicates for the identity axiom
# ---------------------------------------------------------------------------

def _as_array(x):
    return x.matrix if isinstance(x, Transform) else np.asarray(x, float)


def same_representation(a, b, tol=1e-9):
    return bool(np.max(np.abs(_as_array(a) - _as_array(b))) <= tol)


def same_rotation_euler(a, b, tol=1e-9):
    return bool(dist_geodesic(rot.euler_to_matrix(a), rot.euler_to_matrix(b)) < tol)


def same_rotation_quat(a, b, tol=1e-9):
    Ra = rot.quat_to_matrix(rot.normalize_quat(a))
    Rb = rot.quat_to_matrix(rot.normalize_quat(b))
    return bool(dist_geodesic(Ra, Rb) < tol)


# ---------------------------------------------------------------------------
# Samplers: callables rng -> (A, B, C)
# ---------------------------------------------------------------------------

def rotation_triples(rng, repeat_prob=0.1):
    """Three uniform rotations; with ``repeat_prob`` B is a copy of A."""
    A, B, C = rot.random_rotations(3, rng)
    if rng.random() < repeat_prob:
        B = A.copy()
    return A, B, C


def transform_triples(rng, trans_scale=2.0, repeat_prob=0.1):
    Rs = rot.random_rotations(3, rng)
    ts = rng.uniform(-trans_scale, trans_scale, (3, 3))
    A, B, C = (Transform(R, t) for R, t in zip(Rs, ts))
    if rng.random() < repeat_prob:
        B = A
    return A, B, C


def quaternion_triples(rng, antipode_prob=0.25):
    """Unit quaternions; with ``antipode_prob`` B is the antipode -A."""
    A, B, C = rng.standard_normal((3, 4))
    A, B, C = (q / np.linalg.norm(q) for q in (A, B, C))
    if rng.random() < antipode_prob:
        B = -A
    return A, B, C


def euler_triples(rng, gimbal_prob=0.25):
    """Euler triplets; with ``gimbal_prob`` A and B are distinct triplets at
    pitch = +-pi/2 that encode the same rotation (yaw - roll, resp. yaw + roll,
    held fixed)."""
    A, B, C = rng.uniform(-np.pi, np.pi, (3, 3))
    A[1], B[1], C[1] = rng.uniform(-np.pi / 2, np.pi / 2, 3)
    if rng.random() < gimbal_prob:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        yaw, roll, shift = rng.uniform(-1.0, 1.0, 3)
        A = np.array([yaw, sign * np.pi / 2, roll])
        # at pitch = +pi/2 only yaw - roll matters, at -pi/2 only yaw + roll
        B = np.array([yaw + shift, sign * np.pi / 2, roll + sign * shift])
    return A, B, C


# ---------------------------------------------------------------------------
# Probe
# ---------------------------------------------------------------------------

def _to_jsonable(x):
    if isinstance(x, Transform):
        return x.matrix.tolist()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_jsonable(v) for v in x]
    return x


@dataclass
class Counterexample:
    inputs: tuple
    values: dict
    trial: int

    def to_dict(self):
        return {"trial": self.trial, "inputs": _to_jsonable(self.inputs),
                "values": _to_jsonable(self.values)}


@dataclass
class AxiomReport:
    distance_name: str
    trials: int
    seed: int
    tolerance: float
    status: dict = field(default_factory=lambda: {a: "held" for a in AXIOMS})
    violations: dict = field(default_factory=lambda: {a: 0 for a in AXIOMS})
    counterexamples: dict = field(default_factory=dict)

    def held(self, axiom):
        return self.status[axiom] == "held"

    @property
    def is_metric(self):
        return all(v == "held" for v in self.status.values())

    def to_dict(self):
        return {
            "distance_name": self.distance_name,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "status": dict(self.status),
            "violations": dict(self.violations),
            "counterexamples": {k: v.to_dict() for k, v in self.counterexamples.items()},
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _violate(report, axiom, trial, inputs, values):
    report.violations[axiom] += 1
    if axiom not in report.counterexamples:
        report.status[axiom] = "violated"
        report.counterexamples[axiom] = Counterexample(tuple(inputs), values, trial)


def axiom_probe(distance, sampler, trials, seed, tolerance=1e-9,
                equivalent=same_representation, name=None):
    """Check the four metric axioms on ``trials`` sampled triples.

    ``sampler(rng)`` returns a triple ``(A, B, C)``; ``equivalent(A, B)``
    decides whether two elements count as equal for the identity axiom,
    which is tested in both directions: ``d(A, A) = 0``, ``A ~ B`` implies
    ``d(A, B) = 0``, and ``d(A, B) = 0`` implies ``A ~ B``. Only the first
    counterexample of each axiom is kept; all violations are counted.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report = AxiomReport(name or getattr(distance, "__name__", "distance"),
                         trials, seed, tolerance)
    d = lambda x, y: float(distance(x, y))  # noqa: E731

    for trial in range(trials):
        A, B, C = sampler(rng)
        dab, dba = d(A, B), d(B, A)
        dbc, dac = d(B, C), d(A, C)
        daa = d(A, A)

        low = min(dab, dba, dbc, dac, daa)
        if low < -tolerance:
            _violate(report, "non_negativity", trial, (A, B, C),
                     {"d_ab": dab, "d_bc": dbc, "d_ac": dac, "d_aa": daa})

        if daa > tolerance:
            _violate(report, "identity", trial, (A, A), {"d": daa, "equivalent": True})
        else:
            eq = bool(equivalent(A, B))
            if eq != (dab <= tolerance):
                _violate(report, "identity", trial, (A, B), {"d": dab, "equivalent": eq})

        if abs(dab - dba) > tolerance:
            _violate(report, "symmetry", trial, (A, B), {"d_ab": dab, "d_ba": dba})

        excess = dac - dab - dbc
        if excess > tolerance:
            _violate(report, "triangle_inequality", trial, (A, B, C),
                     {"d_ab": dab, "d_bc": dbc, "d_ac": dac, "excess": excess})
    return report


# named configurations used by the CLI and the acceptance suite
PROBES = {
    "euler": (dist_euler, euler_triples, same_rotation_euler),
    "quat": (dist_quat, quaternion_triples, same_representation),
    "geodesic": (dist_geodesic, rotation_triples, same_representation),
    "chordal-so3": (dist_chordal_so3, rotation_triples, same_representation),
    "chordal-se3": (dist_chordal_se3, transform_triples, same_representation),
}


def probe(kind, trials, seed, tolerance=1e-9):
    distance, sampler, equivalent = PROBES[kind]
    return axiom_probe(distance, sampler, trials, seed, tolerance, equivalent, name=kind)
