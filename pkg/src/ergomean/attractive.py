"""Attractive points: membership checks, a polyhedral outer model, and the
projection pipeline from attractive candidates to common fixed points.

A point a is attractive when ||a - T_s x|| <= ||a - x|| for every x in the
acted-on set and every element s.  Squaring and expanding makes the condition
linear in a:

    2 <a | x - T_s x>  <=  ||x||^2 - ||T_s x||^2,

so every sampled pair (x, s) contributes one half-space.  The resulting model
only ever over-contains the true attractive set (outer approximation).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import convex as cx
from . import hilbert as hl
from .convex import ConvexSet, Halfspace, Intersection, ProjectionReport
from .errors import NotAttractiveError
from .hilbert import Vector
from .mappings import PropertyReport
from .semigroup import SemigroupAction

__all__ = [
    "AttractiveModel",
    "ModelConstraint",
    "PipelineReport",
    "is_attractive",
    "is_asymptotically_attractive",
    "build_model",
    "project_onto_model",
    "attractive_to_fixed",
]

DEDUP_COS_TOL = 1e-10
DEDUP_OFFSET_TOL = 1e-10
ZERO_NORMAL_TOL = 1e-14
PIPELINE_TOL = 1e-6


@dataclass(frozen=True)
class ModelConstraint:
    """One half-space 2<a | x - T_s x> <= ||x||^2 - ||T_s x||^2 with its provenance."""

    normal: Vector
    offset: float
    source_x: Vector
    source_element: object
    source_image: Vector

    def to_json(self) -> dict:
        return {
            "normal": hl.vector_to_json(self.normal),
            "offset": self.offset,
            "source": {
                "x": hl.vector_to_json(self.source_x),
                "s": list(self.source_element) if isinstance(self.source_element, tuple)
                     else self.source_element,
                "tsx": hl.vector_to_json(self.source_image),
            },
        }


class AttractiveModel:
    """Sampled outer polyhedral model of the attractive-point set."""

    def __init__(self, constraints, dim):
        self.constraints = list(constraints)
        self.dim = dim

    def halfspaces(self) -> list:
        return [Halfspace(c.normal, c.offset) for c in self.constraints]

    def feasible_contains(self, a: Vector, tol: float = 0.0) -> bool:
        return all(hl.inner(a, c.normal) <= c.offset + tol for c in self.constraints)

    def export_json(self) -> str:
        return json.dumps([c.to_json() for c in self.constraints], sort_keys=True)

    def __len__(self):
        return len(self.constraints)

    def __repr__(self):
        return f"AttractiveModel({len(self.constraints)} constraints, dim={self.dim})"


@dataclass
class PipelineReport:
    """Outcome of projecting an attractive candidate to a common fixed point."""

    attractive_candidate: Vector
    projected_fixed_candidate: Vector
    max_fixed_residual: float


def is_attractive(a: Vector, action: SemigroupAction, testpoints, elements,
                  tol: float = 1e-9) -> PropertyReport:
    """Falsify ||a - T_s x|| <= ||a - x|| over the battery of (x, s) pairs."""
    checked = 0
    for x in testpoints:
        dist_ax = hl.distance(a, x)
        for s in elements:
            img = action.act(s, x)
            gap = hl.distance(a, img) - dist_ax
            checked += 1
            if gap > tol:
                return PropertyReport(holds=False, witness=(x, s, gap), samples_used=checked)
    return PropertyReport(holds=True, witness=None, samples_used=checked)


def is_asymptotically_attractive(a: Vector, action: SemigroupAction, testpoints, elements,
                                 n_tail: int = 50, tol: float = 1e-9) -> PropertyReport:
    """Tail-window surrogate for limsup_n ||a - (T_t)^n x|| <= ||a - x||."""
    if n_tail < 2:
        raise ValueError("n_tail must be >= 2")
    note = f"limsup estimated on the finite window n in [{n_tail}, {2 * n_tail}]"
    checked = 0
    for x in testpoints:
        dist_ax = hl.distance(a, x)
        for t in elements:
            cur = x
            sup = 0.0
            for n in range(1, 2 * n_tail + 1):
                cur = action.act(t, cur)
                if n >= n_tail:
                    sup = max(sup, hl.distance(a, cur))
            checked += 1
            if sup - dist_ax > tol:
                return PropertyReport(holds=False, witness=(x, t, sup - dist_ax),
                                      samples_used=checked, note=note)
    return PropertyReport(holds=True, witness=None, samples_used=checked, note=note)


def _dedup_key(direction: np.ndarray, scaled_offset: float):
    return tuple(np.round(direction, 5)) + (round(scaled_offset, 5),)


def build_model(action: SemigroupAction, sample_x, elements) -> AttractiveModel:
    """One half-space per sampled (x, s); trivial constraints dropped, near-duplicates merged.

    Deduplication buckets constraints by rounded unit normal, then keeps one
    representative among those whose normals have cosine similarity at least
    1 - 1e-10 and whose normalized offsets differ by at most 1e-10.
    """
    constraints = []
    buckets = {}
    dim = None
    for x in sample_x:
        for s in elements:
            img = action.act(s, x)
            normal = 2.0 * (x - img)
            offset = hl.norm(x) ** 2 - hl.norm(img) ** 2
            nn = hl.norm(normal)
            if nn <= ZERO_NORMAL_TOL:
                continue  # x is (numerically) fixed by T_s: constraint is 0 <= 0
            if dim is None:
                dim = normal.dim
            if normal.is_dense:
                direction = normal.as_array() / nn
                scaled_offset = offset / nn
                key = _dedup_key(direction, scaled_offset)
                duplicate = False
                for other_dir, other_off in buckets.get(key, []):
                    cos = float(np.dot(direction, other_dir))
                    if cos >= 1.0 - DEDUP_COS_TOL and abs(scaled_offset - other_off) <= DEDUP_OFFSET_TOL:
                        duplicate = True
                        break
                if duplicate:
                    continue
                buckets.setdefault(key, []).append((direction, scaled_offset))
            constraints.append(ModelConstraint(normal=normal, offset=offset, source_x=x,
                                               source_element=s, source_image=img))
    return AttractiveModel(constraints, dim)


def project_onto_model(model: AttractiveModel, x: Vector, max_iter: int = cx.DYKSTRA_MAX_ITER,
                       tol: float = cx.DYKSTRA_TOL) -> ProjectionReport:
    """Dykstra projection onto the model's half-spaces; an empty model is the whole space."""
    if not model.constraints:
        return ProjectionReport(point=x, iterations=0, residual=0.0, converged=True)
    if x.is_dense and model.dim is not None:
        return _dykstra_halfspaces(model, x, max_iter, tol)
    return cx.dykstra_project(model.halfspaces(), x, max_iter, tol)


def _dykstra_halfspaces(model: AttractiveModel, x: Vector, max_iter: int,
                        tol: float) -> ProjectionReport:
    """Array-based Dykstra specialized to half-spaces (same algorithm as the generic one)."""
    d = model.dim
    normals = np.array([c.normal.to_dense(d).as_array() for c in model.constraints])
    offsets = np.array([c.offset for c in model.constraints])
    norms_sq = np.einsum("ij,ij->i", normals, normals)
    norms = np.sqrt(norms_sq)
    y = x.to_dense(d).as_array().copy()
    increments = np.zeros_like(normals)
    iterations = 0
    residual = float(np.max(np.maximum(0.0, (normals @ y - offsets) / norms)))
    for iterations in range(1, max_iter + 1):
        prev = y.copy()
        for i in range(len(normals)):
            z = y + increments[i]
            excess = float(normals[i] @ z - offsets[i])
            proj = z - (excess / norms_sq[i]) * normals[i] if excess > 0.0 else z
            increments[i] = z - proj
            y = proj
        residual = float(np.max(np.maximum(0.0, (normals @ y - offsets) / norms)))
        if residual <= tol and float(np.linalg.norm(y - prev)) <= tol:
            return ProjectionReport(point=hl.dense(y), iterations=iterations,
                                    residual=residual, converged=True)
    return ProjectionReport(point=hl.dense(y), iterations=iterations,
                            residual=residual, converged=False)


def attractive_to_fixed(a: Vector, cset: ConvexSet, action: SemigroupAction,
                        tol: float = PIPELINE_TOL, battery_points: int = 50,
                        battery_radius: float = 5.0, seed: int = 0,
                        elements=None) -> PipelineReport:
    """Project an attractive candidate onto the acted-on set; the result should be fixed.

    Precondition: the candidate passes the attractiveness battery; otherwise a
    NotAttractiveError carries the witness.  The fixed-point residual is the
    max over generators of ||T u - u|| with u the metric projection of a.
    """
    if elements is None:
        elements = [tuple(1 if j == i else 0 for j in range(action.k))
                    for i in range(action.k)] if action.structure == "commutative" \
            else [chr(ord("a") + i) for i in range(action.k)]
    testpoints = cx.sample(cset, battery_points, battery_radius, seed)
    report = is_attractive(a, action, testpoints, elements, tol)
    if not report:
        raise NotAttractiveError(
            f"candidate fails attractiveness with gap {report.witness[2]:.3e}",
            witness=report.witness,
        )
    if isinstance(cset, Intersection):
        u = cx.dykstra_project(cset.members, a).point
    else:
        u = cset.project(a)
    residual = max(hl.distance(g.apply(u), u) for g in action.generators)
    return PipelineReport(attractive_candidate=a, projected_fixed_candidate=u,
                          max_fixed_residual=residual)
