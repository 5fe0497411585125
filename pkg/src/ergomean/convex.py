"""Closed convex sets with exact metric projection, plus Dykstra for intersections.

Each primitive kind carries a closed-form projection.  ``verify_projection``
checks the variational characterization Re<x-u | u-c> >= 0 on sampled points
of the set, which is what makes a candidate the metric projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert as hl
from .errors import NotInSetError, SpaceMismatchError, UseDykstraError
from .hilbert import Vector

__all__ = [
    "ConvexSet",
    "WholeSpace",
    "Box",
    "Ball",
    "Halfspace",
    "AffineSubspace",
    "CoordinateHalfline",
    "Intersection",
    "ProjectionReport",
    "contains",
    "project",
    "verify_projection",
    "projection_violation",
    "dykstra_project",
    "sample",
]

DYKSTRA_MAX_ITER = 10_000
DYKSTRA_TOL = 1e-10


@dataclass(frozen=True)
class ProjectionReport:
    """Outcome of an iterative projection: the point, cycles used, feasibility residual."""

    point: Vector
    iterations: int
    residual: float
    converged: bool


class ConvexSet:
    """Base class; subclasses are immutable and validated at construction."""

    kind = "abstract"

    #: ambient dimension (int) for dense sets, None for sequence-space sets
    dim = None

    def contains(self, x: Vector, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol

    def distance(self, x: Vector) -> float:
        return hl.distance(x, self.project(x))

    def project(self, x: Vector) -> Vector:
        raise NotImplementedError

    def reference(self) -> Vector:
        """A point of the set used as the anchor for sampling."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, ConvexSet) and self.descriptor() == other.descriptor()

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()!r})"


class WholeSpace(ConvexSet):
    """R^dim, or all finitely supported sequences when dim is None."""

    kind = "whole-space"

    def __init__(self, dim=None):
        if dim is not None and int(dim) < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = None if dim is None else int(dim)

    def project(self, x: Vector) -> Vector:
        if self.dim is not None and x.is_dense and x.dim != self.dim:
            raise SpaceMismatchError(f"point has dim {x.dim}, set is R^{self.dim}")
        return x

    def distance(self, x: Vector) -> float:
        self.project(x)
        return 0.0

    def reference(self) -> Vector:
        return hl.zeros(self.dim) if self.dim is not None else hl.zero_sparse()

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


class Box(ConvexSet):
    """Per-coordinate bounds; +-inf entries leave a side unbounded."""

    kind = "box"

    def __init__(self, lower, upper):
        lo = np.array(lower, dtype=float)
        hi = np.array(upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower/upper must be 1-D of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("box bounds out of order")
        self.lower = lo
        self.upper = hi
        self.dim = len(lo)

    def project(self, x: Vector) -> Vector:
        arr = x.to_dense(self.dim).as_array()
        return hl.dense(np.clip(arr, self.lower, self.upper))

    def reference(self) -> Vector:
        return self.project(hl.zeros(self.dim))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


class Ball(ConvexSet):
    """Closed ball of given center and radius >= 0."""

    kind = "ball"

    def __init__(self, center: Vector, radius: float):
        if radius < 0:
            raise ValueError("radius must be >= 0")
        self.center = center
        self.radius = float(radius)
        self.dim = center.dim

    def project(self, x: Vector) -> Vector:
        diff = x - self.center
        r = hl.norm(diff)
        if r <= self.radius:
            return x
        return self.center + (self.radius / r) * diff

    def distance(self, x: Vector) -> float:
        return max(0.0, hl.distance(x, self.center) - self.radius)

    def reference(self) -> Vector:
        return self.center

    def descriptor(self) -> dict:
        return {"kind": self.kind, "center": hl.vector_to_json(self.center), "radius": self.radius}


class Halfspace(ConvexSet):
    """{x : <x | normal> <= offset} with normal != 0."""

    kind = "halfspace"

    def __init__(self, normal: Vector, offset: float):
        nn = hl.norm(normal)
        if nn == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        self.normal = normal
        self.offset = float(offset)
        self._normal_norm_sq = nn * nn
        self._normal_norm = nn
        self.dim = normal.dim

    def project(self, x: Vector) -> Vector:
        excess = hl.inner(x, self.normal) - self.offset
        if excess <= 0.0:
            return x
        return x - (excess / self._normal_norm_sq) * self.normal

    def distance(self, x: Vector) -> float:
        return max(0.0, (hl.inner(x, self.normal) - self.offset) / self._normal_norm)

    def reference(self) -> Vector:
        zero = hl.zero_like(self.normal)
        return self.project(zero)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "normal": hl.vector_to_json(self.normal), "offset": self.offset}


class AffineSubspace(ConvexSet):
    """anchor + span(directions); directions must be orthonormal."""

    kind = "affine"

    def __init__(self, anchor: Vector, directions):
        if not anchor.is_dense:
            raise ValueError("affine subspace anchor must be dense")
        self.anchor = anchor
        self.dim = anchor.dim
        mat = np.array([d.to_dense(self.dim).as_array() for d in directions], dtype=float)
        if mat.size:
            gram = mat @ mat.T
            if not np.allclose(gram, np.eye(len(mat)), atol=1e-10):
                raise ValueError("affine directions must be orthonormal")
        self._basis = mat  # shape (k, dim); possibly k = 0 (a single point)

    def project(self, x: Vector) -> Vector:
        arr = x.to_dense(self.dim).as_array() - self.anchor.as_array()
        if self._basis.size:
            arr = self._basis.T @ (self._basis @ arr)
        else:
            arr = np.zeros(self.dim)
        return hl.dense(self.anchor.as_array() + arr)

    def reference(self) -> Vector:
        return self.anchor

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "anchor": hl.vector_to_json(self.anchor),
            "directions": [list(map(float, row)) for row in self._basis],
        }


class CoordinateHalfline(ConvexSet):
    """{x : x_i >= 0} in the sequence space; the shift map's natural domain."""

    kind = "halfline-coordinate"

    def __init__(self, index: int):
        if index < 1:
            raise ValueError("coordinate index must be >= 1")
        self.index = int(index)
        self.dim = None

    def project(self, x: Vector) -> Vector:
        xi = x.coord(self.index)
        if xi >= 0.0:
            return x
        if x.is_dense:
            arr = x.as_array().copy()
            arr[self.index - 1] = 0.0
            return hl.dense(arr)
        entries = x.entries()
        entries.pop(self.index, None)
        return hl.sparse(entries)

    def distance(self, x: Vector) -> float:
        return max(0.0, -x.coord(self.index))

    def reference(self) -> Vector:
        return hl.zero_sparse()

    def descriptor(self) -> dict:
        return {"kind": self.kind, "index": self.index}


class Intersection(ConvexSet):
    """Intersection of primitive sets; nonemptiness certified by a witness point."""

    kind = "intersection"

    def __init__(self, members, witness: Vector, tol: float = 1e-9):
        members = list(members)
        if not members:
            raise ValueError("intersection needs at least one member")
        if any(isinstance(m, Intersection) for m in members):
            raise ValueError("intersection members must be primitive sets")
        for k, m in enumerate(members):
            if not m.contains(witness, tol):
                raise NotInSetError(f"witness point is not in member {k} (within {tol})")
        self.members = members
        self.witness = witness
        dims = {m.dim for m in members if m.dim is not None}
        if len(dims) > 1:
            raise SpaceMismatchError(f"members have mixed dimensions {sorted(dims)}")
        self.dim = dims.pop() if dims else None

    def contains(self, x: Vector, tol: float = 0.0) -> bool:
        return all(m.contains(x, tol) for m in self.members)

    def distance(self, x: Vector) -> float:
        # feasibility residual, not the exact distance to the intersection
        return max(m.distance(x) for m in self.members)

    def project(self, x: Vector) -> Vector:
        raise UseDykstraError("exact projection onto an intersection: use dykstra_project")

    def reference(self) -> Vector:
        return self.witness

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "members": [m.descriptor() for m in self.members],
            "witness": hl.vector_to_json(self.witness),
        }


# -- module-level operations ----------------------------------------------------


def contains(cset: ConvexSet, x: Vector, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return cset.contains(x, tol)


def project(cset: ConvexSet, x: Vector) -> Vector:
    return cset.project(x)


def projection_violation(cset: ConvexSet, x: Vector, u: Vector, samples: int = 50,
                         tol: float = 1e-9, seed: int = 0, radius: float | None = None):
    """Return (c, value) with Re<x-u | u-c> = value < -tol for some sampled c, or None."""
    if not cset.contains(u, max(tol, 1e-9)):
        raise NotInSetError("candidate projection point is not in the set")
    if radius is None:
        radius = 2.0 * (1.0 + hl.norm(x) + hl.norm(u))
    worst = None
    for c in sample(cset, samples, radius, seed):
        val = hl.inner(x - u, u - c)
        if val < -tol and (worst is None or val < worst[1]):
            worst = (c, val)
    return worst


def verify_projection(cset: ConvexSet, x: Vector, u: Vector, samples: int = 50,
                      tol: float = 1e-9, seed: int = 0, radius: float | None = None) -> bool:
    """True iff Re<x-u | u-c> >= -tol for all sampled c of the set."""
    return projection_violation(cset, x, u, samples, tol, seed, radius) is None


def dykstra_project(sets, x: Vector, max_iter: int = DYKSTRA_MAX_ITER,
                    tol: float = DYKSTRA_TOL) -> ProjectionReport:
    """Dykstra's algorithm: metric projection onto the intersection of primitive sets.

    Unlike plain alternating projections, Dykstra converges to the metric
    projection itself, which the attractive-to-fixed pipeline needs.  The
    residual reported is the maximum distance to any member set; convergence
    additionally requires the iterate to settle between cycles.
    """
    sets = list(sets)
    if not sets:
        return ProjectionReport(point=x, iterations=0, residual=0.0, converged=True)
    y = x
    increments = [None] * len(sets)
    residual = max(s.distance(y) for s in sets)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        prev = y
        for i, s in enumerate(sets):
            z = y if increments[i] is None else y + increments[i]
            proj = s.project(z)
            increments[i] = z - proj
            y = proj
        residual = max(s.distance(y) for s in sets)
        if residual <= tol and hl.distance(y, prev) <= tol:
            return ProjectionReport(point=y, iterations=iterations, residual=residual, converged=True)
    return ProjectionReport(point=y, iterations=iterations, residual=residual, converged=False)


def _sample_sparse(cset: ConvexSet, n: int, radius: float, rng) -> list:
    ref = cset.reference()
    out = []
    for _ in range(n):
        m = int(rng.integers(1, 7))
        idx = rng.choice(np.arange(1, 11), size=m, replace=False)
        vals = rng.standard_normal(m)
        u = float(rng.random()) ** (1.0 / m)
        scale = radius * u / max(1e-12, float(np.linalg.norm(vals)))
        pt = ref + hl.sparse({int(i): float(v) * scale for i, v in zip(idx, vals)})
        if not cset.contains(pt, 1e-12):
            pt = cset.project(pt)
        out.append(pt)
    return out


def sample(cset: ConvexSet, n: int, radius: float, seed: int = 0) -> list:
    """n points of the set within `radius` of its reference point.

    One rejection draw per point, then projection fallback; the fallback keeps
    the point inside the ball because projections are nonexpansive and the
    reference lies in the set.  Deterministic per seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be > 0")
    rng = np.random.default_rng(seed)
    if cset.dim is None:
        return _sample_sparse(cset, n, radius, rng)
    d = cset.dim
    ref = cset.reference().to_dense(d).as_array()
    out = []
    for _ in range(n):
        g = rng.standard_normal(d)
        nrm = float(np.linalg.norm(g))
        u = float(rng.random()) ** (1.0 / d)
        pt = hl.dense(ref + (radius * u / max(nrm, 1e-12)) * g)
        if not cset.contains(pt, 1e-12):
            if isinstance(cset, Intersection):
                pt = dykstra_project(cset.members, pt).point
            else:
                pt = cset.project(pt)
        out.append(pt)
    return out
