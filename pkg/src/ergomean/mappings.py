"""Self-maps of convex sets and sampled checkers for their contraction classes.

The checkers are falsifiers: "holds" means no counterexample was found at the
given seed and sample budget, and every failure carries a re-checkable witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import convex as cx
from . import hilbert as hl
from .convex import Box, ConvexSet, WholeSpace
from .errors import DomainError
from .hilbert import Vector

__all__ = [
    "Mapping",
    "Rotation",
    "Translation",
    "AffineMap",
    "ProjectionMap",
    "PrependShift",
    "SqrtWithJump",
    "EndpointStep",
    "Composition",
    "PropertyReport",
    "apply",
    "check_nonexpansive",
    "check_asymptotically_nonexpansive",
    "check_generalized_hybrid",
    "MAPPING_KINDS",
]

MEMBERSHIP_TOL = 1e-9
_SELF_CHECK_POINTS = 4


@dataclass
class PropertyReport:
    """Result of a sampled property check; falsy when a witness was found."""

    holds: bool
    witness: tuple | None
    samples_used: int
    note: str | None = None

    def __bool__(self):
        return self.holds


class Mapping:
    """A self-map of a closed convex domain."""

    kind = "abstract"

    def __init__(self, domain: ConvexSet):
        self.domain = domain

    def _raw(self, x: Vector) -> Vector:
        raise NotImplementedError

    def apply(self, x: Vector, tol: float = MEMBERSHIP_TOL) -> Vector:
        if not self.domain.contains(x, tol):
            raise DomainError(f"point {x!r} is outside the domain of {self.kind}")
        return self._raw(x)

    def _self_check(self, seed: int = 0, tol: float = 1e-8):
        """Spot-check the self-map contract on a few sampled domain points."""
        for p in cx.sample(self.domain, _SELF_CHECK_POINTS, 2.0, seed):
            img = self._raw(p)
            if not self.domain.contains(img, tol):
                raise DomainError(
                    f"{self.kind} is not a self-map: image of {p!r} leaves the domain"
                )

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()!r})"


class Rotation(Mapping):
    """Planar rotation about a center point."""

    kind = "rotation"

    def __init__(self, center: Vector, angle: float, domain: ConvexSet | None = None):
        if center.dim != 2:
            raise ValueError("rotation is planar; center must have dimension 2")
        super().__init__(domain or WholeSpace(2))
        self.center = center
        self.angle = float(angle)
        c, s = math.cos(self.angle), math.sin(self.angle)
        self._mat = np.array([[c, -s], [s, c]])
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        rel = x.to_dense(2).as_array() - self.center.as_array()
        return hl.dense(self.center.as_array() + self._mat @ rel)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "center": hl.vector_to_json(self.center), "angle": self.angle}


class Translation(Mapping):
    """x -> x + displacement; fixed-point free whenever the displacement is nonzero."""

    kind = "translation"

    def __init__(self, displacement: Vector, domain: ConvexSet | None = None):
        super().__init__(domain or WholeSpace(displacement.dim))
        self.displacement = displacement
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        return x + self.displacement

    def descriptor(self) -> dict:
        return {"kind": self.kind, "displacement": hl.vector_to_json(self.displacement)}


class AffineMap(Mapping):
    """x -> A x + b on R^d."""

    kind = "affine"

    def __init__(self, matrix, offset: Vector, domain: ConvexSet | None = None):
        mat = np.array(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("matrix must be square")
        if offset.dim != mat.shape[0]:
            raise ValueError("offset dimension must match the matrix")
        super().__init__(domain or WholeSpace(mat.shape[0]))
        self.matrix = mat
        self.offset = offset
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        return hl.dense(self.matrix @ x.to_dense(len(self.matrix)).as_array() + self.offset.as_array())

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "matrix": [list(map(float, row)) for row in self.matrix],
            "offset": hl.vector_to_json(self.offset),
        }


class ProjectionMap(Mapping):
    """Metric projection onto a primitive set, as a nonexpansive self-map."""

    kind = "projection-map"

    def __init__(self, target: ConvexSet, domain: ConvexSet | None = None):
        super().__init__(domain or WholeSpace(target.dim))
        self.target = target
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        return self.target.project(x)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "set": self.target.descriptor()}


class PrependShift(Mapping):
    """(x1, x2, ...) -> (x1, x1, x2, ...) on {x : x1 >= 0} in the sequence space.

    Nonexpansive with fixed point 0, yet no point of the space is attractive
    for it; the counterexample runner exercises exactly that.
    """

    kind = "shift-remark33"

    def __init__(self):
        super().__init__(cx.CoordinateHalfline(1))
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        if x.is_dense:
            x = hl.sparse({i + 1: float(v) for i, v in enumerate(x.as_array())})
        entries = x.entries()
        out = {}
        first = entries.get(1, 0.0)
        if first != 0.0:
            out[1] = first
            out[2] = first
        for i, v in entries.items():
            if i >= 2:
                out[i + 1] = v
        return hl.sparse(out)

    def descriptor(self) -> dict:
        return {"kind": self.kind}


class SqrtWithJump(Mapping):
    """On [0, 1]: x -> sqrt(x) for x != 0 and 0 -> 1.

    Discontinuous at 0 and not nonexpansive there, but asymptotically
    nonexpansive in the limsup sense: every orbit converges to 1.
    """

    kind = "sqrt-section3"

    def __init__(self):
        super().__init__(Box([0.0], [1.0]))
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        v = x.to_dense(1).coord(1)
        v = max(0.0, v)  # clip membership-tolerance dust
        return hl.dense([1.0 if v == 0.0 else math.sqrt(v)])

    def descriptor(self) -> dict:
        return {"kind": self.kind}


class EndpointStep(Mapping):
    """On [0, upper]: x -> 0 except the right endpoint, which maps to `value`.

    The committed generalized-hybrid specimen: (alpha, beta) = (2, 0) works,
    while the jump at the endpoint breaks nonexpansiveness.
    """

    kind = "endpoint-step"

    def __init__(self, upper: float = 3.0, value: float = 1.0):
        if not 0.0 <= value <= upper:
            raise ValueError("value must lie in [0, upper]")
        super().__init__(Box([0.0], [float(upper)]))
        self.upper = float(upper)
        self.value = float(value)
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        v = x.to_dense(1).coord(1)
        return hl.dense([self.value if v == self.upper else 0.0])

    def descriptor(self) -> dict:
        return {"kind": self.kind, "upper": self.upper, "value": self.value}


class Composition(Mapping):
    """Composition of mappings, applied right to left: [f, g] sends x to f(g(x))."""

    kind = "composition"

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise ValueError("composition needs at least one mapping")
        super().__init__(maps[-1].domain)
        self.maps = maps
        self._self_check()

    def _raw(self, x: Vector) -> Vector:
        for m in reversed(self.maps):
            x = m.apply(x)
        return x

    def descriptor(self) -> dict:
        return {"kind": self.kind, "maps": [m.descriptor() for m in self.maps]}


MAPPING_KINDS = (
    "affine",
    "composition",
    "endpoint-step",
    "projection-map",
    "rotation",
    "shift-remark33",
    "sqrt-section3",
    "translation",
)


def apply(m: Mapping, x: Vector, tol: float = MEMBERSHIP_TOL) -> Vector:
    return m.apply(x, tol)


def sample_pairs(m: Mapping, samples: int, radius: float, seed: int):
    """Deterministic (x, y) pairs from the mapping's domain; shared by all checkers."""
    pts = cx.sample(m.domain, 2 * samples, radius, seed)
    return list(zip(pts[0::2], pts[1::2]))


def check_nonexpansive(m: Mapping, samples: int = 100, radius: float = 5.0,
                       tol: float = 1e-9, seed: int = 0) -> PropertyReport:
    """Falsify ||Tx - Ty|| <= ||x - y||; witness is the worst sampled pair."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    worst = None
    for x, y in sample_pairs(m, samples, radius, seed):
        gap = hl.distance(m.apply(x), m.apply(y)) - hl.distance(x, y)
        if gap > tol and (worst is None or gap > worst[2]):
            worst = (x, y, gap)
    return PropertyReport(holds=worst is None, witness=worst, samples_used=samples)


def _tail_sup(m: Mapping, x: Vector, y: Vector, n_tail: int):
    """Max of ||T^n x - T^n y|| over the window n in [n_tail, 2 n_tail]."""
    cur_x, cur_y = x, y
    sup = 0.0
    for n in range(1, 2 * n_tail + 1):
        cur_x = m.apply(cur_x)
        cur_y = m.apply(cur_y)
        if n >= n_tail:
            sup = max(sup, hl.distance(cur_x, cur_y))
    return sup


def check_asymptotically_nonexpansive(m: Mapping, samples: int = 20, n_tail: int = 50,
                                      tol: float = 1e-9, seed: int = 0,
                                      radius: float = 5.0) -> PropertyReport:
    """Falsify limsup_n ||T^n x - T^n y|| <= ||x - y|| via a finite tail window.

    The limsup is estimated by the max over n in [n_tail, 2 n_tail]; the report
    notes that this is a finite-horizon surrogate, not the true limsup.
    """
    if n_tail < 2:
        raise ValueError("n_tail must be >= 2")
    note = f"limsup estimated on the finite window n in [{n_tail}, {2 * n_tail}]"
    worst = None
    for x, y in sample_pairs(m, samples, radius, seed):
        gap = _tail_sup(m, x, y, n_tail) - hl.distance(x, y)
        if gap > tol and (worst is None or gap > worst[2]):
            worst = (x, y, gap)
    return PropertyReport(holds=worst is None, witness=worst, samples_used=samples, note=note)


def hybrid_gap(m: Mapping, alpha: float, beta: float, x: Vector, y: Vector) -> float:
    """LHS - RHS of the generalized hybrid inequality at one pair (<= 0 when satisfied)."""
    tx, ty = m.apply(x), m.apply(y)
    lhs = alpha * hl.distance(tx, ty) ** 2 + (1.0 - alpha) * hl.distance(x, ty) ** 2
    rhs = beta * hl.distance(tx, y) ** 2 + (1.0 - beta) * hl.distance(x, y) ** 2
    return lhs - rhs


def check_generalized_hybrid(m: Mapping, alpha: float, beta: float, samples: int = 100,
                             tol: float = 1e-9, seed: int = 0,
                             radius: float = 5.0) -> PropertyReport:
    """Falsify the (alpha, beta) generalized hybrid inequality on sampled pairs.

    (alpha, beta) = (1, 0) reduces to the squared nonexpansiveness inequality,
    so on identical samples it agrees with check_nonexpansive.
    """
    worst = None
    for x, y in sample_pairs(m, samples, radius, seed):
        gap = hybrid_gap(m, alpha, beta, x, y)
        if gap > tol and (worst is None or gap > worst[2]):
            worst = (x, y, gap)
    return PropertyReport(holds=worst is None, witness=worst, samples_used=samples)
