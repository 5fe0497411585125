"""Real Hilbert-space arithmetic over dense vectors and finitely supported sequences.

Dense vectors model R^d; sparse vectors model finitely supported elements of
l2 with 1-based indices.  Both are immutable; every public operation checks
that no NaN or infinity escapes.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonFiniteError, SpaceMismatchError

__all__ = [
    "Vector",
    "dense",
    "sparse",
    "basis",
    "zeros",
    "zero_sparse",
    "zero_like",
    "inner",
    "norm",
    "combine",
    "distance",
    "vector_from_json",
    "vector_to_json",
]


def _check_finite_scalar(value: float) -> float:
    if not math.isfinite(value):
        raise NonFiniteError(f"non-finite scalar {value!r}")
    return float(value)


class Vector:
    """Immutable vector: dense coordinates in R^d or a sparse index->value map.

    Sparse entries use strictly positive 1-based indices and never store
    explicit zeros, so the zero sequence is exactly the empty map.
    """

    __slots__ = ("_coords", "_entries")

    def __init__(self, coords=None, entries=None):
        if (coords is None) == (entries is None):
            raise ValueError("exactly one of coords/entries must be given")
        if coords is not None:
            arr = np.array(coords, dtype=float)
            if arr.ndim != 1:
                raise ValueError("dense vector must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError("dense vector has non-finite coordinates")
            arr.flags.writeable = False
            self._coords = arr
            self._entries = None
        else:
            clean = {}
            for idx, val in entries.items():
                i = int(idx)
                if i != idx or i < 1:
                    raise ValueError(f"sparse index {idx!r} must be an integer >= 1")
                v = float(val)
                if not math.isfinite(v):
                    raise NonFiniteError(f"sparse entry {idx}: non-finite value {val!r}")
                if v != 0.0:
                    clean[i] = v
            self._coords = None
            self._entries = clean

    # -- representation queries -------------------------------------------------

    @property
    def is_dense(self) -> bool:
        return self._coords is not None

    @property
    def is_sparse(self) -> bool:
        return self._entries is not None

    @property
    def dim(self):
        """Ambient dimension for dense vectors; None for sparse (l2)."""
        return len(self._coords) if self.is_dense else None

    @property
    def support(self):
        """Sorted tuple of indices carrying nonzero entries (sparse only)."""
        if self.is_dense:
            raise SpaceMismatchError("support is defined for sparse vectors")
        return tuple(sorted(self._entries))

    def coord(self, i: int) -> float:
        """1-based coordinate access; sparse vectors return 0 off-support."""
        if i < 1:
            raise IndexError(f"coordinate index {i} must be >= 1")
        if self.is_dense:
            if i > len(self._coords):
                raise SpaceMismatchError(f"coordinate {i} exceeds dimension {self.dim}")
            return float(self._coords[i - 1])
        return self._entries.get(i, 0.0)

    def as_array(self) -> np.ndarray:
        if not self.is_dense:
            raise SpaceMismatchError("as_array requires a dense vector")
        return self._coords

    def entries(self) -> dict:
        if not self.is_sparse:
            raise SpaceMismatchError("entries requires a sparse vector")
        return dict(self._entries)

    def to_dense(self, dim: int) -> "Vector":
        """Embed into R^dim; fails if the support does not fit."""
        if self.is_dense:
            if len(self._coords) != dim:
                raise SpaceMismatchError(f"cannot re-embed dense dim {self.dim} as {dim}")
            return self
        if self._entries and max(self._entries) > dim:
            raise SpaceMismatchError(
                f"sparse support up to index {max(self._entries)} exceeds dense dimension {dim}"
            )
        arr = np.zeros(dim)
        for i, v in self._entries.items():
            arr[i - 1] = v
        return Vector(coords=arr)

    # -- arithmetic --------------------------------------------------------------

    def _pair(self, other: "Vector"):
        """Return (x, y) coerced to a common representation."""
        if self.is_dense and other.is_dense:
            if len(self._coords) != len(other._coords):
                raise SpaceMismatchError(
                    f"dimension mismatch: {self.dim} vs {other.dim}"
                )
            return self, other
        if self.is_sparse and other.is_sparse:
            return self, other
        if self.is_dense:
            return self, other.to_dense(len(self._coords))
        return self.to_dense(len(other._coords)), other

    def __add__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        a, b = self._pair(other)
        if a.is_dense:
            return Vector(coords=a._coords + b._coords)
        out = dict(a._entries)
        for i, v in b._entries.items():
            s = out.get(i, 0.0) + v
            if s == 0.0:
                out.pop(i, None)
            else:
                out[i] = s
        return Vector(entries=out)

    def __sub__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        _check_finite_scalar(scalar)
        if self.is_dense:
            return Vector(coords=self._coords * scalar)
        if scalar == 0.0:
            return Vector(entries={})
        return Vector(entries={i: v * scalar for i, v in self._entries.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __eq__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        if self.is_dense != other.is_dense:
            return False
        if self.is_dense:
            return self.dim == other.dim and bool(np.all(self._coords == other._coords))
        return self._entries == other._entries

    __hash__ = None

    def __repr__(self):
        if self.is_dense:
            return f"Vector.dense({self._coords.tolist()!r})"
        return f"Vector.sparse({dict(sorted(self._entries.items()))!r})"


def dense(values) -> Vector:
    """Dense vector from an iterable of coordinates."""
    return Vector(coords=values)


def sparse(entries: dict) -> Vector:
    """Sparse vector from a 1-based index->value map; zeros are dropped."""
    return Vector(entries=entries)


Vector.dense = staticmethod(dense)
Vector.sparse = staticmethod(sparse)


def basis(i: int, dim=None) -> Vector:
    """Standard basis vector e_i; sparse when dim is None."""
    if dim is None:
        return sparse({i: 1.0})
    vec = np.zeros(dim)
    vec[i - 1] = 1.0
    return dense(vec)


def zeros(dim: int) -> Vector:
    return dense(np.zeros(dim))


def zero_sparse() -> Vector:
    return sparse({})


def zero_like(x: Vector) -> Vector:
    return zeros(x.dim) if x.is_dense else zero_sparse()


def inner(x: Vector, y: Vector) -> float:
    """Inner product <x | y>; symmetric, bilinear, inner(x, x) = norm(x)^2."""
    a, b = x._pair(y)
    if a.is_dense:
        return _check_finite_scalar(float(np.dot(a._coords, b._coords)))
    small, big = (a._entries, b._entries) if len(a._entries) <= len(b._entries) else (b._entries, a._entries)
    total = math.fsum(v * big[i] for i, v in small.items() if i in big)
    return _check_finite_scalar(total)


def norm(x: Vector) -> float:
    """Euclidean norm; zero exactly when the vector is zero."""
    if x.is_dense:
        return _check_finite_scalar(float(np.linalg.norm(x._coords)))
    return _check_finite_scalar(math.sqrt(math.fsum(v * v for v in x._entries.values())))


def combine(lam: float, x: Vector, y: Vector) -> Vector:
    """Affine combination lam*x + (1-lam)*y."""
    _check_finite_scalar(lam)
    return lam * x + (1.0 - lam) * y


def distance(x: Vector, y: Vector) -> float:
    return norm(x - y)


def vector_from_json(obj, pointer="") -> Vector:
    """Parse the config literal form: dense ``[1.0, 2.0]`` or sparse ``{"3": 1.5}``."""
    from .errors import ConfigError

    if isinstance(obj, list):
        try:
            return dense(obj)
        except (ValueError, TypeError, NonFiniteError) as exc:
            raise ConfigError(f"bad dense vector literal: {exc}", pointer)
    if isinstance(obj, dict):
        try:
            return sparse({int(k): float(v) for k, v in obj.items()})
        except (ValueError, TypeError, NonFiniteError) as exc:
            raise ConfigError(f"bad sparse vector literal: {exc}", pointer)
    raise ConfigError("vector literal must be a list or an index->value object", pointer)


def vector_to_json(x: Vector):
    if x.is_dense:
        return [float(v) for v in x.as_array()]
    return {str(i): v for i, v in sorted(x.entries().items())}
