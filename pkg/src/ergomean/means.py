"""Asymptotically invariant averaging over semigroup orbits and the mean vector.

Invariant means are not constructive, so everything here is phrased in terms
of stage averages: finite convex combinations of orbit points whose
translation defect vanishes as the stage grows.  Their limits realize the
mean vector; the Cauchy test over doubling stages decides convergence.

Built-in schemes:

* ``cesaro`` -- (1/n) sum of T^1 x .. T^n x on a single-generator action.
* ``box``    -- uniform average over multi-indices 1 <= n_i <= n on N^k.
* ``sliding_gaussian`` -- a weighted scheme whose stage-n weights form a
  product Gaussian bump centered at (2n, ..., 2n).  Its translation defect
  decays like 1/sigma, and the moving, widening window suppresses both
  oscillatory and transient orbit components far faster than the uniform
  schemes, which converge only like 1/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert as hl
from .errors import DivergingOrbitError
from .hilbert import Vector
from .semigroup import SemigroupAction

__all__ = [
    "AveragingScheme",
    "CesaroAverage",
    "BoxAverage",
    "WeightedAverage",
    "sliding_gaussian",
    "MeanVectorReport",
    "stage_average",
    "invariance_defect",
    "mean_vector",
    "SCHEME_KINDS",
]

BLOW_UP_THRESHOLD = 1e6
SCHEME_KINDS = ("box", "cesaro", "gaussian")


@dataclass
class MeanVectorReport:
    """Converged (or not) limit of stage averages."""

    value: Vector
    stage: int
    cauchy_residual: float
    converged: bool


class AveragingScheme:
    """A rule assigning, to every stage n, convex weights on semigroup addresses."""

    kind = "abstract"

    def weights(self, n: int, k: int) -> dict:
        """Map address -> weight at stage n for a k-generator commutative action."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}()"


class CesaroAverage(AveragingScheme):
    """Uniform weights on T^1 .. T^n; single generator only (the window starts at T^1)."""

    kind = "cesaro"

    def weights(self, n: int, k: int) -> dict:
        if k != 1:
            raise ValueError("cesaro averaging expects a single-generator action")
        w = 1.0 / n
        return {(i,): w for i in range(1, n + 1)}


class BoxAverage(AveragingScheme):
    """Uniform weights on the box 1 <= n_i <= n of N^k."""

    kind = "box"

    def weights(self, n: int, k: int) -> dict:
        w = 1.0 / n**k
        out = {}
        for idx in np.ndindex(*([n] * k)):
            out[tuple(int(i) + 1 for i in idx)] = w
        return out


class WeightedAverage(AveragingScheme):
    """Explicit nonnegative stage weights summing to 1, via weight_fn(n, k)."""

    kind = "weighted"

    def __init__(self, weight_fn, kind: str = "weighted"):
        self.weight_fn = weight_fn
        self.kind = kind

    def weights(self, n: int, k: int) -> dict:
        raw = self.weight_fn(n, k)
        total = math.fsum(raw.values())
        if any(w < 0 for w in raw.values()):
            raise ValueError("stage weights must be nonnegative")
        if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-6):
            raise ValueError(f"stage weights must sum to 1 (got {total})")
        return {addr: w / total for addr, w in raw.items()}


def sliding_gaussian(width: float = 0.5) -> WeightedAverage:
    """Product-Gaussian weights on [1, 4n]^k centered at 2n with std width*n."""

    def weight_fn(n: int, k: int) -> dict:
        sigma = max(1.0, width * n)
        center = 2 * n
        line = np.exp(-((np.arange(1, 4 * n + 1) - center) ** 2) / (2.0 * sigma**2))
        line /= line.sum()
        out = {}
        for idx in np.ndindex(*([4 * n] * k)):
            w = 1.0
            for i in idx:
                w *= line[i]
            out[tuple(int(i) + 1 for i in idx)] = float(w)
        return out

    return WeightedAverage(weight_fn, kind="gaussian")


def _power_table(action: SemigroupAction, x: Vector, maxes, blow_up: float):
    """Orbit points T^m x for every m in the rectangle [0, maxes]; m = 0 holds x."""
    table = {tuple([0] * len(maxes)): x}
    for idx in np.ndindex(*[m + 1 for m in maxes]):
        addr = tuple(int(i) for i in idx)
        if sum(addr) == 0:
            continue
        prev, gen_index = action.predecessor(addr)
        base = x if prev is None else table[prev]
        pt = action.generators[gen_index].apply(base)
        if hl.norm(pt) > blow_up:
            raise DivergingOrbitError(
                f"orbit point at address {addr} exceeds blow-up threshold {blow_up:g}"
            )
        table[addr] = pt
    return table


def _weighted_average(weights: dict, table: dict) -> Vector:
    keys = sorted(weights)
    acc = None
    for addr in keys:
        term = weights[addr] * table[addr]
        acc = term if acc is None else acc + term
    return acc


def stage_average(scheme: AveragingScheme, action: SemigroupAction, x: Vector, n: int,
                  blow_up: float = BLOW_UP_THRESHOLD) -> Vector:
    """The scheme's convex combination of orbit points at stage n."""
    if n < 1:
        raise ValueError("stage must be >= 1")
    if action.structure != "commutative":
        raise ValueError("averaging schemes are defined on commutative actions")
    weights = scheme.weights(n, action.k)
    maxes = tuple(max(addr[i] for addr in weights) for i in range(action.k))
    table = _power_table(action, x, maxes, blow_up)
    return _weighted_average(weights, table)


def invariance_defect(scheme: AveragingScheme, action: SemigroupAction, x: Vector,
                      n: int, s, blow_up: float = BLOW_UP_THRESHOLD) -> float:
    """Norm gap between the stage average and the same average shifted by s.

    For the cesaro scheme with s = 1 this telescopes to
    ||(1/n)(T^{n+1} x - T^1 x)||, bounded by 2 sup||orbit|| / n.
    """
    if isinstance(s, int):
        s = (s,)
    action.validate_address(s)
    weights = scheme.weights(n, action.k)
    shifted = {action.compose_addresses(addr, s): w for addr, w in weights.items()}
    maxes = tuple(
        max(max(addr[i] for addr in weights), max(addr[i] for addr in shifted))
        for i in range(action.k)
    )
    table = _power_table(action, x, maxes, blow_up)
    return hl.distance(_weighted_average(weights, table), _weighted_average(shifted, table))


def mean_vector(scheme: AveragingScheme, action: SemigroupAction, x: Vector,
                tol: float = 1e-8, max_stage: int = 2**15, window: int = 3,
                blow_up: float = BLOW_UP_THRESHOLD) -> MeanVectorReport:
    """Limit of stage averages, detected by a Cauchy test over doubling stages.

    Stages run n = 1, 2, 4, ...; the report is converged once
    ||avg(2n) - avg(n)|| <= tol for `window` consecutive doublings.  Weak and
    norm convergence coincide at this scale, so the Cauchy test is sound; the
    doubling guards against slowly oscillating averages triggering early.
    """
    probe = action.orbit(x, budget=32, blow_up=blow_up)
    if probe.bounded_verdict == "no":
        raise DivergingOrbitError("orbit blew up within the boundedness probe budget")
    prev = stage_average(scheme, action, x, 1, blow_up)
    passes = 0
    n = 1
    residual = math.inf
    while 2 * n <= max_stage:
        n *= 2
        cur = stage_average(scheme, action, x, n, blow_up)
        if hl.norm(cur) > blow_up:
            raise DivergingOrbitError("stage averages exceed the blow-up threshold")
        residual = hl.distance(cur, prev)
        passes = passes + 1 if residual <= tol else 0
        prev = cur
        if passes >= window:
            return MeanVectorReport(value=cur, stage=n, cauchy_residual=residual, converged=True)
    return MeanVectorReport(value=prev, stage=n, cauchy_residual=residual, converged=False)
