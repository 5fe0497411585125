"""Discrete semigroup actions on convex sets: N^k via commuting generators, or free words.

Element addresses are multi-indices (n1, ..., nk) with sum >= 1 for the
commutative structure, and nonempty generator strings like "aba" for the free
structure.  Orbits are enumerated in graded-lexicographic (resp. length-
lexicographic) order, which refines the translate order used by the averaging
and projection nets.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass

from . import convex as cx
from . import hilbert as hl
from .errors import InvalidAddressError
from .hilbert import Vector
from .mappings import Mapping, PropertyReport

__all__ = [
    "SemigroupAction",
    "OrbitTrace",
    "act",
    "orbit",
    "check_commuting",
    "graded_addresses",
    "word_addresses",
]

BLOW_UP_THRESHOLD = 1e6
_ALPHABET = string.ascii_lowercase


@dataclass
class OrbitTrace:
    """Orbit points in enumeration order, their max norm, and a boundedness verdict.

    The verdict is "no" (blow-up threshold exceeded) or "unknown": boundedness
    can never be confirmed from finitely many points, so "yes" is never emitted.
    """

    points: list
    max_norm: float
    bounded_verdict: str


def _compositions(total: int, parts: int):
    """Multi-indices with the given coordinate sum, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def graded_addresses(k: int):
    """All N^k addresses with sum >= 1, graded by sum then lexicographic."""
    for grade in itertools.count(1):
        yield from _compositions(grade, k)


def word_addresses(k: int):
    """All nonempty words over the first k letters, by length then lexicographic."""
    letters = _ALPHABET[:k]
    for length in itertools.count(1):
        for tup in itertools.product(letters, repeat=length):
            yield "".join(tup)


class SemigroupAction:
    """A representation of N^k (commutative) or a free word semigroup on a convex set."""

    def __init__(self, generators, structure: str = "commutative",
                 check_samples: int = 6, tol: float = 1e-8, seed: int = 0):
        generators = list(generators)
        if not generators:
            raise ValueError("an action needs at least one generator")
        if structure not in ("commutative", "free-words"):
            raise ValueError(f"unknown structure {structure!r}")
        if len(generators) > len(_ALPHABET):
            raise ValueError("too many generators")
        domain = generators[0].domain
        for g in generators[1:]:
            if g.domain != domain:
                raise ValueError("generators must share a domain")
        self.generators = generators
        self.structure = structure
        self.domain = domain
        if structure == "commutative" and len(generators) > 1:
            report = check_commuting(generators, samples=check_samples, tol=tol, seed=seed)
            if not report:
                x, i, j, gap = report.witness
                raise ValueError(
                    f"generators {i} and {j} do not commute (gap {gap:.3e} at {x!r})"
                )

    @property
    def k(self) -> int:
        return len(self.generators)

    def validate_address(self, s):
        if self.structure == "commutative":
            if (not isinstance(s, tuple) or len(s) != self.k
                    or any(not isinstance(n, int) or n < 0 for n in s) or sum(s) < 1):
                raise InvalidAddressError(
                    f"address {s!r} is not a multi-index of length {self.k} with sum >= 1"
                )
        else:
            letters = _ALPHABET[: self.k]
            if not isinstance(s, str) or not s or any(ch not in letters for ch in s):
                raise InvalidAddressError(
                    f"address {s!r} is not a nonempty word over {letters!r}"
                )

    def act(self, s, x: Vector) -> Vector:
        """Apply the element at address s by repeated generator application."""
        self.validate_address(s)
        if self.structure == "commutative":
            for i, count in enumerate(s):
                g = self.generators[i]
                for _ in range(count):
                    x = g.apply(x)
            return x
        for ch in reversed(s):
            x = self.generators[_ALPHABET.index(ch)].apply(x)
        return x

    def compose_addresses(self, s, t):
        """Address of the product s*t (so that T_{s*t} = T_s after T_t)."""
        self.validate_address(s)
        self.validate_address(t)
        if self.structure == "commutative":
            return tuple(a + b for a, b in zip(s, t))
        return s + t

    def addresses(self):
        if self.structure == "commutative":
            return graded_addresses(self.k)
        return word_addresses(self.k)

    def predecessor(self, s):
        """An address one step earlier plus the generator index taking it to s."""
        if self.structure == "commutative":
            for i, n in enumerate(s):
                if n > 0:
                    prev = s[:i] + (n - 1,) + s[i + 1:]
                    return (None if sum(prev) == 0 else prev), i
            raise InvalidAddressError(f"address {s!r} has no predecessor")
        prev = s[1:]
        return (prev if prev else None), _ALPHABET.index(s[0])

    def orbit(self, x: Vector, budget: int, blow_up: float = BLOW_UP_THRESHOLD) -> OrbitTrace:
        """Enumerate the first `budget` orbit points in the canonical order."""
        if budget < 1:
            raise ValueError("budget must be >= 1")
        cache = {}
        points = []
        max_norm = 0.0
        verdict = "unknown"
        for s in itertools.islice(self.addresses(), budget):
            prev, gen_index = self.predecessor(s)
            base = x if prev is None else cache[prev]
            pt = self.generators[gen_index].apply(base)
            cache[s] = pt
            points.append((s, pt))
            max_norm = max(max_norm, hl.norm(pt))
            if max_norm > blow_up:
                verdict = "no"
                break
        return OrbitTrace(points=points, max_norm=max_norm, bounded_verdict=verdict)

    def descriptor(self) -> dict:
        return {
            "structure": self.structure,
            "generators": [g.descriptor() for g in self.generators],
        }

    def __repr__(self):
        return f"SemigroupAction({self.structure}, {self.k} generator(s))"


def act(action: SemigroupAction, s, x: Vector) -> Vector:
    return action.act(s, x)


def orbit(action: SemigroupAction, x: Vector, budget: int,
          blow_up: float = BLOW_UP_THRESHOLD) -> OrbitTrace:
    return action.orbit(x, budget, blow_up)


def check_commuting(gens, samples: int = 6, tol: float = 1e-8, seed: int = 0) -> PropertyReport:
    """Falsify pairwise commutation T_i T_j x = T_j T_i x on sampled points."""
    gens = list(gens)
    if len(gens) < 2:
        return PropertyReport(holds=True, witness=None, samples_used=0,
                              note="single generator commutes vacuously")
    pts = cx.sample(gens[0].domain, samples, 3.0, seed)
    for i, j in itertools.combinations(range(len(gens)), 2):
        for x in pts:
            gap = hl.distance(gens[i].apply(gens[j].apply(x)), gens[j].apply(gens[i].apply(x)))
            if gap > tol:
                return PropertyReport(holds=False, witness=(x, i, j, gap), samples_used=samples)
    return PropertyReport(holds=True, witness=None, samples_used=samples)
