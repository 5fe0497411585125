"""JSON experiment configs: parsing, validation, and descriptor -> object builders.

Every validation failure raises ConfigError carrying a JSON pointer such as
``/set/radius`` so the CLI can point at the offending key.
"""

from __future__ import annotations

import hashlib
import json
import math

from . import convex as cx
from . import ergodic as er
from . import hilbert as hl
from . import mappings as mp
from . import means as mn
from .errors import ConfigError, ErgomeanError
from .semigroup import SemigroupAction

__all__ = [
    "build_set",
    "build_mapping",
    "build_action",
    "build_scheme",
    "parse_experiments",
    "config_hash",
]

SET_KINDS = ("affine", "ball", "box", "halfline-coordinate", "halfspace",
             "intersection", "whole-space")


def config_hash(obj) -> str:
    """SHA-256 of the canonical JSON form; stable under key reordering."""
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _require(obj, key, ptr, types=None):
    if key not in obj:
        raise ConfigError(f"missing required key {key!r}", ptr)
    val = obj[key]
    if types is not None and not isinstance(val, types):
        raise ConfigError(f"key {key!r} has wrong type {type(val).__name__}", f"{ptr}/{key}")
    return val


def _number(obj, key, ptr, default=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"missing required key {key!r}", ptr)
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"key {key!r} must be a number", f"{ptr}/{key}")
    return val


def _bound_value(v, ptr):
    if v is None:
        return math.inf
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return math.inf
        if v == "-inf":
            return -math.inf
        raise ConfigError(f"bad bound literal {v!r}", ptr)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("bounds must be numbers, null, or 'inf'/'-inf'", ptr)
    return float(v)


def build_set(obj, ptr="/set") -> cx.ConvexSet:
    if not isinstance(obj, dict):
        raise ConfigError("set descriptor must be an object", ptr)
    kind = _require(obj, "kind", ptr, str)
    try:
        if kind == "whole-space":
            return cx.WholeSpace(obj.get("dim"))
        if kind == "box":
            lower = [_bound_value(v, f"{ptr}/lower") for v in _require(obj, "lower", ptr, list)]
            upper = [_bound_value(v, f"{ptr}/upper") for v in _require(obj, "upper", ptr, list)]
            return cx.Box(lower, upper)
        if kind == "ball":
            center = hl.vector_from_json(_require(obj, "center", ptr), f"{ptr}/center")
            radius = _number(obj, "radius", ptr)
            if radius < 0:
                raise ConfigError("radius must be >= 0", f"{ptr}/radius")
            return cx.Ball(center, radius)
        if kind == "halfspace":
            normal = hl.vector_from_json(_require(obj, "normal", ptr), f"{ptr}/normal")
            return cx.Halfspace(normal, _number(obj, "offset", ptr))
        if kind == "affine":
            anchor = hl.vector_from_json(_require(obj, "anchor", ptr), f"{ptr}/anchor")
            dirs = [hl.vector_from_json(d, f"{ptr}/directions/{i}")
                    for i, d in enumerate(_require(obj, "directions", ptr, list))]
            return cx.AffineSubspace(anchor, dirs)
        if kind == "halfline-coordinate":
            index = _require(obj, "index", ptr, int)
            return cx.CoordinateHalfline(index)
        if kind == "intersection":
            members = [build_set(m, f"{ptr}/members/{i}")
                       for i, m in enumerate(_require(obj, "members", ptr, list))]
            witness = hl.vector_from_json(_require(obj, "witness", ptr), f"{ptr}/witness")
            return cx.Intersection(members, witness)
    except ConfigError:
        raise
    except (ErgomeanError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), ptr)
    raise ConfigError(f"unknown set kind {kind!r}; choose from {SET_KINDS}", f"{ptr}/kind")


def build_mapping(obj, ptr="/mapping", domain: cx.ConvexSet | None = None) -> mp.Mapping:
    if not isinstance(obj, dict):
        raise ConfigError("mapping descriptor must be an object", ptr)
    kind = _require(obj, "kind", ptr, str)
    if "domain" in obj:
        domain = build_set(obj["domain"], f"{ptr}/domain")
    try:
        if kind == "rotation":
            center = hl.vector_from_json(_require(obj, "center", ptr), f"{ptr}/center")
            return mp.Rotation(center, _number(obj, "angle", ptr), domain)
        if kind == "translation":
            disp = hl.vector_from_json(_require(obj, "displacement", ptr), f"{ptr}/displacement")
            return mp.Translation(disp, domain)
        if kind == "affine":
            matrix = _require(obj, "matrix", ptr, list)
            offset = hl.vector_from_json(_require(obj, "offset", ptr), f"{ptr}/offset")
            return mp.AffineMap(matrix, offset, domain)
        if kind == "projection-map":
            target = build_set(_require(obj, "set", ptr), f"{ptr}/set")
            return mp.ProjectionMap(target, domain)
        if kind == "shift-remark33":
            return mp.PrependShift()
        if kind == "sqrt-section3":
            return mp.SqrtWithJump()
        if kind == "endpoint-step":
            return mp.EndpointStep(_number(obj, "upper", ptr, 3.0), _number(obj, "value", ptr, 1.0))
        if kind == "composition":
            maps = [build_mapping(m, f"{ptr}/maps/{i}", domain)
                    for i, m in enumerate(_require(obj, "maps", ptr, list))]
            return mp.Composition(maps)
    except ConfigError:
        raise
    except (ErgomeanError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), ptr)
    raise ConfigError(f"unknown mapping kind {kind!r}; choose from {mp.MAPPING_KINDS}",
                      f"{ptr}/kind")


def build_action(obj, ptr="/action", domain: cx.ConvexSet | None = None) -> SemigroupAction:
    if not isinstance(obj, dict):
        raise ConfigError("action descriptor must be an object", ptr)
    structure = obj.get("structure", "commutative")
    if structure not in ("commutative", "free-words"):
        raise ConfigError(f"unknown structure {structure!r}", f"{ptr}/structure")
    gens_obj = _require(obj, "generators", ptr, list)
    if not gens_obj:
        raise ConfigError("generators must be a nonempty list", f"{ptr}/generators")
    gens = [build_mapping(g, f"{ptr}/generators/{i}", domain) for i, g in enumerate(gens_obj)]
    try:
        return SemigroupAction(gens, structure=structure)
    except (ErgomeanError, ValueError) as exc:
        raise ConfigError(str(exc), ptr)


def build_scheme(obj, ptr="/scheme") -> mn.AveragingScheme:
    if not isinstance(obj, dict):
        raise ConfigError("scheme descriptor must be an object", ptr)
    kind = _require(obj, "kind", ptr, str)
    if kind == "cesaro":
        return mn.CesaroAverage()
    if kind == "box":
        return mn.BoxAverage()
    if kind == "gaussian":
        width = _number(obj, "width", ptr, 0.5)
        if width <= 0:
            raise ConfigError("width must be > 0", f"{ptr}/width")
        return mn.sliding_gaussian(width)
    raise ConfigError(f"unknown scheme kind {kind!r}; choose from {mn.SCHEME_KINDS}",
                      f"{ptr}/kind")


def _build_budgets(obj, ptr) -> er.Budgets:
    budgets = er.Budgets()
    for key in obj:
        if not hasattr(budgets, key):
            raise ConfigError(f"unknown budget {key!r}", f"{ptr}/{key}")
        val = _number(obj, key, ptr)
        if val <= 0:
            raise ConfigError(f"budget {key!r} must be > 0", f"{ptr}/{key}")
        setattr(budgets, key, type(getattr(budgets, key))(val))
    return budgets


def _build_tolerances(obj, ptr, scale: float) -> er.Tolerances:
    tol = er.Tolerances()
    for key in obj:
        if not hasattr(tol, key):
            raise ConfigError(f"unknown tolerance {key!r}", f"{ptr}/{key}")
        val = _number(obj, key, ptr)
        if val < 0:
            raise ConfigError(f"tolerance {key!r} must be >= 0", f"{ptr}/{key}")
        setattr(tol, key, float(val))
    return tol.scaled(scale) if scale != 1.0 else tol


def parse_experiment(obj, ptr="", seed_override=None, tol_scale: float = 1.0) -> er.ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigError("experiment must be an object", ptr or "/")
    name = obj.get("name", "experiment")
    if not isinstance(name, str):
        raise ConfigError("name must be a string", f"{ptr}/name")
    kind = obj.get("kind", "ergodic")
    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer", f"{ptr}/seed")
    if seed_override is not None:
        seed = seed_override
    tolerances = _build_tolerances(obj.get("tolerances", {}), f"{ptr}/tolerances", tol_scale)
    budgets = _build_budgets(obj.get("budgets", {}), f"{ptr}/budgets")
    if kind == "counterexample":
        target = _require(obj, "target", ptr or "/", str)
        if target not in er.COUNTEREXAMPLE_NAMES:
            raise ConfigError(
                f"unknown counterexample {target!r}; choose from {er.COUNTEREXAMPLE_NAMES}",
                f"{ptr}/target")
        return er.ExperimentConfig(name=name, kind="counterexample", counterexample=target,
                                   seed=seed, budgets=budgets, tolerances=tolerances, raw=obj)
    if kind != "ergodic":
        raise ConfigError(f"unknown experiment kind {kind!r}", f"{ptr}/kind")
    domain = build_set(obj["set"], f"{ptr}/set") if "set" in obj else None
    action = build_action(_require(obj, "action", ptr or "/"), f"{ptr}/action", domain)
    start = hl.vector_from_json(_require(obj, "start", ptr or "/"), f"{ptr}/start")
    scheme = build_scheme(obj.get("scheme", {"kind": "cesaro"}), f"{ptr}/scheme")
    if not action.domain.contains(start, 1e-9):
        raise ConfigError("start point is not in the acted-on set", f"{ptr}/start")
    return er.ExperimentConfig(name=name, kind="ergodic", action=action,
                               cset=action.domain, start=start, scheme=scheme,
                               budgets=budgets, tolerances=tolerances, seed=seed, raw=obj)


def parse_experiments(obj, seed_override=None, tol_scale: float = 1.0) -> list:
    """Parse a config holding one experiment or {"experiments": [...]}."""
    if isinstance(obj, dict) and "experiments" in obj:
        experiments = obj["experiments"]
        if not isinstance(experiments, list) or not experiments:
            raise ConfigError("experiments must be a nonempty list", "/experiments")
        return [parse_experiment(e, f"/experiments/{i}", seed_override, tol_scale)
                for i, e in enumerate(experiments)]
    return [parse_experiment(obj, "", seed_override, tol_scale)]
