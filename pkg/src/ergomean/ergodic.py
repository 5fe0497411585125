"""Desk-scale ergodic experiments: projection nets, the mean/projection agreement
check, and the three stock counterexamples.

The central experiment tracks the net P(T_t x) of projections onto the sampled
attractive model while the averaging scheme computes the mean vector; when the
two limits land together (within the agreement tolerance) the run's verdict is
"agree".
"""

from __future__ import annotations

import csv
import io
import itertools
import os
import tempfile
from dataclasses import dataclass, field

from . import attractive as at
from . import convex as cx
from . import hilbert as hl
from . import mappings as mp
from . import means as mn
from .errors import DivergingOrbitError
from .hilbert import Vector
from .semigroup import SemigroupAction

__all__ = [
    "Budgets",
    "Tolerances",
    "ExperimentConfig",
    "ErgodicRow",
    "ErgodicTrace",
    "CounterexampleReport",
    "run_projection_net",
    "run_ergodic_check",
    "run_counterexample",
    "COUNTEREXAMPLE_NAMES",
]

COUNTEREXAMPLE_NAMES = ("shift-remark33", "sqrt-section3", "translation")
CAUCHY_WINDOW = 20


@dataclass
class Budgets:
    """Sample and iteration budgets of one experiment."""

    horizon: int = 128
    model_points: int = 16
    model_radius: float = 4.0
    model_elements: int = 3
    battery_points: int = 200
    battery_radius: float = 5.0
    orbit_budget: int = 64
    mean_max_stage: int = 2**15


@dataclass
class Tolerances:
    """Every tolerance an experiment uses, pinned up front."""

    mean_tol: float = 1e-8
    agreement_tol: float = 1e-5
    net_tol: float = 1e-6
    monotone_tol: float = 1e-9
    dykstra_tol: float = 1e-10
    battery_tol: float = 1e-6

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(**{k: v * factor for k, v in self.__dict__.items()})

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ExperimentConfig:
    """A fully built experiment: action, set, start point, scheme, budgets, tolerances."""

    name: str
    kind: str  # "ergodic" or "counterexample"
    action: SemigroupAction | None = None
    cset: cx.ConvexSet | None = None
    start: Vector | None = None
    scheme: mn.AveragingScheme | None = None
    budgets: Budgets = field(default_factory=Budgets)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    counterexample: str | None = None
    raw: dict | None = None


@dataclass
class ErgodicRow:
    stage: int
    address: object
    point: Vector
    projection: Vector
    running_average: Vector
    dist_to_projection: float
    dist_projection_to_mean: float | None
    flagged: bool


@dataclass
class ErgodicTrace:
    """Per-stage evolution of the projection net, with the final agreement verdict."""

    rows: list
    final_verdict: str
    tolerances: dict
    mean_report: mn.MeanVectorReport | None
    net_residual: float
    net_converged: bool
    flagged_rows: int
    meta: dict

    def final_distance(self):
        if self.rows and self.rows[-1].dist_projection_to_mean is not None:
            return self.rows[-1].dist_projection_to_mean
        return None

    def to_csv_text(self) -> str:
        if not self.rows:
            return ""
        d = self.rows[0].point.dim
        header = ["stage", "address", "dist_to_projection", "dist_projection_to_mean", "flagged"]
        header += [f"x_{i}" for i in range(1, d + 1)]
        header += [f"p_{i}" for i in range(1, d + 1)]
        header += [f"avg_{i}" for i in range(1, d + 1)]
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        writer.writerow(header)
        for row in self.rows:
            addr = ",".join(map(str, row.address)) if isinstance(row.address, tuple) else str(row.address)
            cells = [str(row.stage), addr, repr(row.dist_to_projection),
                     "" if row.dist_projection_to_mean is None else repr(row.dist_projection_to_mean),
                     "1" if row.flagged else "0"]
            for vec in (row.point, row.projection, row.running_average):
                cells += [repr(float(v)) for v in vec.as_array()]
            writer.writerow(cells)
        return buf.getvalue()

    def to_csv(self, path) -> None:
        _atomic_write(path, self.to_csv_text())

    def summary(self) -> dict:
        out = {
            "verdict": self.final_verdict,
            "rows": len(self.rows),
            "flagged_rows": self.flagged_rows,
            "net_residual": self.net_residual,
            "net_converged": self.net_converged,
            "final_distance_to_mean": self.final_distance(),
            "tolerances": dict(self.tolerances),
            "meta": dict(self.meta),
        }
        if self.mean_report is not None:
            out["mean"] = {
                "value": hl.vector_to_json(self.mean_report.value),
                "stage": self.mean_report.stage,
                "cauchy_residual": self.mean_report.cauchy_residual,
                "converged": self.mean_report.converged,
            }
        return out


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _predecessors(addr):
    for i, n in enumerate(addr):
        if n > 0 and sum(addr) > 1:
            yield addr[:i] + (n - 1,) + addr[i + 1:]


def run_projection_net(action: SemigroupAction, model: at.AttractiveModel, x: Vector,
                       horizon: int, monotone_tol: float = 1e-9,
                       mean_value: Vector | None = None, net_tol: float = 1e-6,
                       dykstra_tol: float = cx.DYKSTRA_TOL,
                       cauchy_window: int = CAUCHY_WINDOW) -> ErgodicTrace:
    """Track P_model(T_t x) along the graded enumeration of the semigroup.

    The distance ||T_t x - P(T_t x)|| must be non-increasing along the
    semigroup order; a row is flagged when it exceeds every enumerated
    predecessor's distance by more than monotone_tol, which signals an
    inadequate model or tolerance rather than aborting the run.
    """
    trace = action.orbit(x, horizon)
    if trace.bounded_verdict == "no":
        raise DivergingOrbitError("projection net aborted: orbit blew up")
    rows = []
    dists = {}
    running = None
    flagged_count = 0
    projections = []
    for stage, (addr, pt) in enumerate(trace.points, start=1):
        report = at.project_onto_model(model, pt, tol=dykstra_tol)
        proj = report.point
        running = pt if running is None else running + pt
        avg = (1.0 / stage) * running  # graded running average of the orbit
        dist = hl.distance(pt, proj)
        flagged = False
        if isinstance(addr, tuple):
            preds = [dists[p] for p in _predecessors(addr) if p in dists]
            if preds and dist > min(preds) + monotone_tol:
                flagged = True
        elif rows and dist > rows[-1].dist_to_projection + monotone_tol:
            flagged = True
        dists[addr] = dist
        flagged_count += int(flagged)
        dmean = None if mean_value is None else hl.distance(proj, mean_value)
        rows.append(ErgodicRow(stage=stage, address=addr, point=pt, projection=proj,
                               running_average=avg, dist_to_projection=dist,
                               dist_projection_to_mean=dmean, flagged=flagged))
        projections.append(proj)
    tail = projections[-cauchy_window:]
    net_residual = 0.0
    for a, b in itertools.combinations(tail, 2):
        net_residual = max(net_residual, hl.distance(a, b))
    net_converged = net_residual <= net_tol
    verdict = "inconclusive"
    if mean_value is not None and rows and net_converged:
        final = rows[-1].dist_projection_to_mean
        verdict = "agree" if final <= net_tol else "disagree"
    return ErgodicTrace(rows=rows, final_verdict=verdict,
                        tolerances={"monotone_tol": monotone_tol, "net_tol": net_tol,
                                    "dykstra_tol": dykstra_tol},
                        mean_report=None, net_residual=net_residual,
                        net_converged=net_converged, flagged_rows=flagged_count,
                        meta={"horizon": horizon, "model_constraints": len(model)})


def run_ergodic_check(config: ExperimentConfig) -> ErgodicTrace:
    """Compute the mean vector and the projection net, and compare their limits.

    Verdict: "agree" when both converge and the final projection sits within
    the agreement tolerance of the mean vector, "disagree" when both converge
    elsewhere, "inconclusive" when either limit fails to settle.
    """
    action, scheme, tol, bud = config.action, config.scheme, config.tolerances, config.budgets
    x = config.start
    probe = action.orbit(x, bud.orbit_budget)
    if probe.bounded_verdict == "no":
        raise DivergingOrbitError("ergodic check aborted: orbit blew up within budget")
    mean = mn.mean_vector(scheme, action, x, tol=tol.mean_tol, max_stage=bud.mean_max_stage)
    sample_x = cx.sample(action.domain, bud.model_points, bud.model_radius, config.seed)
    elements = list(itertools.islice(action.addresses(), bud.model_elements))
    model = at.build_model(action, sample_x, elements)
    trace = run_projection_net(action, model, x, bud.horizon,
                               monotone_tol=tol.monotone_tol, mean_value=mean.value,
                               net_tol=tol.net_tol, dykstra_tol=tol.dykstra_tol)
    final = trace.final_distance()
    if not mean.converged or not trace.net_converged:
        verdict = "inconclusive"
    elif final <= tol.agreement_tol:
        verdict = "agree"
    else:
        verdict = "disagree"
    trace.final_verdict = verdict
    trace.mean_report = mean
    trace.tolerances = tol.as_dict()
    trace.meta.update({"name": config.name, "seed": config.seed,
                       "scheme": scheme.kind, "structure": action.structure,
                       "generators": action.k})
    return trace


# -- counterexamples -------------------------------------------------------------


@dataclass
class CheckResult:
    label: str
    ok: bool
    value: object


@dataclass
class CounterexampleReport:
    """Outcome of one stock counterexample; passed means the phenomenon was confirmed."""

    name: str
    passed: bool
    checks: list

    def summary(self) -> dict:
        return {
            "counterexample": self.name,
            "verdict": "pass" if self.passed else "fail",
            "checks": [{"label": c.label, "ok": c.ok, "value": c.value} for c in self.checks],
        }


def _grid_values():
    # 11 points spanning [-2, 2]
    return [round(-2.0 + 0.4 * i, 10) for i in range(11)]


def _refute_shift_candidates(mapping) -> tuple:
    """Refute attractiveness of every grid candidate; x = 5 e_1 settles them all."""
    battery = [hl.sparse({1: 1.0}), hl.sparse({1: 1.0, 2: 1.0}), hl.sparse({1: 5.0})]
    refuted = 0
    witnesses = {}
    total = 0
    for a1 in _grid_values():
        for a2 in _grid_values():
            for a3 in _grid_values():
                total += 1
                a = hl.sparse({1: a1, 2: a2, 3: a3})
                for x in battery:
                    gap = hl.distance(a, mapping.apply(x)) - hl.distance(a, x)
                    if gap > 0:
                        refuted += 1
                        witnesses[(a1, a2, a3)] = (x, gap)
                        break
    return refuted, total, witnesses


def _counterexample_shift(seed: int) -> CounterexampleReport:
    mapping = mp.PrependShift()
    zero = hl.zero_sparse()
    residual = hl.distance(mapping.apply(zero), zero)
    refuted, total, _ = _refute_shift_candidates(mapping)
    nonexp = mp.check_nonexpansive(mapping, samples=100, radius=3.0, seed=seed)
    checks = [
        CheckResult("fixed_point_residual_at_zero_is_exactly_zero", residual == 0.0, residual),
        CheckResult("all_grid_candidates_refuted", refuted == total,
                     {"refuted": refuted, "total": total}),
        CheckResult("map_is_nonexpansive", nonexp.holds, nonexp.samples_used),
    ]
    return CounterexampleReport("shift-remark33", all(c.ok for c in checks), checks)


def _counterexample_translation(seed: int) -> CounterexampleReport:
    v = hl.dense([1.0, 0.0])
    mapping = mp.Translation(v)
    action = SemigroupAction([mapping])
    vnorm = hl.norm(v)
    nonexp = mp.check_nonexpansive(mapping, samples=100, radius=5.0, seed=seed)
    displacement = min(
        hl.distance(mapping.apply(x), x)
        for x in cx.sample(mapping.domain, 50, 10.0, seed)
    )
    trace = action.orbit(hl.zeros(2), budget=100, blow_up=50.0 * vnorm)
    avg = mn.stage_average(mn.CesaroAverage(), action, hl.zeros(2), 1000)
    avg_norm = hl.norm(avg)
    expected = 500.5 * vnorm
    defect = mn.invariance_defect(mn.CesaroAverage(), action, hl.zeros(2), 100, (1,))
    checks = [
        CheckResult("map_is_nonexpansive", nonexp.holds, nonexp.samples_used),
        CheckResult("no_point_moves_less_than_the_displacement",
                    abs(displacement - vnorm) <= 1e-12, displacement),
        CheckResult("orbit_flagged_unbounded", trace.bounded_verdict == "no",
                    {"max_norm": trace.max_norm, "threshold": 50.0 * vnorm}),
        CheckResult("cesaro_average_norm_at_1000_is_500p5_v",
                    abs(avg_norm - expected) <= 1e-9 * expected, avg_norm),
        CheckResult("invariance_defect_stays_at_v", abs(defect - vnorm) <= 1e-12, defect),
    ]
    return CounterexampleReport("translation", all(c.ok for c in checks), checks)


def _counterexample_sqrt(seed: int) -> CounterexampleReport:
    mapping = mp.SqrtWithJump()
    image_of_zero = mapping.apply(hl.dense([0.0]))
    x, y = hl.dense([0.0]), hl.dense([0.01])
    gap = hl.distance(mapping.apply(x), mapping.apply(y)) - hl.distance(x, y)
    nonexp = mp.check_nonexpansive(mapping, samples=200, radius=2.0, seed=seed)
    asymptotic = mp.check_asymptotically_nonexpansive(mapping, samples=40, n_tail=50,
                                                      radius=2.0, seed=seed)
    checks = [
        CheckResult("zero_maps_to_one", image_of_zero == hl.dense([1.0]),
                    hl.vector_to_json(image_of_zero)),
        CheckResult("nonexpansive_gap_at_witness_at_least_0.89", gap >= 0.89, gap),
        CheckResult("nonexpansive_check_fails", not nonexp.holds,
                    None if nonexp.witness is None else nonexp.witness[2]),
        CheckResult("asymptotic_surrogate_passes", asymptotic.holds, asymptotic.note),
    ]
    return CounterexampleReport("sqrt-section3", all(c.ok for c in checks), checks)


def run_counterexample(name: str, seed: int = 0) -> CounterexampleReport:
    """Reproduce one stock counterexample and report whether it is confirmed."""
    if name == "shift-remark33":
        return _counterexample_shift(seed)
    if name == "translation":
        return _counterexample_translation(seed)
    if name == "sqrt-section3":
        return _counterexample_sqrt(seed)
    raise ValueError(f"unknown counterexample {name!r}; choose from {COUNTEREXAMPLE_NAMES}")
