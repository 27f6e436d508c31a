"""Per-N measure scans, scaling verdicts and the hierarchy implication suite."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import CapacityError, check_capacity
from .fisher import DEFAULT_OPTIMIZER, OptimizerConfig
from .library import build_state, build_superposition, valid_sizes
from .measures import (MeasureResult, bjork_mana_approx, index_p, index_q_scan, korsbakken,
                       marquardt, neff_f_measure, relative_fisher)
from .states import StateSpec


@dataclass(frozen=True)
class MeasureConfig:
    """Knobs shared by every measure evaluation.

    ``delta`` is only read by the Korsbakken measure.
    """

    max_group_size: int = 1
    delta: float = 0.1
    korsbakken_search: str = "auto"
    optimizer: OptimizerConfig = DEFAULT_OPTIMIZER


@dataclass(frozen=True)
class ScalingThresholds:
    macroscopic: float = 0.8
    microscopic: float = 0.2
    min_points: int = 4


def _neff_f(spec, cfg):
    return neff_f_measure(build_state(spec), cfg.max_group_size, cfg.optimizer)


def _index_p(spec, cfg):
    return index_p(build_state(spec), cfg.max_group_size, cfg.optimizer)


def _index_q(spec, cfg):
    return index_q_scan(build_state(spec), cfg.max_group_size, cfg.optimizer)


def _rel_fisher(spec, cfg):
    return relative_fisher(build_superposition(spec), cfg.max_group_size, cfg.optimizer)


def _bjork_mana(spec, cfg):
    return bjork_mana_approx(build_superposition(spec), cfg.max_group_size)


def _korsbakken(spec, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return korsbakken(build_superposition(spec), cfg.delta, cfg.korsbakken_search)


def _marquardt(spec, cfg):
    return marquardt(build_superposition(spec))


MEASURE_REGISTRY = {
    "neff_f": _neff_f,
    "index_p": _index_p,
    "index_q": _index_q,
    "rel_fisher": _rel_fisher,
    "bjork_mana": _bjork_mana,
    "korsbakken": _korsbakken,
    "marquardt": _marquardt,
}

# measures that need a two-branch family
BRANCH_MEASURES = ("rel_fisher", "bjork_mana", "korsbakken", "marquardt")


_MEMO: dict = {}


def compute_measure(measure_id: str, spec, config: MeasureConfig = MeasureConfig()) -> MeasureResult:
    """Evaluate a registered measure; results are memoized per process."""
    if measure_id not in MEASURE_REGISTRY:
        raise KeyError(f"unknown measure {measure_id!r}; known: {', '.join(MEASURE_REGISTRY)}")
    spec = StateSpec.parse(spec) if isinstance(spec, str) else spec
    if spec.num_qubits is not None:
        check_capacity(spec.num_qubits)  # the cap may change between calls
    key = (measure_id, str(spec), config)
    if key not in _MEMO:
        _MEMO[key] = MEASURE_REGISTRY[measure_id](spec, config)
    return _MEMO[key]


def fit_exponent(ns, values) -> tuple[float, float]:
    """Least-squares ``log v = b log N + log a``; returns ``(b, a)``."""
    slope, icpt = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope), float(math.exp(icpt))


def verdict_for(exponent: float | None, thresholds: ScalingThresholds = ScalingThresholds()) -> str:
    if exponent is None:
        return "indeterminate"
    if exponent >= thresholds.macroscopic:
        return "macroscopic"
    if exponent <= thresholds.microscopic:
        return "microscopic"
    return "indeterminate"


@dataclass
class ScalingReport:
    measure_id: str
    family: str
    points: list = field(default_factory=list)
    exponent: float | None = None
    prefactor: float | None = None
    verdict: str = "indeterminate"
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"measure": self.measure_id, "family": self.family, "points": self.points,
                "exponent": self.exponent, "prefactor": self.prefactor,
                "verdict": self.verdict, "notes": self.notes}

    def csv_rows(self):
        spec = StateSpec.parse(self.family)
        params = ";".join(f"{k}={v}" for k, v in sorted(spec.params.items()))
        for p in self.points:
            yield (p["N"], p["neff"], self.measure_id, spec.family, params)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("N", "neff", "measure_id", "family", "params"))
        for n, v, m, fam, params in self.csv_rows():
            w.writerow((n, f"{v:.12g}", m, fam, params))
        return buf.getvalue()


class ScanFailure(RuntimeError):
    """A per-N computation failed; ``report`` holds the points done so far."""

    def __init__(self, message: str, report: ScalingReport):
        super().__init__(message)
        self.report = report


def classify_scaling(measure_id: str, family, ns, config: MeasureConfig = MeasureConfig(),
                     thresholds: ScalingThresholds = ScalingThresholds()) -> ScalingReport:
    """Evaluate ``measure_id`` on ``family`` for each N and fit the exponent.

    Sizes beyond the capacity cap are skipped with a note.  Points flagged
    undefined are kept but excluded from the fit; if any point is undefined
    the verdict is ``undefined``.  Non-positive values cannot enter a
    log-log fit and make the verdict ``microscopic`` when every value is 0.
    """
    template = StateSpec.parse(family) if isinstance(family, str) else family
    report = ScalingReport(measure_id, str(template))
    for n in ns:
        try:
            res = compute_measure(measure_id, template.with_n(n), config)
        except CapacityError as exc:
            report.notes.append(f"N={n} skipped: {exc}")
            continue
        except Exception as exc:
            report.notes.append(f"N={n} failed: {exc}")
            raise ScanFailure(f"{measure_id} on {template} failed at N={n}: {exc}", report) from exc
        report.points.append({"N": int(n), "neff": float(res.neff), "undefined": res.undefined})
    fit = [(p["N"], p["neff"]) for p in report.points if not p["undefined"] and p["neff"] > 0]
    if any(p["undefined"] for p in report.points):
        report.verdict = "undefined"
    elif report.points and all(p["neff"] <= 0 for p in report.points):
        report.verdict = "microscopic"
        report.notes.append("all values are zero")
    if len(fit) >= max(2, thresholds.min_points):
        report.exponent, report.prefactor = fit_exponent(*zip(*fit))
        if report.verdict == "indeterminate":
            report.verdict = verdict_for(report.exponent, thresholds)
    elif report.verdict == "indeterminate":
        report.notes.append(f"only {len(fit)} usable points; need {thresholds.min_points}")
    return report


# ---------------------------------------------------------------------------
# hierarchy


HIERARCHY_MEASURES = ("rel_fisher", "bjork_mana", "korsbakken", "marquardt", "neff_f")

# branch pairs related by a product of single-qubit unitaries
LOCAL_UNITARY_RELATED = ("ghz", "gen_ghz", "logical_ghz", "cluster_ghz", "quantum_classical")

HIERARCHY_LIBRARY = (
    "ghz", "gen_ghz:eps=0.7853981633974483", "logical_ghz",
    "cluster_ghz", "ps_domain_wall", "quantum_classical", "cloned",
)


def hierarchy_sizes(family, lo: int = 5, hi: int = 12, points: int = 4) -> list:
    """Up to ``points`` valid sizes spread evenly over ``[lo, hi]``."""
    ns = valid_sizes(family, lo, hi)
    if len(ns) <= points:
        return ns
    idx = sorted({round(i * (len(ns) - 1) / (points - 1)) for i in range(points)})
    return [ns[i] for i in idx]


# cluster-GHZ only has 6, 9 and 12 below the default cap
HIERARCHY_THRESHOLDS = ScalingThresholds(min_points=3)


def family_verdicts(family, ns, config: MeasureConfig,
                    thresholds: ScalingThresholds = ScalingThresholds(),
                    measures=HIERARCHY_MEASURES) -> dict:
    return {m: classify_scaling(m, family, ns, config, thresholds) for m in measures}


_MACRO, _MICRO = "macroscopic", "microscopic"


def _implies(a: str, b: str) -> bool:
    return not (a == _MACRO and b == _MICRO)


def _equiv(a: str, b: str) -> bool:
    return _implies(a, b) and _implies(b, a)


def hierarchy_violations(family: str, verdicts: dict) -> list:
    """Definite verdict pairs that contradict rF<=>B, B=>K, K<=>M, K=>F.

    Only macroscopic-versus-microscopic contradictions count; indeterminate
    and undefined verdicts never violate.  K<=>M is checked only for
    branch pairs related by local unitaries.
    """
    v = {m: r.verdict if isinstance(r, ScalingReport) else r for m, r in verdicts.items()}
    out = []
    if not _equiv(v["rel_fisher"], v["bjork_mana"]):
        out.append("rF<=>B")
    if not _implies(v["bjork_mana"], v["korsbakken"]):
        out.append("B=>K")
    if StateSpec.parse(family).family in LOCAL_UNITARY_RELATED and not _equiv(
            v["korsbakken"], v["marquardt"]):
        out.append("K<=>M")
    if not _implies(v["korsbakken"], v["neff_f"]):
        out.append("K=>F")
    return out

