"""Command-line front end.

Subcommands
-----------
measure   evaluate measures on one state, e.g.
          ``macroscopicity measure --state ghz:8 --measures neff_f``
table     the six-family comparison table at one N with scaling verdicts
scan      one measure over several N with a fitted exponent
check     hierarchy implications plus the Fleming, Bures and classical
          Fisher inequality suites

State specs are ``family[:N][:key=value]...``; families: see ``--help``.
Groupings are written ``1|2|3`` or ``1-3|4-6`` (cyclic blocks as
``8,9,1``).

Exit codes: 0 success, 2 usage, 3 capacity, 4 measure undefined,
5 property failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .config import CapacityError
from .fisher import OptimizerConfig
from .library import TABLE_ROWS, build_state, build_superposition
from .measures import MeasureUndefined, bjork_mana_exact
from .observables import collective_pauli
from .scaling import (HIERARCHY_LIBRARY, HIERARCHY_THRESHOLDS, MEASURE_REGISTRY, MeasureConfig,
                      ScalingThresholds, ScanFailure, classify_scaling, compute_measure,
                      family_verdicts, hierarchy_sizes, hierarchy_violations)
from .states import FAMILIES, StateSpec

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_UNDEFINED, EXIT_PROPERTY = 0, 2, 3, 4, 5

EXTRA_MEASURES = ("bjork_mana_exact",)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    state_spec: str | None = None
    measure_ids: list = field(default_factory=list)
    n_list: list = field(default_factory=list)
    delta: float | None = None
    max_group_size: int = 1
    seed: int = 0
    output_format: str = "json"
    output_path: str | None = None

    def measure_config(self) -> MeasureConfig:
        delta = 0.1 if self.delta is None else self.delta
        return MeasureConfig(max_group_size=self.max_group_size, delta=delta,
                             optimizer=OptimizerConfig(seed=self.seed))

    def validate(self) -> None:
        if self.command == "scan" and not self.n_list:
            raise UsageError("scan needs a non-empty --ns list")
        if "korsbakken" in self.measure_ids and self.delta is None:
            raise UsageError("the korsbakken measure needs an explicit --delta")
        if self.delta is not None and not 0 < self.delta < 0.5:
            raise UsageError("--delta must lie in (0, 1/2)")
        if not 1 <= self.max_group_size <= 3:
            raise UsageError("--max-group-size must be 1, 2 or 3")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def dump_json(report: dict) -> str:
    return json.dumps(_jsonable({"schema_version": SCHEMA_VERSION, **report}),
                      sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    import csv
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# measure


def cmd_measure(cfg: RunConfig) -> dict:
    spec = StateSpec.parse(cfg.state_spec)
    if spec.num_qubits is None:
        raise UsageError("--state needs a qubit count, e.g. ghz:8")
    mcfg = cfg.measure_config()
    results = []
    for mid in cfg.measure_ids:
        if mid == "bjork_mana_exact":
            sup = build_superposition(spec)
            res = bjork_mana_exact(sup, collective_pauli(spec.num_qubits, "y"))
        else:
            res = compute_measure(mid, spec, mcfg)
        results.append(res.to_json())
    return {"command": "measure", "state": str(spec), "max_group_size": cfg.max_group_size,
            "delta": cfg.delta, "seed": cfg.seed, "results": results}


# ---------------------------------------------------------------------------
# table

TABLE_MEASURES = ("rel_fisher", "korsbakken", "marquardt", "neff_f")


def _row_size(family: str, n: int) -> int:
    fam = StateSpec.parse(family).family
    m = n
    while m > 1:
        if fam == "cluster_ghz" and (m % 3 or m < 6):
            m -= 1
            continue
        if fam in ("quantum_classical", "logical_ghz") and m % 2:
            m -= 1
            continue
        if fam == "cloned" and m % 2 == 0:
            m -= 1
            continue
        return m
    raise UsageError(f"no valid size for {family} at or below N={n}")


def reference_cells(family: str, n: int, delta: float) -> dict:
    """Expected entries per column: ``("exact", v)``, ``("approx", v, tol)``
    (absolute), ``("verdict", class)`` or ``None`` for open cells."""
    spec = StateSpec.parse(family)
    fam = spec.family
    if fam == "ghz":
        return {m: ("exact", float(n)) for m in TABLE_MEASURES}
    if fam == "gen_ghz":
        eps = float(spec.params["eps"])
        rf = n * math.sin(eps) ** 2 + math.cos(eps) ** 2
        return {"rel_fisher": ("approx", rf, 0.1 * rf),
                "korsbakken": ("approx", n * math.log(math.cos(eps)) / math.log(delta), 1.0),
                "marquardt": ("exact", n * math.sin(eps) ** 2),
                "neff_f": ("approx", rf, 0.1 * rf)}
    if fam == "cluster_ghz":
        return {m: ("exact", n / 3) for m in TABLE_MEASURES}
    micro, macro = ("verdict", "microscopic"), ("verdict", "macroscopic")
    if fam == "ps_domain_wall":
        return {"rel_fisher": micro, "korsbakken": None, "marquardt": None, "neff_f": macro}
    if fam == "quantum_classical":
        return {"rel_fisher": micro, "korsbakken": macro, "marquardt": macro, "neff_f": macro}
    if fam == "cloned":
        return {"rel_fisher": micro, "korsbakken": micro, "marquardt": micro, "neff_f": macro}
    return {m: None for m in TABLE_MEASURES}


def _cell_match(ref, value: float, verdict: str):
    if ref is None:
        return None
    if ref[0] == "exact":
        return abs(value - ref[1]) <= 1e-6
    if ref[0] == "approx":
        return abs(value - ref[1]) <= ref[2]
    return verdict == ref[1]


def cmd_table(cfg: RunConfig, scan_max: int = 12) -> dict:
    n = cfg.n_list[0] if cfg.n_list else 9
    mcfg = cfg.measure_config()
    rows = []
    for label, family in TABLE_ROWS:
        m = _row_size(family, n)
        spec = StateSpec.parse(family).with_n(m)
        refs = reference_cells(family, m, mcfg.delta)
        ns = hierarchy_sizes(family, 5, scan_max)
        cells = {}
        for mid in TABLE_MEASURES:
            res = compute_measure(mid, spec, mcfg)
            rep = classify_scaling(mid, family, ns, mcfg, HIERARCHY_THRESHOLDS)
            ref = refs[mid]
            cells[mid] = {
                "value": res.neff,
                "undefined": res.undefined,
                "verdict": rep.verdict,
                "exponent": rep.exponent,
                "scan_sizes": ns,
                "reference": None if ref is None else list(ref),
                "match": _cell_match(ref, res.neff, rep.verdict),
            }
        rows.append({"row": label, "state": str(spec), "cells": cells})
    return {"command": "table", "N": n, "delta": mcfg.delta,
            "max_group_size": cfg.max_group_size, "seed": cfg.seed, "rows": rows}


def table_mismatches(report: dict) -> list:
    return [(r["row"], m) for r in report["rows"] for m, c in r["cells"].items()
            if c["match"] is False]


# ---------------------------------------------------------------------------
# scan


def cmd_scan(cfg: RunConfig, min_points: int = 4):
    if len(cfg.measure_ids) != 1:
        raise UsageError("scan takes exactly one measure")
    rep = classify_scaling(cfg.measure_ids[0], cfg.state_spec, cfg.n_list, cfg.measure_config(),
                           ScalingThresholds(min_points=min_points))
    return rep


# ---------------------------------------------------------------------------
# check


def inequality_suites(n: int = 8, seed: int = 0) -> dict:
    """Fleming bound on library states x collective Paulis, Bures speed on
    random mixed states, classical Fisher below quantum Fisher for random
    projective measurements."""
    from . import dynamics as dy
    from .fisher import qfi_any
    rng = np.random.default_rng(seed)
    out = {}
    states = ["ghz", "gen_ghz:eps=0.5", "w", "cluster", "domain_wall", "product_plus"]
    fails = []
    count = 0
    for fam in states:
        st = build_state(StateSpec.parse(fam).with_n(n))
        for axis in "xyz":
            H = collective_pauli(n, axis)
            f = qfi_any(st, H)
            ts = np.linspace(0, math.pi / math.sqrt(f), 25) if f > 1e-12 else np.linspace(0, 1, 5)
            rep = dy.fleming_report(st, H, ts)
            count += 1
            if not rep.passed:
                fails.append(f"{fam}/{axis}")
    out["fleming"] = {"pairs": count, "failures": fails}
    k = min(n, 4)
    bures_fail = []
    for i in range(10):
        rho = _random_mixed(k, 1 + i % 3, rng)
        H = collective_pauli(k, rng.standard_normal(3))
        if not dy.bures_consistency_check(rho, H):
            bures_fail.append(i)
    out["bures"] = {"samples": 10, "failures": bures_fail}
    cfi_fail = []
    for i in range(10):
        rho = _random_mixed(k, 1 + i % 3, rng)
        H = collective_pauli(k, rng.standard_normal(3))
        povm = dy.projective_povm(_random_hermitian(2 ** k, rng))
        fam = dy.encoded_family(rho, H)
        cf = dy.classical_fisher(fam, povm, 0.3)
        if cf > qfi_any(fam(0.3), H) + 1e-4:
            cfi_fail.append(i)
    out["classical_fisher"] = {"samples": 10, "failures": cfi_fail}
    return out


def _random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def _random_mixed(k, rank, rng):
    from .core import DensityOperator
    d = 2 ** k
    x = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = x @ x.conj().T
    return DensityOperator.from_matrix(m / np.trace(m).real)


def cmd_check(cfg: RunConfig, scan_max: int = 12) -> dict:
    n = cfg.n_list[0] if cfg.n_list else 8
    mcfg = cfg.measure_config()
    hier = []
    for fam in HIERARCHY_LIBRARY:
        ns = hierarchy_sizes(fam, 5, scan_max)
        verdicts = family_verdicts(fam, ns, mcfg, HIERARCHY_THRESHOLDS)
        hier.append({"family": fam, "sizes": ns,
                     "verdicts": {m: r.verdict for m, r in verdicts.items()},
                     "violations": hierarchy_violations(fam, verdicts)})
    by_family = {h["family"]: h["verdicts"] for h in hier}
    witnesses = {
        "quantum_classical": {"rel_fisher": by_family["quantum_classical"]["rel_fisher"],
                              "korsbakken": by_family["quantum_classical"]["korsbakken"]},
        "cloned": {"korsbakken": by_family["cloned"]["korsbakken"],
                   "neff_f": by_family["cloned"]["neff_f"]},
    }
    suites = inequality_suites(n, cfg.seed)
    failures = [f"hierarchy:{h['family']}:{v}" for h in hier for v in h["violations"]]
    failures += [f"{name}:{x}" for name, s in suites.items() for x in s["failures"]]
    return {"command": "check", "N": n, "delta": mcfg.delta, "max_group_size": cfg.max_group_size,
            "seed": cfg.seed, "hierarchy": hier, "strictness_witnesses": witnesses,
            "suites": suites, "failures": failures, "passed": not failures}


# ---------------------------------------------------------------------------
# text rendering


def _text(report) -> str:
    cmd = report["command"]
    lines = []
    if cmd == "measure":
        for r in report["results"]:
            flag = " (undefined)" if r["undefined"] else ""
            lines.append(f"{report['state']}  {r['measure']:<16} {r['neff']:.6g}{flag}")
    elif cmd == "table":
        lines.append(f"{'':<22}" + "".join(f"{m:>24}" for m in TABLE_MEASURES))
        for r in report["rows"]:
            cells = []
            for m in TABLE_MEASURES:
                c = r["cells"][m]
                tag = {"macroscopic": "O(N)", "microscopic": "O(1)"}.get(c["verdict"], c["verdict"])
                cells.append(f"{c['value']:.4g} [{tag}]")
            lines.append(f"{r['row']:<22}" + "".join(f"{c:>24}" for c in cells))
        lines.append(f"N={report['N']} delta={report['delta']}")
    elif cmd == "scan":
        for p in report["points"]:
            lines.append(f"N={p['N']:<4} {p['neff']:.6g}")
        lines.append(f"exponent={report['exponent']} verdict={report['verdict']}")
    elif cmd == "check":
        for h in report["hierarchy"]:
            lines.append(f"{h['family']:<36} {h['verdicts']} violations={h['violations']}")
        for name, s in report["suites"].items():
            lines.append(f"{name}: failures={s['failures']}")
        lines.append("PASS" if report["passed"] else "FAIL")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str, scan_report=None) -> str:
    if fmt == "json":
        return dump_json(report)
    if fmt == "text":
        return _text(report)
    if fmt == "csv":
        if scan_report is not None:
            return scan_report.to_csv()
        cmd = report["command"]
        if cmd == "measure":
            return _csv(("state", "measure_id", "neff", "undefined"),
                        [(report["state"], r["measure"], r["neff"], r["undefined"])
                         for r in report["results"]])
        if cmd == "table":
            return _csv(("row", "state", "measure_id", "neff", "verdict", "match"),
                        [(r["row"], r["state"], m, c["value"], c["verdict"], c["match"])
                         for r in report["rows"] for m, c in r["cells"].items()])
        raise UsageError(f"csv output is not available for {cmd}")
    raise UsageError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="macroscopicity",
        description="Effective-size measures for multi-qubit states.",
        epilog=f"state families: {', '.join(FAMILIES)}; "
               f"measures: {', '.join(list(MEASURE_REGISTRY) + list(EXTRA_MEASURES))}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--max-group-size", type=int, default=1)
        sp.add_argument("--delta", type=float, default=None,
                        help="Korsbakken error allowance in (0, 1/2)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
        sp.add_argument("--output", default=None)

    sp = sub.add_parser("measure", help="evaluate measures on one state")
    sp.add_argument("--state", required=True)
    sp.add_argument("--measures", required=True, help="comma-separated measure ids")
    common(sp)
    sp = sub.add_parser("table", help="comparison table at one N")
    sp.add_argument("--n", type=int, default=9)
    sp.add_argument("--scan-max", type=int, default=12)
    common(sp)
    sp.set_defaults(max_group_size=3)
    sp = sub.add_parser("scan", help="one measure over several N")
    sp.add_argument("--state", required=True, help="family template, e.g. gen_ghz:eps=0.3")
    sp.add_argument("--measure", required=True)
    sp.add_argument("--ns", required=True, help="comma-separated qubit counts")
    sp.add_argument("--min-points", type=int, default=4)
    common(sp)
    sp = sub.add_parser("check", help="hierarchy and inequality suites")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--scan-max", type=int, default=12)
    common(sp)
    sp.set_defaults(max_group_size=3)
    return p


def _split(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def _config(args) -> RunConfig:
    measures = []
    n_list = []
    state = getattr(args, "state", None)
    if args.command == "measure":
        measures = _split(args.measures)
    elif args.command == "scan":
        measures = [args.measure]
        n_list = [int(v) for v in _split(args.ns)]
    elif args.command in ("table", "check"):
        n_list = [args.n]
    known = set(MEASURE_REGISTRY) | set(EXTRA_MEASURES)
    for m in measures:
        if m not in known:
            raise UsageError(f"unknown measure {m!r}; known: {', '.join(sorted(known))}")
    if state is not None:
        StateSpec.parse(state)
    cfg = RunConfig(args.command, state, measures, n_list, args.delta, args.max_group_size,
                    args.seed, args.format, args.output)
    cfg.validate()
    return cfg


def run(argv=None) -> tuple[int, str]:
    """Execute a command; returns ``(exit code, output text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    try:
        cfg = _config(args)
        scan_report = None
        if cfg.command == "measure":
            report = cmd_measure(cfg)
        elif cfg.command == "table":
            report = cmd_table(cfg, args.scan_max)
        elif cfg.command == "scan":
            try:
                scan_report = cmd_scan(cfg, args.min_points)
            except ScanFailure as exc:
                scan_report = exc.report
                report = {"command": "scan", "state": cfg.state_spec, "error": str(exc),
                          **scan_report.to_json()}
                return EXIT_PROPERTY, render(report, "json")
            report = {"command": "scan", "state": cfg.state_spec, "delta": cfg.delta,
                      "max_group_size": cfg.max_group_size, "seed": cfg.seed,
                      **scan_report.to_json()}
        else:
            report = cmd_check(cfg, args.scan_max)
        text = render(report, cfg.output_format, scan_report)
    except CapacityError as exc:
        return EXIT_CAPACITY, f"capacity error: {exc}\n"
    except MeasureUndefined as exc:
        return EXIT_UNDEFINED, f"measure undefined: {exc}\n"
    except (UsageError, ValueError, KeyError) as exc:
        return EXIT_USAGE, f"usage error: {exc}\n"
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
        text = ""
    code = EXIT_OK
    if cfg.command == "check" and not report["passed"]:
        code = EXIT_PROPERTY
    return code, text


def main(argv=None) -> int:
    code, text = run(argv)
    stream = sys.stdout if code == EXIT_OK or code == EXIT_PROPERTY else sys.stderr
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
