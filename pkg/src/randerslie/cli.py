"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error.

Input files are JSON.  An experiment file carries everything at once::

    {"algebra": "heisenberg3", "gram": [[1,0,0],[0,1,0],[0,0,1]], "X": [0,0,0.5],
     "maps": [{"matrix": [[...]]}], "fields": [{"kind": "chart_constant", "value": [...]}]}

where ``algebra`` is a catalog name or an algebra record.  A bare algebra
record (as printed by ``catalog show``) is accepted too.  ``verify`` also
accepts a suite file: a JSON list of property configs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import verify as vf
from .group_realization import REALIZATION_NAMES, has_realization
from .lie_core import CATALOG_NAMES, DEFAULT_TOL, LieAlgebra, catalog_get, validate_algebra
from .randers import InnerProduct, randers_from_dict, scale_metric, validate_randers
from .reports import Report, jsonable
from .symmetry import derivation_space, infinitesimal_K, linear_map_from_dict

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def read_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


class Experiment:
    """Parsed contents of an experiment or bare-algebra file."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise UsageError("expected a JSON object")
        try:
            if "algebra" in raw:
                self.algebra_spec = raw["algebra"]
            elif "brackets" in raw or ("name" in raw and "dim" in raw):
                self.algebra_spec = {k: raw[k] for k in ("name", "dim", "brackets") if k in raw}
            else:
                self.algebra_spec = None
            self.alg = vf.resolve_algebra(self.algebra_spec) if self.algebra_spec is not None else None
            if "gram" in raw:
                self.metric, self.x = randers_from_dict(raw)
            elif self.alg is not None and "X" in raw:
                self.metric, self.x = InnerProduct.identity(self.alg.dim), np.asarray(raw["X"], dtype=float)
            else:
                self.metric, self.x = None, None
            self.maps = [linear_map_from_dict(m) for m in raw.get("maps", [])]
            self.fields = raw.get("fields")
        except (ValueError, TypeError, KeyError, LookupError) as exc:
            raise UsageError(str(exc)) from None
        self.scale_N = None

    def apply_scale(self):
        if self.metric is not None:
            self.metric, self.scale_N = scale_metric(self.metric, self.x)

    def metric_or_default(self) -> tuple[InnerProduct, np.ndarray]:
        n = self.alg.dim
        metric = self.metric if self.metric is not None else InnerProduct.identity(n)
        x = self.x if self.x is not None else np.zeros(n)
        if metric.dim != n or x.shape != (n,):
            raise UsageError(f"metric/X dimensions do not match algebra dimension {n}")
        return metric, x


def validation_reports(exp: Experiment, tol: float) -> list[Report]:
    reports = []
    if exp.alg is not None:
        reports.append(validate_algebra(exp.alg, tol))
    if exp.metric is not None:
        if exp.alg is not None and exp.metric.dim != exp.alg.dim:
            raise UsageError(f"gram is {exp.metric.dim}x{exp.metric.dim}, algebra has dimension {exp.alg.dim}")
        try:
            reports.append(validate_randers(exp.metric, exp.x, tol))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return reports


# ---------------------------------------------------------------- output

def _fmt_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return json.dumps(jsonable(v))


def render_text(doc: dict) -> str:
    lines = []
    for key, value in doc.items():
        if key == "reports":
            for r in value:
                status = "PASS" if r["pass"] else "FAIL"
                lines.append(f"[{status}] {r['check']}: residual={r['residual']:.3e}")
                for k, v in r["details"].items():
                    lines.append(f"    {k}: {_fmt_value(v)}")
        elif key == "basis":
            lines.append("basis:")
            for i, M in enumerate(value):
                lines.append(f"  [{i}] {_fmt_value(M)}")
        else:
            lines.append(f"{key}: {_fmt_value(value)}")
    return "\n".join(lines)


def emit(doc: dict, fmt: str) -> None:
    doc = jsonable(doc)
    if fmt == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(render_text(doc))


# ---------------------------------------------------------------- subcommands

def cmd_validate(args) -> int:
    exp = Experiment(read_json(args.path))
    if exp.alg is None and exp.metric is None:
        raise UsageError("file carries neither an algebra nor a metric")
    if args.scale:
        exp.apply_scale()
    reports = validation_reports(exp, args.tol)
    ok = all(reports)
    doc = {"pass": ok, "reports": [r.to_dict() for r in reports]}
    if exp.scale_N is not None:
        doc["scale_N"] = exp.scale_N
    for r in reports:
        if "suggested_N" in r.details:
            doc["hint"] = f"drift norm >= 1; rerun with --scale (N = {r.details['suggested_N']})"
    emit(doc, args.format)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_analyze(args) -> int:
    exp = Experiment(read_json(args.path))
    if exp.alg is None:
        raise UsageError("analyze needs an algebra")
    if args.scale:
        exp.apply_scale()
    reports = validation_reports(exp, args.tol)
    if not all(reports):
        emit({"pass": False, "reports": [r.to_dict() for r in reports]}, args.format)
        return EXIT_FAIL
    metric, x = exp.metric_or_default()
    der = derivation_space(exp.alg)
    K = infinitesimal_K(exp.alg, metric, x)
    doc = {
        "algebra": exp.alg.name,
        "der_dim": der.dim,
        "der_closure_residual": der.closure_residual(),
        "kprime_dim": K.dim,
        "kprime_closure_residual": K.closure_residual(),
        "basis": K.vectors,
    }
    if exp.scale_N is not None:
        doc["scale_N"] = exp.scale_N
    emit(doc, args.format)
    return EXIT_OK


def _select(configs, props):
    if not props:
        return configs
    return [c for c in configs if c.id in props]


def cmd_verify(args) -> int:
    props = None
    if args.props:
        props = [p.strip() for chunk in args.props for p in chunk.split(",") if p.strip()]
        unknown = [p for p in props if p not in vf.PROPERTY_IDS]
        if unknown:
            raise UsageError(f"unknown property id(s) {', '.join(unknown)}; valid ids: {', '.join(vf.PROPERTY_IDS)}")
    raw = read_json(args.path)
    overrides = {k: v for k, v in (("samples", args.samples), ("seed", args.seed), ("tol", args.tol)) if v is not None}

    if isinstance(raw, list):
        try:
            configs = [vf.PropertyConfig.from_dict(d) for d in raw]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        exp = Experiment(raw)
        if exp.alg is None:
            raise UsageError("verify needs an algebra")
        if args.scale:
            exp.apply_scale()
        only_scaling = props is not None and set(props) <= {"P-SCALING"}
        reports = validation_reports(exp, args.tol or DEFAULT_TOL)
        if not only_scaling and not all(reports):
            emit({"pass": False, "reports": [r.to_dict() for r in reports]}, args.format)
            return EXIT_FAIL
        metric, x = exp.metric_or_default()
        configs = vf.default_suite(exp.algebra_spec, metric.gram, x)
        params = {}
        if exp.maps:
            params["inject"] = [{"matrix": m.tolist()} for m in exp.maps]
        for i, c in enumerate(configs):
            p = dict(params) if c.id in ("P-ISO-FWD", "P-ISO-BWD") else {}
            if c.id == "P-XLEFTINV" and exp.fields:
                p["fields"] = exp.fields
            configs[i] = replace(c, params=p)

    configs = [replace(c, **overrides) for c in _select(configs, props)]
    if not configs:
        raise UsageError("no properties selected")
    try:
        report = vf.run(configs, max_workers=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        print(report.to_json(indent=2))
    else:
        print(report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


SO3_NOTE = "algebra-level only; no simply connected matrix realization in catalog"


def cmd_catalog(args) -> int:
    if args.action == "list":
        doc = {"algebras": list(CATALOG_NAMES), "realizations": list(REALIZATION_NAMES)}
        if args.format == "json":
            print(json.dumps(doc, indent=2))
        else:
            print("algebras:")
            for name in CATALOG_NAMES:
                print(f"  {name}")
            print("realizations:")
            for name in REALIZATION_NAMES:
                print(f"  {name}")
        return EXIT_OK
    if not args.name:
        raise UsageError("catalog show needs a name")
    try:
        alg: LieAlgebra = catalog_get(args.name)
    except LookupError as exc:
        raise UsageError(str(exc)) from None
    doc = alg.to_dict()
    if not has_realization(alg.name):
        doc["note"] = SO3_NOTE
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randerslie",
        description="Automorphisms and isometries of left-invariant Randers metrics on Lie groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_tol_default=True):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL if with_tol_default else None)
        p.add_argument("--scale", action="store_true", help="rescale the metric so that <X,X> < 1 first")

    p = sub.add_parser("validate", help="validate an algebra and/or Randers data")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="derivation algebra and K' algebra")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run seeded property checks")
    p.add_argument("path")
    common(p, with_tol_default=False)
    p.add_argument("--props", action="append", help="comma-separated property ids")
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", help="list or show catalog algebras")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
