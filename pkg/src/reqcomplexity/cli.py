"""Command-line entry point: ``reqcx extract | analyze | correlate | baseline``.

Exit codes: 0 success, 1 baseline flags raised, 2 usage, 3 validation,
4 domain/numeric, 5 I/O. Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ComplexityError, DomainError, UsageError, ValidationError
from .extract import (
    DEFAULT_REF_PATTERNS,
    LAYERS,
    build_layered_graph,
    extraction_report,
    layered_task,
    parse_requirements,
    project,
    read_lexicon,
)
from .graph import dumps_graph, graph_from_dict, parse_edge_list
from .reporting import combined_digest, digest, dumps, timestamp, to_csv
from .spectral import METRIC_NAMES, spectral_metrics
from .stats import correlate, ks_normal, ols_poly
from .structural import ABSOLUTE_DENSITY_DEFINITIONS, DEFAULT_ABSOLUTE_DENSITY, structural_report
from .tasks import (
    INTEGRATION_METRICS,
    MOLECULE_METRICS,
    BaselineProfile,
    analyze_task,
    baseline_build,
    baseline_check,
    task_from_dict,
    task_to_dict,
)

REPORT_SCHEMA = "reqcomplexity.report/1"
CORRELATION_SCHEMA = "reqcomplexity.correlation/1"
FLAGS_SCHEMA = "reqcomplexity.flags/1"
EXTRACTION_SCHEMA = "reqcomplexity.extraction/1"

STRUCTURAL_NAMES = {
    "CC": "cyclomatic",
    "Density": "density",
    "DensityDelta": "density_delta",
    "AbsoluteDensity": "absolute_density",
    "Load": "load",
}
ALL_METRICS = METRIC_NAMES + tuple(STRUCTURAL_NAMES)
REGRESSION_DEGREES = {"linear": 1, "quadratic": 2}
GRAPH_SUFFIXES = {".json", ".txt", ".edges", ".edgelist"}
EXIT_FLAGGED = 1
EXIT_IO = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _probability(value: str) -> float:
    x = float(value)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {value}")
    return x


def _positive(value: str) -> float:
    x = float(value)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return x


# -- output ------------------------------------------------------------------

def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _stamp(doc: dict, args) -> dict:
    if not args.no_timestamp:
        doc["generated_at"] = timestamp()
    return doc


# -- extract -------------------------------------------------------------------

def _load_mapping(path: str, what: str) -> dict[str, float]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} {path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{what} {path}: expected a JSON object")
    try:
        return {str(k): float(v) for k, v in doc.items()}
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what} {path}: values must be numbers") from exc


def _layer_weights(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--layer-weight expects LAYER=WEIGHT, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--layer-weight {item!r}: weight is not a number") from None
    return out


def cmd_extract(args) -> int:
    data = Path(args.input).read_bytes()
    text = data.decode("utf-8")
    lexicon = read_lexicon(Path(args.lexicon).read_text(encoding="utf-8")) if args.lexicon else []
    alpha_table = _load_mapping(args.alpha_table, "alpha table") if args.alpha_table else None
    parsed = parse_requirements(text, lexicon, args.ref_pattern or None)
    layered = build_layered_graph(parsed.records, _layer_weights(args.layer_weight))
    graph = project(layered, args.layers, args.collapse_entities, alpha_table)
    report = extraction_report(parsed, layered, graph)
    if not parsed.records:
        report["warnings"].append("document contains no requirements; wrote an empty graph")
    if args.emit_task:
        task_id = args.task_id or Path(args.input).stem
        if parsed.records:
            task = layered_task(layered, task_id, args.layers, args.collapse_entities, alpha_table,
                                provenance=Path(args.input).name)
            body = dumps(task_to_dict(task))
        else:
            raise DomainError("cannot emit a task from a document without requirements")
    else:
        body = dumps_graph(graph)
    _write(args.out, body)

    sidecar = {
        "schema": EXTRACTION_SCHEMA,
        "tool_version": __version__,
        "input_digest": digest(data),
        "config": {
            "layers": list(args.layers),
            "collapse_entities": args.collapse_entities,
            "layer_weights": dict(layered.weights),
            "ref_patterns": list(args.ref_pattern or DEFAULT_REF_PATTERNS),
            "lexicon_terms": len(lexicon),
        },
        **report,
    }
    report_path = args.report
    if report_path is None and args.out not in (None, "-"):
        out = Path(args.out)
        report_path = str(out.with_name(out.stem + ".report.json"))
    if report_path is not None:
        _write(report_path, dumps(_stamp(sidecar, args)))
    for w in report["warnings"]:
        print(json.dumps({"warning": w}), file=sys.stderr)
    return 0


# -- analyze -------------------------------------------------------------------

def _input_files(paths: list[str]) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(
                f for f in sorted(p.iterdir())
                if f.is_file() and f.suffix.lower() in GRAPH_SUFFIXES
                and not f.name.startswith(".") and not f.name.endswith(".report.json")
            )
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    return files


def _analyze_file(path: Path, args) -> dict:
    data = path.read_bytes()
    entry = {"id": path.stem, "source": path.name, "input_digest": digest(data)}
    doc = None
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(data.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "assembly" in doc:
        task = task_from_dict(doc)
        row = analyze_task(task, args.level, args.topology_only, args.absolute_density,
                           delta=args.integration_mode == "delta")
        entry.update(
            id=task.task_id,
            kind="task",
            molecule_level=row.molecule_level,
            integration_level=row.integration_level,
            skipped=row.skipped,
        )
        entry["warnings"] = [f"{k}: skipped {v} component(s) where undefined" for k, v in row.skipped.items()]
        return entry

    graph = graph_from_dict(doc) if doc is not None else parse_edge_list(data.decode("utf-8"))
    if graph.n == 0:
        raise DomainError(f"{path.name}: metrics requested on an empty graph")
    spectral = [m for m in args.metrics if m in METRIC_NAMES]
    metrics = spectral_metrics(graph, spectral, args.topology_only)
    s = structural_report(graph, args.absolute_density)
    warnings = []
    for name in args.metrics:
        if name in STRUCTURAL_NAMES:
            value = getattr(s, STRUCTURAL_NAMES[name])
            metrics[name] = value
            if value is None:
                warnings.append(f"{name} undefined for this graph")
    entry.update(kind="graph", n=graph.n, e=graph.e,
                 metrics={m: metrics[m] for m in args.metrics},
                 structural=s.as_dict(), warnings=warnings)
    return entry


def _entry_values(entry: dict) -> dict:
    if entry.get("kind") == "task":
        return {**entry.get("molecule_level", {}), **entry.get("integration_level", {})}
    return dict(entry.get("metrics", {}))


def _report_csv(entries: list[dict]) -> str:
    header = ["id"]
    for e in entries:
        for k in _entry_values(e):
            if k not in header:
                header.append(k)
    return to_csv(header, ({"id": e["id"], **_entry_values(e)} for e in entries))


def cmd_analyze(args) -> int:
    unknown = [m for m in args.metrics if m not in ALL_METRICS]
    if unknown:
        raise UsageError(f"unknown metric(s) {', '.join(unknown)}; valid names: {', '.join(ALL_METRICS)}")
    files = _input_files(args.input)
    if not files:
        raise UsageError("no input files found")
    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as pool:
            entries = list(pool.map(lambda f: _analyze_file(f, args), files))
    else:
        entries = [_analyze_file(f, args) for f in files]

    if args.baseline:
        profile = BaselineProfile.from_dict(json.loads(Path(args.baseline).read_text(encoding="utf-8")))
        for e in entries:
            e["flags"] = [asdict(f) for f in baseline_check(profile, _entry_values(e), args.z_threshold)]

    doc = {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "input_digest": combined_digest(e["input_digest"] for e in entries),
        "config": {
            "metrics": list(args.metrics),
            "level": args.level,
            "topology_only": args.topology_only,
            "integration_mode": args.integration_mode,
            "absolute_density": args.absolute_density,
            "absolute_density_note": "artifact-defined formula (density x diameter) unless overridden",
        },
        "entries": entries,
    }
    _stamp(doc, args)
    if args.format == "csv":
        _write(args.out, _report_csv(entries))
    else:
        _write(args.out, dumps(doc))
    if args.csv:
        _write(args.csv, _report_csv(entries))
    return 0


# -- correlate -----------------------------------------------------------------

def _read_table(path: str, key: str) -> tuple[list[str], dict[str, dict[str, str]], bytes]:
    data = Path(path).read_bytes()
    reader = csv.DictReader(data.decode("utf-8-sig").splitlines())
    if reader.fieldnames is None or key not in reader.fieldnames:
        raise UsageError(f"{path}: join key {key!r} not found in header")
    rows: dict[str, dict[str, str]] = {}
    for row in reader:
        k = row[key]
        if k in rows:
            raise ValidationError(f"{path}: duplicate key {k!r}")
        rows[k] = row
    return list(reader.fieldnames), rows, data


def _as_float(cell: str | None) -> float | None:
    if cell is None or cell.strip() == "":
        return None
    return float(cell)


def _numeric_columns(header: list[str], rows: dict, key: str) -> list[str]:
    cols = []
    for col in header:
        if col == key:
            continue
        try:
            vals = [_as_float(r.get(col)) for r in rows.values()]
        except ValueError:
            continue
        if any(v is not None for v in vals):
            cols.append(col)
    return cols


def _regression_doc(fit) -> dict:
    return {
        "beta": list(fit.beta),
        "std_errors": list(fit.std_errors),
        "p_values": list(fit.p_values),
        "r_squared": fit.r_squared,
        "dof": fit.dof,
    }


def cmd_correlate(args) -> int:
    m_header, m_rows, m_data = _read_table(args.metrics_csv, args.key)
    e_header, e_rows, e_data = _read_table(args.effort_csv, args.key)
    keys = [k for k in m_rows if k in e_rows]
    if len(keys) < 4:
        raise UsageError(f"join on {args.key!r} produced {len(keys)} rows; at least 4 are needed")

    metric_cols = _numeric_columns(m_header, m_rows, args.key)
    if args.level == "molecule":
        metric_cols = [c for c in metric_cols if c in MOLECULE_METRICS]
    elif args.level == "integration":
        metric_cols = [c for c in metric_cols if c in INTEGRATION_METRICS]
    if args.metrics:
        missing = [m for m in args.metrics if m not in metric_cols]
        if missing:
            raise UsageError(f"metric column(s) not available: {', '.join(missing)}")
        metric_cols = [m for m in args.metrics]
    effort_cols = args.effort_column or _numeric_columns(e_header, e_rows, args.key)
    for col in effort_cols:
        if col not in e_header:
            raise UsageError(f"effort column {col!r} not found in {args.effort_csv}")
    degrees = []
    for name in args.regression or ():
        if name not in REGRESSION_DEGREES:
            raise UsageError(f"unknown regression {name!r}; choose from linear, quadratic")
        degrees.append(name)

    results, pairs_rows, curve_rows = [], [], []
    for ecol in effort_cols:
        for mcol in metric_cols:
            xs, ys, ks = [], [], []
            for k in keys:
                x, y = _as_float(m_rows[k].get(mcol)), _as_float(e_rows[k].get(ecol))
                if x is not None and y is not None:
                    xs.append(x)
                    ys.append(y)
                    ks.append(k)
            res = {"metric": mcol, "effort": ecol, "n": len(xs), "level": args.ci}
            try:
                c = correlate(xs, ys, args.ci)
            except ComplexityError as exc:
                res.update(status="undefined correlation", reason=str(exc))
            else:
                res.update(status="ok", r=c.r, ci_low=c.ci_low, ci_high=c.ci_high)
                if len(xs) < 4:
                    res["reason"] = "fewer than 4 pairs; no confidence interval"
            fits = {}
            for name in degrees:
                try:
                    fit = ols_poly(xs, ys, REGRESSION_DEGREES[name])
                except ComplexityError as exc:
                    fits[name] = {"error": str(exc)}
                    continue
                fits[name] = _regression_doc(fit)
                if args.plot_data and xs:
                    grid = np.linspace(min(xs), max(xs), 25)
                    curve_rows.extend(
                        {"metric": mcol, "effort": ecol, "model": name, "x": float(gx), "y_hat": float(gy)}
                        for gx, gy in zip(grid, fit.predict(grid))
                    )
            if fits:
                res["regressions"] = fits
            results.append(res)
            pairs_rows.extend(
                {"metric": mcol, "effort": ecol, args.key: k, "x": x, "y": y} for k, x, y in zip(ks, xs, ys)
            )

    normality = {}
    if args.ks:
        for ecol in effort_cols:
            vals = [v for v in (_as_float(e_rows[k].get(ecol)) for k in keys) if v is not None]
            try:
                ks_res = ks_normal(vals)
            except ComplexityError as exc:
                normality[ecol] = {"status": "undefined", "reason": str(exc)}
            else:
                normality[ecol] = {
                    "status": "ok",
                    "statistic": ks_res.statistic,
                    "p_value": ks_res.p_value,
                    "n": ks_res.n,
                    "note": ks_res.note,
                }

    if args.plot_data:
        out_dir = Path(args.plot_data)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "pairs.csv").write_text(
            to_csv(["metric", "effort", args.key, "x", "y"], pairs_rows), encoding="utf-8")
        (out_dir / "curves.csv").write_text(
            to_csv(["metric", "effort", "model", "x", "y_hat"], curve_rows), encoding="utf-8")

    if args.format == "csv":
        header = ["metric", "effort", "n", "status", "r", "ci_low", "ci_high"]
        flat = []
        for res in results:
            row = dict(res)
            for name, fit in res.get("regressions", {}).items():
                if "beta" in fit:
                    for i, (b, p) in enumerate(zip(fit["beta"], fit["p_values"])):
                        row[f"{name}_b{i}"], row[f"{name}_p{i}"] = b, p
                    row[f"{name}_r2"] = fit["r_squared"]
            flat.append(row)
        for name in degrees:
            k = REGRESSION_DEGREES[name] + 1
            header += [f"{name}_{s}{i}" for i in range(k) for s in ("b", "p")] + [f"{name}_r2"]
        _write(args.out, to_csv(header, flat))
    else:
        doc = {
            "schema": CORRELATION_SCHEMA,
            "tool_version": __version__,
            "input_digest": combined_digest([digest(m_data), digest(e_data)]),
            "config": {"key": args.key, "level": args.level, "ci": args.ci, "regression": degrees},
            "joined_rows": len(keys),
            "results": results,
        }
        if args.ks:
            doc["normality"] = normality
        _write(args.out, dumps(_stamp(doc, args)))
    return 0


# -- baseline ------------------------------------------------------------------

def _report_entries(path: str) -> list[dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if doc.get("schema") != REPORT_SCHEMA:
        raise ValidationError(f"{path}: not an analyze report (schema {doc.get('schema')!r})")
    return doc["entries"]


def cmd_baseline(args) -> int:
    if args.action == "build":
        rows = [_entry_values(e) for path in args.reports for e in _report_entries(path)]
        profile = baseline_build(rows, timestamp=not args.no_timestamp)
        _write(args.out, dumps(profile.to_dict()))
        return 0
    if not args.profile:
        raise UsageError("baseline check needs --profile")
    profile = BaselineProfile.from_dict(json.loads(Path(args.profile).read_text(encoding="utf-8")))
    checked = []
    any_flag = False
    for path in args.reports:
        for e in _report_entries(path):
            flags = baseline_check(profile, _entry_values(e), args.z_threshold)
            any_flag = any_flag or bool(flags)
            checked.append({"id": e["id"], "source": e.get("source"), "flags": [asdict(f) for f in flags]})
    doc = {
        "schema": FLAGS_SCHEMA,
        "tool_version": __version__,
        "z_threshold": args.z_threshold,
        "entries": checked,
        "flagged": any_flag,
    }
    _write(args.out, dumps(_stamp(doc, args)))
    return EXIT_FLAGGED if any_flag else 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reqcx", description="Structural complexity of requirement and system graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="INI file whose [reqcx] section sets flag defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--no-timestamp", action="store_true", help="omit wall-clock fields")

    p = sub.add_parser("extract", help="requirements text -> graph interchange JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--lexicon", help="newline-separated entity terms")
    p.add_argument("--ref-pattern", action="append", help="regex with one group capturing a requirement id")
    p.add_argument("--layers", type=_csv_list, default=list(LAYERS))
    p.add_argument("--collapse-entities", action="store_true")
    p.add_argument("--layer-weight", action="append", metavar="LAYER=W")
    p.add_argument("--alpha-table", help="JSON object mapping node label -> alpha")
    p.add_argument("--emit-task", action="store_true",
                   help="write an integration task (one component per top-level requirement)")
    p.add_argument("--task-id")
    p.add_argument("--report", help="sidecar extraction report path (default: <out>.report.json)")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="compute metrics for graph or task files")
    p.add_argument("--input", required=True, nargs="+", help="files or directories")
    p.add_argument("--metrics", type=_csv_list, default=list(ALL_METRICS))
    p.add_argument("--level", choices=["molecule", "integration", "both"], default="both")
    p.add_argument("--topology-only", action="store_true")
    p.add_argument("--integration-mode", choices=["assembly", "delta"], default="assembly")
    p.add_argument("--absolute-density", choices=sorted(ABSOLUTE_DENSITY_DEFINITIONS),
                   default=DEFAULT_ABSOLUTE_DENSITY)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--csv", help="also write the CSV table here")
    p.add_argument("--baseline", help="profile to check every entry against")
    p.add_argument("--z-threshold", type=_positive, default=2.0)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("correlate", help="correlate metric columns with effort columns")
    p.add_argument("metrics_csv")
    p.add_argument("effort_csv")
    p.add_argument("--key", default="id")
    p.add_argument("--metrics", type=_csv_list, default=None)
    p.add_argument("--effort-column", action="append")
    p.add_argument("--level", choices=["molecule", "integration", "both"], default="both")
    p.add_argument("--ci", type=_probability, default=0.95)
    p.add_argument("--regression", type=_csv_list, default=[])
    p.add_argument("--ks", action="store_true", help="K-S normality test per effort column")
    p.add_argument("--plot-data", help="directory for plottable CSV (pairs, fitted curves)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    common(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("baseline", help="build or check baseline complexity profiles")
    p.add_argument("action", choices=["build", "check"])
    p.add_argument("reports", nargs="+", help="analyze reports (JSON)")
    p.add_argument("--profile")
    p.add_argument("--z-threshold", type=_positive, default=2.0)
    common(p)
    p.set_defaults(func=cmd_baseline)
    return parser


def _apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    cfg = configparser.ConfigParser()
    if not cfg.read(path, encoding="utf-8"):
        raise FileNotFoundError(f"cannot read config file {path}")
    if not cfg.has_section("reqcx"):
        return
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    used = set()
    for sp in subparsers.choices.values():
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, raw in cfg.items("reqcx"):
            dest = key.replace("-", "_")
            action = actions.get(dest)
            if action is None or action.required or not action.option_strings:
                continue
            used.add(key)
            try:
                if isinstance(action, argparse._StoreTrueAction):
                    value = cfg.getboolean("reqcx", key)
                elif action.type is not None:
                    value = action.type(raw)
                else:
                    value = raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config {key}: {exc}") from exc
            if isinstance(action, argparse._AppendAction) and not isinstance(value, list):
                value = [value]
            defaults[dest] = value
        sp.set_defaults(**defaults)
    unknown = [k for k, _ in cfg.items("reqcx") if k not in used]
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")


def _fail(exc: BaseException, code: int) -> int:
    record = {"error": type(exc).__name__, "code": code, "message": str(exc)}
    problems = getattr(exc, "problems", None)
    if problems:
        record["problems"] = problems
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        config_args = list(argv if argv is not None else sys.argv[1:])
        if "--config" in config_args:
            i = config_args.index("--config")
            if i + 1 >= len(config_args):
                raise UsageError("--config needs a path")
            _apply_config(parser, config_args[i + 1])
        args = parser.parse_args(argv)
        return args.func(args)
    except ComplexityError as exc:
        return _fail(exc, exc.exit_code)
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(exc, EXIT_IO)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(exc, DomainError.exit_code)


if __name__ == "__main__":
    sys.exit(main())
