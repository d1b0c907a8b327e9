"""Command line interface.

Subcommands:

    validate <model>
    compute --model M --part P [--scenario S] [--series Q:TOOLING]
            [--target T] [--format json|csv] [--out FILE]
    whatif  --model M --part P --scenario S1 [--scenario S2 ...]
    sweep   --model M --part P --lever NAME --values v1,v2,...
            [--scenario S] [--series Q:T] [--target T]
    bench   --model M --part P --rates R1,R2,... [--scenario S]
    serve   --port N --models DIR [--host H] [--cors]

Exit codes: 0 success, 1 diagnostics or computation failure, 2 usage error.
Reports go to stdout (or --out); messages go to stderr.  Model paths are
searched literally, then through the COST_MODEL_PATH environment variable
(colon-separated directories).  Output is byte-deterministic; --verbose
adds a version line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .expr import ExprError
from .model import CostError, validate_model
from .modelfile import ModelDocument, ModelSyntaxError, parse_model
from .report import (
    build_report,
    delta_tree_to_dict,
    emit_breakdown,
    part_from_dict,
    rate_table_from_dict,
    read_json,
    round6,
    scenario_from_dict,
    series_from_dict,
)
from .rollup import SeriesSpec, compute_part_cost
from .scenario import benchmark_compare, diff_breakdowns, sweep as run_sweep

USAGE_ERROR = 2
FAILURE = 1


def find_model_file(path: str) -> str:
    if os.path.exists(path):
        return path
    search = os.environ.get("COST_MODEL_PATH", "")
    for directory in filter(None, search.split(os.pathsep)):
        candidate = os.path.join(directory, path)
        if os.path.exists(candidate):
            return candidate
    raise FileNotFoundError(f"model file '{path}' not found (searched COST_MODEL_PATH)")


def load_model_document(path: str) -> ModelDocument:
    with open(find_model_file(path), "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


def _parse_series(text: str) -> SeriesSpec:
    quantity, _, tooling = text.partition(":")
    try:
        return SeriesSpec(int(quantity), float(tooling) if tooling else 0.0)
    except ValueError as exc:
        raise ValueError(f"--series expects QUANTITY:TOOLING, got '{text}'") from exc


def _emit(text_or_bytes, out: str | None):
    data = text_or_bytes if isinstance(text_or_bytes, bytes) else text_or_bytes.encode("utf-8")
    if out:
        with open(out, "wb") as handle:
            handle.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _validated_model(path: str):
    """Parse + validate; returns (document, diagnostics, has_errors)."""
    doc = load_model_document(path)
    diagnostics = list(doc.diagnostics) + validate_model(doc.model)
    has_errors = any(d.severity == "error" for d in diagnostics)
    return doc, diagnostics, has_errors


def cmd_validate(args) -> int:
    doc, diagnostics, has_errors = _validated_model(args.model)
    for diag in diagnostics:
        print(diag)
    if not diagnostics:
        print(f"ok: model '{doc.model.id}' is valid")
    return FAILURE if has_errors else 0


def _load_inputs(args):
    doc, diagnostics, has_errors = _validated_model(args.model)
    if has_errors:
        for diag in diagnostics:
            print(diag, file=sys.stderr)
        raise CostError(f"model '{args.model}' failed validation")
    part = part_from_dict(read_json(args.part))
    return doc, part


def cmd_compute(args) -> int:
    doc, part = _load_inputs(args)
    scenario = scenario_from_dict(read_json(args.scenario)) if args.scenario else None
    series = _parse_series(args.series) if args.series else None
    if args.format == "csv":
        breakdown = compute_part_cost(doc.model, part, scenario, validated=True)
        _emit(emit_breakdown(breakdown, "csv"), args.out)
        return 0
    report = build_report(doc.model, part, scenario, series, args.target, validated=True)
    _emit(_json_text(report), args.out)
    return 0


def cmd_whatif(args) -> int:
    doc, part = _load_inputs(args)
    scenarios = [scenario_from_dict(read_json(path)) for path in args.scenario]
    base = compute_part_cost(doc.model, part, validated=True)
    columns = []
    for scenario in scenarios:
        variant = compute_part_cost(doc.model, part, scenario, validated=True)
        tree = diff_breakdowns(base, variant)
        columns.append({
            "id": scenario.id,
            "label": scenario.label,
            "total": round6(variant.subtotal),
            "delta": round6(variant.subtotal - base.subtotal),
            "tree": delta_tree_to_dict(tree),
        })
    payload = {
        "model": doc.model.id,
        "base_total": round6(base.subtotal),
        "scenarios": columns,
    }
    _emit(_json_text(payload), args.out)
    return 0


def cmd_sweep(args) -> int:
    doc, part = _load_inputs(args)
    scenario = scenario_from_dict(read_json(args.scenario)) if args.scenario else None
    series = _parse_series(args.series) if args.series else None
    values = [float(v) for v in args.values.split(",") if v != ""]
    rows = run_sweep(doc.model, part, args.lever, values,
                     scenario=scenario, series=series, target=args.target)
    payload = {
        "model": doc.model.id,
        "lever": args.lever,
        "rows": [
            {"value": row.value, "total": round6(row.total),
             "target_ratio": row.target_ratio}
            for row in rows
        ],
    }
    _emit(_json_text(payload), args.out)
    return 0


def cmd_bench(args) -> int:
    doc, part = _load_inputs(args)
    scenario = scenario_from_dict(read_json(args.scenario)) if args.scenario else None
    tables = [rate_table_from_dict(read_json(path)) for path in args.rates.split(",")]
    result = benchmark_compare(doc.model, part, tables, scenario=scenario)
    payload = {
        "model": doc.model.id,
        "results": [
            {"plant_id": row.plant_id, "total": round6(row.total), "rank": row.rank}
            for row in result.rows
        ],
        "errors": [
            {"plant_id": plant, "message": message} for plant, message in result.errors
        ],
    }
    _emit(_json_text(payload), args.out)
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(models_dir=args.models, host=args.host, port=args.port, cors=args.cors)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="castcost",
        description="Cost-entity modeling workbench for sand-casting parts",
    )
    parser.add_argument("--verbose", action="store_true",
                        help="print the version banner to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compute", help="price a part and emit the report")
    p.add_argument("--model", required=True)
    p.add_argument("--part", required=True)
    p.add_argument("--scenario")
    p.add_argument("--series", help="QUANTITY:TOOLING lump sum")
    p.add_argument("--target", type=float)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("whatif", help="compare scenarios against the base part")
    p.add_argument("--model", required=True)
    p.add_argument("--part", required=True)
    p.add_argument("--scenario", action="append", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("sweep", help="recompute over a list of lever values")
    p.add_argument("--model", required=True)
    p.add_argument("--part", required=True)
    p.add_argument("--lever", required=True)
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--scenario")
    p.add_argument("--series")
    p.add_argument("--target", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="compare plants through rate tables")
    p.add_argument("--model", required=True)
    p.add_argument("--part", required=True)
    p.add_argument("--rates", required=True, help="comma-separated rate-table files")
    p.add_argument("--scenario")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8125)
    p.add_argument("--models", required=True, help="directory of *.cmdl files")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--cors", nargs="?", const="*", default=None,
                   help="enable CORS (optionally restricted to one origin)")
    p.set_defaults(func=cmd_serve)
    return parser


def cli_main(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code != 2 else USAGE_ERROR
    if args.verbose:
        print(f"castcost {__version__}", file=sys.stderr)
    try:
        return args.func(args)
    except (CostError, ExprError, ModelSyntaxError, ValueError, OSError) as exc:
        location = getattr(exc, "location", None)
        prefix = f"{location}: " if location else ""
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return FAILURE


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
