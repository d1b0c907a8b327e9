"""HTTP facade over the engine for the workbench and other clients.

Endpoints (JSON in, JSON out):

    GET  /api/health                     -> {"status": "ok"}
    GET  /api/models                     -> [{"id", "version"}]
    PUT  /api/models/{id}                (model text) -> diagnostics; 422 on syntax error
    GET  /api/models/{id}/levers         -> workbench levers
    POST /api/models/{id}/compute        {part, scenario?, series?, target?}
    POST /api/models/{id}/whatif         {part, scenarios: [...]}
    POST /api/models/{id}/sweep          {part, lever, values, scenario?, series?, target?}
    POST /api/models/{id}/bench          {part, rates: [...], scenario?}

Errors are {"code", "message", "location"?} with 400 for malformed bodies,
404 for unknown models and 422 for validation or computation failures.
Computation is stateless; the registry is the only shared state and is
replaced snapshot-at-a-time, so concurrent reads never see a half-updated
model.
"""

from __future__ import annotations

import json
import os
import re
import sys
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .expr import ExprError
from .model import CostError, CostModel, validate_model
from .modelfile import ModelDocument, ModelSyntaxError, parse_model
from .reference import levers_for_model
from .report import (
    build_report,
    delta_tree_to_dict,
    part_from_dict,
    rate_table_from_dict,
    round6,
    scenario_from_dict,
    series_from_dict,
)
from .rollup import compute_part_cost
from .scenario import benchmark_compare, diff_breakdowns, sweep as run_sweep


@dataclass(frozen=True)
class RegisteredModel:
    document: ModelDocument
    version: int

    @property
    def model(self) -> CostModel:
        return self.document.model


class ModelRegistry:
    """Model snapshots keyed by id; replacement is atomic, reads are lock-free."""

    def __init__(self):
        self._entries: dict[str, RegisteredModel] = {}
        self._lock = threading.Lock()

    def get(self, model_id: str) -> RegisteredModel | None:
        return self._entries.get(model_id)

    def put(self, model_id: str, document: ModelDocument) -> RegisteredModel:
        with self._lock:
            current = self._entries.get(model_id)
            entry = RegisteredModel(document, (current.version + 1) if current else 1)
            self._entries[model_id] = entry
            return entry

    def list(self) -> list[dict]:
        return [
            {"id": model_id, "version": entry.version}
            for model_id, entry in sorted(self._entries.items())
        ]


def load_models(directory: str) -> tuple[ModelRegistry, list[tuple[str, str]]]:
    """Parse every *.cmdl file; invalid files are reported, not registered."""
    registry = ModelRegistry()
    errors: list[tuple[str, str]] = []
    for filename in sorted(os.listdir(directory)):
        if not filename.endswith(".cmdl"):
            continue
        path = os.path.join(directory, filename)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                document = parse_model(handle.read())
        except (OSError, ModelSyntaxError) as exc:
            errors.append((filename, str(exc)))
            continue
        diagnostics = list(document.diagnostics) + validate_model(document.model)
        if any(d.severity == "error" for d in diagnostics):
            errors.append((filename, "; ".join(str(d) for d in diagnostics
                                                if d.severity == "error")))
            continue
        registry.put(document.model.id, document)
    return registry, errors


_ROUTE_RE = re.compile(r"^/api/models/([A-Za-z_][A-Za-z0-9_]*)(?:/([a-z]+))?$")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    registry: ModelRegistry = None  # set by make_server
    cors: str | None = None
    quiet: bool = True

    # -- plumbing -----------------------------------------------------------

    def log_message(self, format, *args):  # noqa: A002 (stdlib signature)
        if not self.quiet:
            super().log_message(format, *args)

    def _headers(self, status: int, content_length: int, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(content_length))
        if self.cors:
            self.send_header("Access-Control-Allow-Origin", self.cors)
            self.send_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def _send_json(self, status: int, payload):
        body = (json.dumps(payload, indent=2) + "\n").encode("utf-8")
        self._headers(status, len(body), "application/json")
        self.wfile.write(body)

    def _send_error(self, status: int, code: str, message: str, location=None):
        payload = {"code": code, "message": message}
        if location:
            payload["location"] = location
        self._send_json(status, payload)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _read_json_body(self) -> dict:
        try:
            payload = json.loads(self._read_body().decode("utf-8") or "null")
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _BadRequest(f"body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise _BadRequest("body must be a JSON object")
        return payload

    def _entry(self, model_id: str) -> RegisteredModel:
        entry = self.registry.get(model_id)
        if entry is None:
            raise _NotFound(f"unknown model '{model_id}'")
        return entry

    # -- verbs --------------------------------------------------------------

    def do_OPTIONS(self):
        self._headers(204, 0, "text/plain")

    def do_GET(self):
        try:
            if self.path == "/api/health":
                self._send_json(200, {"status": "ok"})
                return
            if self.path == "/api/models":
                self._send_json(200, self.registry.list())
                return
            match = _ROUTE_RE.match(self.path)
            if match and match.group(2) == "levers":
                entry = self._entry(match.group(1))
                self._send_json(200, [lever.to_dict()
                                      for lever in levers_for_model(entry.model)])
                return
            self._send_error(404, "not_found", f"no route for GET {self.path}")
        except _HttpError as exc:
            self._send_error(exc.status, exc.code, str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            self._send_error(500, "internal_error", str(exc))

    def do_PUT(self):
        try:
            match = _ROUTE_RE.match(self.path)
            if not match or match.group(2) is not None:
                self._send_error(404, "not_found", f"no route for PUT {self.path}")
                return
            model_id = match.group(1)
            text = self._read_body().decode("utf-8", errors="replace")
            try:
                document = parse_model(text)
            except ModelSyntaxError as exc:
                self._send_error(422, "syntax_error", exc.message,
                                 location=f"{exc.line}:{exc.col}")
                return
            diagnostics = list(document.diagnostics) + validate_model(document.model)
            diag_payload = [
                {"severity": d.severity, "location": d.location, "message": d.message}
                for d in diagnostics
            ]
            if any(d.severity == "error" for d in diagnostics):
                self._send_json(200, {"registered": False, "diagnostics": diag_payload})
                return
            entry = self.registry.put(model_id, document)
            self._send_json(200, {"registered": True, "id": model_id,
                                  "version": entry.version,
                                  "diagnostics": diag_payload})
        except Exception as exc:  # pragma: no cover - defensive
            self._send_error(500, "internal_error", str(exc))

    def do_POST(self):
        try:
            match = _ROUTE_RE.match(self.path)
            if not match or match.group(2) not in ("compute", "whatif", "sweep", "bench"):
                self._send_error(404, "not_found", f"no route for POST {self.path}")
                return
            entry = self._entry(match.group(1))
            body = self._read_json_body()
            action = match.group(2)
            if action == "compute":
                payload = self._compute(entry, body)
            elif action == "whatif":
                payload = self._whatif(entry, body)
            elif action == "sweep":
                payload = self._sweep(entry, body)
            else:
                payload = self._bench(entry, body)
            self._send_json(200, payload)
        except _HttpError as exc:
            self._send_error(exc.status, exc.code, str(exc))
        except (CostError, ExprError) as exc:
            self._send_error(422, "computation_error", str(exc),
                             location=getattr(exc, "location", None))
        except ValueError as exc:
            self._send_error(400, "bad_request", str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            self._send_error(500, "internal_error", str(exc))

    # -- actions ------------------------------------------------------------

    @staticmethod
    def _parse_common(body: dict):
        if "part" not in body:
            raise _BadRequest("body requires a 'part' object")
        part = part_from_dict(body["part"])
        scenario = scenario_from_dict(body["scenario"]) if body.get("scenario") else None
        series = series_from_dict(body["series"]) if body.get("series") else None
        target = float(body["target"]) if body.get("target") is not None else None
        return part, scenario, series, target

    def _compute(self, entry: RegisteredModel, body: dict) -> dict:
        part, scenario, series, target = self._parse_common(body)
        return build_report(entry.model, part, scenario, series, target, validated=True)

    def _whatif(self, entry: RegisteredModel, body: dict) -> dict:
        part, _, _, _ = self._parse_common(body)
        raw = body.get("scenarios")
        if not isinstance(raw, list):
            raise _BadRequest("body requires a 'scenarios' array")
        scenarios = [scenario_from_dict(s) for s in raw]
        base = compute_part_cost(entry.model, part, validated=True)
        columns = []
        for scenario in scenarios:
            variant = compute_part_cost(entry.model, part, scenario, validated=True)
            tree = diff_breakdowns(base, variant)
            columns.append({
                "id": scenario.id,
                "label": scenario.label,
                "total": round6(variant.subtotal),
                "delta": round6(variant.subtotal - base.subtotal),
                "tree": delta_tree_to_dict(tree),
            })
        return {"model": entry.model.id, "base_total": round6(base.subtotal),
                "scenarios": columns}

    def _sweep(self, entry: RegisteredModel, body: dict) -> dict:
        part, scenario, series, target = self._parse_common(body)
        lever = body.get("lever")
        values = body.get("values")
        if not isinstance(lever, str) or not isinstance(values, list):
            raise _BadRequest("body requires 'lever' (string) and 'values' (array)")
        rows = run_sweep(entry.model, part, lever, [float(v) for v in values],
                         scenario=scenario, series=series, target=target)
        return {
            "model": entry.model.id,
            "lever": lever,
            "rows": [
                {"value": row.value, "total": round6(row.total),
                 "target_ratio": row.target_ratio}
                for row in rows
            ],
        }

    def _bench(self, entry: RegisteredModel, body: dict) -> dict:
        part, scenario, series, _ = self._parse_common(body)
        raw = body.get("rates")
        if not isinstance(raw, list):
            raise _BadRequest("body requires a 'rates' array")
        tables = [rate_table_from_dict(r) for r in raw]
        result = benchmark_compare(entry.model, part, tables,
                                   scenario=scenario, series=series)
        return {
            "model": entry.model.id,
            "results": [
                {"plant_id": row.plant_id, "total": round6(row.total), "rank": row.rank}
                for row in result.rows
            ],
            "errors": [
                {"plant_id": plant, "message": message}
                for plant, message in result.errors
            ],
        }


class _HttpError(Exception):
    status = 500
    code = "internal_error"


class _BadRequest(_HttpError):
    status = 400
    code = "bad_request"


class _NotFound(_HttpError):
    status = 404
    code = "not_found"


def make_server(registry: ModelRegistry, host: str = "127.0.0.1", port: int = 0,
                cors: str | None = None, quiet: bool = True) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {
        "registry": registry, "cors": cors, "quiet": quiet,
    })
    return ThreadingHTTPServer((host, port), handler)


def run_server(models_dir: str, host: str = "127.0.0.1", port: int = 8125,
               cors: str | None = None):
    registry, errors = load_models(models_dir)
    for filename, message in errors:
        print(f"skipped {filename}: {message}", file=sys.stderr)
    server = make_server(registry, host, port, cors, quiet=False)
    actual_port = server.server_address[1]
    print(f"castcost service listening on http://{host}:{actual_port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
