#!/usr/bin/env python3
"""Capture real cost-service responses into JSON fixtures for the workbench
test suite, so the UI's stubbed API always answers with genuine engine output.
"""

import json
import shutil
import sys
import tempfile
import threading
import urllib.request
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from castcost.service import load_models, make_server  # noqa: E402

FIXTURES = ROOT / "frontend" / "tests" / "fixtures"
MODEL_ID = "foundry_sand_reference"


def fetch(base, method, path, payload=None):
    data = json.dumps(payload).encode() if payload is not None else None
    request = urllib.request.Request(base + path, data=data, method=method,
                                     headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(request) as response:
        return json.loads(response.read())


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    models_dir = tempfile.mkdtemp()
    shutil.copy(ROOT / "src/castcost/data/reference.cmdl",
                Path(models_dir) / "reference.cmdl")
    registry, errors = load_models(models_dir)
    assert not errors, errors
    server = make_server(registry)
    base = f"http://127.0.0.1:{server.server_address[1]}"
    threading.Thread(target=server.serve_forever, daemon=True).start()

    part = json.loads((ROOT / "src/castcost/data/reference_part.json").read_text())
    series = json.loads((ROOT / "src/castcost/data/reference_series.json").read_text())
    expected = json.loads((ROOT / "src/castcost/data/reference_expected.json").read_text())
    target = expected["target"]

    out = {
        "models": fetch(base, "GET", "/api/models"),
        "levers": fetch(base, "GET", f"/api/models/{MODEL_ID}/levers"),
        "part": part,
        "series": series,
        "target": target,
    }
    computes = {}
    for ppm in (1, 2, 3, 4, 5, 6, 8):
        body = {
            "part": {**part, "params": {**part["params"], "parts_per_mold": ppm}},
            "series": series,
            "target": target,
        }
        computes[str(ppm)] = fetch(base, "POST", f"/api/models/{MODEL_ID}/compute", body)
    out["compute_by_parts_per_mold"] = computes
    out["compute_base"] = computes["2"]
    out["whatif"] = fetch(base, "POST", f"/api/models/{MODEL_ID}/whatif", {
        "part": part,
        "scenarios": [
            {"id": "more_cavities", "label": "4 per mold",
             "overrides": {"parts_per_mold": 4}},
            {"id": "cheaper_scrap", "label": "improved pouring",
             "overrides": {"pouring_scrap_rate": 0.005}},
        ],
    })
    out["sweep"] = fetch(base, "POST", f"/api/models/{MODEL_ID}/sweep", {
        "part": part, "lever": "parts_per_mold", "values": [1, 2, 3, 4, 5, 6, 8],
        "series": series, "target": target,
    })
    server.shutdown()
    server.server_close()

    path = FIXTURES / "reference_api.json"
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
