"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS line (visible with `pytest -s`); a failing
criterion fails its test.  Run:

    pytest tests/test_acceptance.py -v -s
"""

import json
import random
import shutil
import threading
import time
import urllib.request

import pytest

from castcost.cli import cli_main
from castcost.expr import ExprSyntaxError, format_expr, parse_expr
from castcost.model import ContextPath, PartSpec, resolve_parameter, validate_model
from castcost.modelfile import parse_model, print_model
from castcost.rollup import (
    amortize_series,
    apply_scrap_chain,
    budget_overrun_indicator,
    compute_part_cost,
    SeriesSpec,
    target_indicator,
)
from castcost.scenario import RateTable, benchmark_compare
from castcost.service import load_models, make_server

from genmodels import gen_ast, gen_model, gen_part, gen_rate_tables, MONEY_PARAM_NAMES
from oracle import oracle_total
from test_rollup import check_conservation

N_RANDOM_MODELS = 1000
_random_suite_cache: dict = {}


def _ok(line: str):
    print(f"ACCEPTANCE PASS: {line}")


def get_random_suite():
    """Compute (once) breakdowns and oracle totals for the randomized suite."""
    if not _random_suite_cache:
        started = time.perf_counter()
        results = []
        for seed in range(N_RANDOM_MODELS):
            model = gen_model(seed)
            part = gen_part(seed, model)
            breakdown = compute_part_cost(model, part)
            expected = oracle_total(model, part)
            results.append((seed, breakdown, expected))
        _random_suite_cache["results"] = results
        _random_suite_cache["elapsed"] = time.perf_counter() - started
    return _random_suite_cache


class TestAcceptance:
    def test_01_oracle_equivalence_reference(self, bundle):
        breakdown = compute_part_cost(bundle.model, bundle.part)
        rel = abs(breakdown.subtotal - bundle.oracle_total) / bundle.oracle_total
        assert rel <= 1e-9
        best = min(
            self._timed(lambda: compute_part_cost(bundle.model, bundle.part))
            for _ in range(5)
        )
        assert best < 0.010, f"compute took {best * 1e3:.2f} ms"
        _ok(f"oracle equivalence (reference): rel err {rel:.2e}, "
            f"runtime {best * 1e3:.2f} ms < 10 ms")

    @staticmethod
    def _timed(fn) -> float:
        started = time.perf_counter()
        fn()
        return time.perf_counter() - started

    def test_02_oracle_equivalence_randomized(self):
        suite = get_random_suite()
        worst = 0.0
        for seed, breakdown, expected in suite["results"]:
            scale = max(abs(expected), 1e-30)
            worst = max(worst, abs(breakdown.subtotal - expected) / scale)
        assert worst <= 1e-12, f"worst relative error {worst:.3e}"
        assert suite["elapsed"] < 30.0, f"randomized suite took {suite['elapsed']:.1f} s"
        _ok(f"oracle equivalence (randomized): {N_RANDOM_MODELS} models, "
            f"worst rel err {worst:.2e}, {suite['elapsed']:.1f} s < 30 s")

    def test_03_conservation(self, bundle):
        suite = get_random_suite()
        for _, breakdown, _ in suite["results"]:
            check_conservation(breakdown)
        check_conservation(compute_part_cost(bundle.model, bundle.part))
        _ok(f"conservation: exact at every node of {N_RANDOM_MODELS + 1} breakdowns")

    def test_04_homogeneity(self, bundle):
        for lam in (0.5, 3.0, 10.0):
            for seed in (0, 7, 13, 21, 42):
                base = compute_part_cost(gen_model(seed),
                                         gen_part(seed, gen_model(seed))).subtotal
                scaled = compute_part_cost(gen_model(seed, money_scale=lam),
                                           gen_part(seed, gen_model(seed))).subtotal
                assert scaled == pytest.approx(lam * base, rel=1e-12)
            base = compute_part_cost(bundle.model, bundle.part).subtotal
            scaled = compute_part_cost(
                bundle.model, bundle.part, self._scaled_reference_rates(bundle, lam)
            ).subtotal
            assert scaled == pytest.approx(lam * base, rel=1e-12)
        _ok("homogeneity: root total scales with lambda in {0.5, 3, 10} at 1e-12")

    @staticmethod
    def _scaled_reference_rates(bundle, lam: float) -> dict[str, float]:
        model = bundle.model
        spots = {
            "labor_rate_eur_h": ContextPath("sand_casting"),
            "energy_price_eur_kwh": ContextPath("sand_casting"),
            "mold_machine_rate_eur_h": ContextPath("sand_casting"),
            "remoulage_rate_eur_h": ContextPath("sand_casting"),
            "furnace_rate_eur_h": ContextPath("sand_casting"),
            "ladle_rate_eur_h": ContextPath("sand_casting"),
            "shakeout_rate_eur_h": ContextPath("sand_casting"),
            "finishing_rate_eur_h": ContextPath("sand_casting"),
            "finishing_consumable_eur": ContextPath("sand_casting"),
            "core_machine_rate_eur_h": ContextPath("sand_casting", "core_sand", "blow_core"),
            "core_sand_price_eur_kg": ContextPath("sand_casting", "core_sand"),
            "sand_price_eur_kg": ContextPath("sand_casting", "green_sand"),
            "alloy_price_eur_kg": ContextPath("sand_casting", bundle.part.material),
        }
        return {
            name: lam * resolve_parameter(model, name, ctx, [bundle.part.params])
            for name, ctx in spots.items()
        }

    def test_05_scrap_chain(self):
        assert apply_scrap_chain([(10.0, 0.0), (5.0, 0.5)], 0.0) == (30.0, 2.0)
        assert apply_scrap_chain([(10.0, 0.0), (5.0, 0.0)], 0.0) == (15.0, 1.0)
        assert apply_scrap_chain([], 7.0) == (7.0, 1.0)
        for stage in (0, 1):
            previous = -1.0
            for step in range(100):
                rates = [0.15, 0.25]
                rates[stage] = step * 0.009
                total, _ = apply_scrap_chain([(10.0, rates[0]), (5.0, rates[1])], 2.0)
                assert total >= previous
                previous = total
        _ok("scrap chain: (30, 2) exact, zero-scrap plain sum, "
            "non-decreasing over 100-point grids")

    def test_06_indicators(self):
        assert target_indicator(120.0, 100.0) == 1.2
        assert budget_overrun_indicator(130.0, 100.0) == 0.3
        assert amortize_series(10.0, SeriesSpec(1000, 10000.0)) == 20.0
        _ok("indicators: target 1.2, overrun 0.3, amortization 20, all exact")

    def test_07_parser_fixpoint_and_fuzz(self):
        rng = random.Random(20240817)
        for _ in range(10_000):
            ast = gen_ast(rng)
            text = format_expr(ast)
            assert parse_expr(text) == ast
            assert format_expr(parse_expr(text)) == text
        for seed in range(100):
            model = gen_model(seed)
            text = print_model(model)
            doc = parse_model(text)
            assert doc.model == model
            assert print_model(doc) == text
        alphabet = "abz(){}[]+-*/,.0123456789 \t\n\"'\\#=_eE ніж€"
        for _ in range(10_000):
            fuzz = "".join(rng.choice(alphabet)
                           for _ in range(rng.randrange(0, 30)))
            try:
                parse_expr(fuzz)
            except ExprSyntaxError:
                pass
        _ok("parser: fixpoint on 10,000 expressions + 100 models; "
            "10,000 fuzzed strings never panic")

    def test_08_precedence_exhaustive(self):
        from test_model import scoped_model, FULL_CTX

        values = {"scenario": 1.0, "part": 2.0, "feature": 3.0,
                  "material": 4.0, "process": 5.0, "global": 6.0}
        order = ["scenario", "part", "feature", "material", "process", "global"]
        for mask in range(1, 64):
            chosen = [s for i, s in enumerate(order) if mask & (1 << i)]
            model = scoped_model(
                global_v=values["global"] if "global" in chosen else None,
                process_v=values["process"] if "process" in chosen else None,
                material_v=values["material"] if "material" in chosen else None,
                feature_v=values["feature"] if "feature" in chosen else None,
            )
            overlays = [
                {"p": values["scenario"]} if "scenario" in chosen else {},
                {"p": values["part"]} if "part" in chosen else {},
            ]
            got = resolve_parameter(model, "p", FULL_CTX, overlays)
            assert got == values[chosen[0]]
        _ok("precedence: all 63 scope subsets return the highest-precedence value")

    def test_09_benchmark_rank_invariance(self):
        for seed in range(100):
            model = gen_model(seed, max_assemblies=2)
            part = gen_part(seed, model)
            tables = gen_rate_tables(seed, 3 + seed % 3)
            lam = (0.25, 2.0, 9.0)[seed % 3]
            base = benchmark_compare(model, part, tables)
            scaled = benchmark_compare(model, part, [
                RateTable(t.plant_id, {k: lam * v for k, v in t.overrides.items()})
                for t in tables
            ])
            assert [(r.plant_id, r.rank) for r in base.rows] == \
                [(r.plant_id, r.rank) for r in scaled.rows]
        _ok("benchmark: ranking invariant under lambda-scaled rate tables, "
            "100 instances")

    def test_10_api_cli_parity(self, bundle, tmp_path):
        models_dir = tmp_path / "models"
        models_dir.mkdir()
        fixtures = []
        for seed in range(19):
            model = gen_model(seed)
            (models_dir / f"{model.id}.cmdl").write_text(print_model(model))
            part = gen_part(seed, model)
            fixtures.append((model.id, f"{model.id}.cmdl", part))
        shutil.copy("src/castcost/data/reference.cmdl",
                    models_dir / "reference.cmdl")
        fixtures.append(("foundry_sand_reference", "reference.cmdl", bundle.part))

        registry, errors = load_models(str(models_dir))
        assert errors == []
        server = make_server(registry)
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            for model_id, filename, part in fixtures:
                part_payload = {"process": part.process, "material": part.material,
                                "params": part.params}
                part_path = tmp_path / "part.json"
                part_path.write_text(json.dumps(part_payload))
                out_path = tmp_path / "cli.json"
                code = cli_main([
                    "compute", "--model", str(models_dir / filename),
                    "--part", str(part_path), "--out", str(out_path),
                ])
                assert code == 0
                request = urllib.request.Request(
                    f"http://127.0.0.1:{port}/api/models/{model_id}/compute",
                    data=json.dumps({"part": part_payload}).encode(),
                    headers={"Content-Type": "application/json"}, method="POST")
                with urllib.request.urlopen(request) as response:
                    api_bytes = response.read()
                assert api_bytes == out_path.read_bytes(), f"parity broke on {model_id}"
        finally:
            server.shutdown()
            server.server_close()
        _ok("API/CLI parity: byte-identical compute reports on 20 fixtures; "
            "suite runs without the workbench")
