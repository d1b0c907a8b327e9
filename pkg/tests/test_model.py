"""Model validation, parameter precedence, resolution, entity costs."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from castcost.expr import Num, Var, parse_expr
from castcost.model import (
    Assembly,
    Category,
    Component,
    ContextPath,
    CostEntity,
    CostModel,
    CyclicParameter,
    Kind,
    MaterialDef,
    Operation,
    Parameter,
    PartSpec,
    ProcessDef,
    UnresolvedParameter,
    entity_cost,
    resolve_parameter,
    validate_model,
)
from castcost.rollup import compute_part_cost

from genmodels import gen_model, gen_part


def lit(name, value, unit=""):
    return Parameter(name, float(value), unit)


def scoped_model(global_v=None, process_v=None, material_v=None, feature_v=None):
    """One-parameter model with 'p' optionally defined at each model scope."""
    op_params = {"p": lit("p", feature_v)} if feature_v is not None else {}
    return CostModel(
        id="scopes",
        globals={"p": lit("p", global_v)} if global_v is not None else {},
        processes={"proc": ProcessDef(
            "proc", {"p": lit("p", process_v)} if process_v is not None else {})},
        materials={"mat": MaterialDef(
            "mat", {"p": lit("p", material_v)} if material_v is not None else {})},
        operations={"op": Operation(
            id="op", name="op", process_id="proc", material_id="mat",
            cycle_time_s=Num(0.0), parts_per_cycle=Num(1.0),
            machine_rate_per_h=Num(0.0), labor_rate_per_h=Num(0.0),
            crew_size=Num(0.0), scrap_rate=Num(0.0),
            consumable_cost_per_part=Num(0.0), params=op_params)},
        assemblies={"a": Assembly("a", "a", (), ("op",))},
        root_assembly="a",
    )


FULL_CTX = ContextPath("proc", "mat", "op")


class TestResolutionPrecedence:
    def test_global_only(self):
        model = scoped_model(global_v=5)
        assert resolve_parameter(model, "p", FULL_CTX) == 5

    def test_scenario_beats_material_and_global(self):
        model = scoped_model(global_v=5, material_v=7)
        value = resolve_parameter(model, "p", FULL_CTX, [{"p": 9.0}, {}])
        assert value == 9

    def test_material_scope_lookup(self, bundle):
        ctx = ContextPath("sand_casting", "ge20")
        assert resolve_parameter(bundle.model, "density_kg_dm3", ctx) == 7.85

    def test_exhaustive_scope_subsets(self):
        """All 63 non-empty subsets of the six scopes return the highest one."""
        # precedence (high to low): scenario, part, feature, material, process, global
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
            expected = values[chosen[0]]  # first in precedence order
            assert resolve_parameter(model, "p", FULL_CTX, overlays) == expected

    def test_unresolved_raises(self):
        model = scoped_model(global_v=1)
        with pytest.raises(UnresolvedParameter) as err:
            resolve_parameter(model, "q", FULL_CTX)
        assert err.value.name == "q"

    def test_expr_param_resolves_through_overrides(self):
        model = scoped_model(global_v=1)
        model.globals["dbl"] = Parameter("dbl", parse_expr("p * 2"))
        assert resolve_parameter(model, "dbl", FULL_CTX) == 2
        assert resolve_parameter(model, "dbl", FULL_CTX, [{"p": 10.0}]) == 20

    def test_cycle_detected(self):
        model = scoped_model()
        model.globals["a"] = Parameter("a", parse_expr("b + 1"))
        model.globals["b"] = Parameter("b", parse_expr("a + 1"))
        with pytest.raises(CyclicParameter) as err:
            resolve_parameter(model, "a", FULL_CTX)
        assert "a" in err.value.chain and "b" in err.value.chain

    def test_self_shadowing_cycle(self):
        model = scoped_model(global_v=5)
        model.processes["proc"].params["p"] = Parameter("p", parse_expr("p * 1.1"))
        with pytest.raises(CyclicParameter):
            resolve_parameter(model, "p", FULL_CTX)

    def test_determinism(self):
        model = gen_model(42)
        part = gen_part(42, model)
        a = compute_part_cost(model, part)
        b = compute_part_cost(model, part)
        assert a == b

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_precedence_totality_random(self, seed):
        rng = random.Random(seed)
        defined = {s: (rng.random() < 0.5) for s in
                   ("scenario", "part", "feature", "material", "process", "global")}
        if not any(defined.values()):
            defined["global"] = True
        vals = {s: float(i + 1) * 10 for i, s in enumerate(defined)}
        model = scoped_model(
            global_v=vals["global"] if defined["global"] else None,
            process_v=vals["process"] if defined["process"] else None,
            material_v=vals["material"] if defined["material"] else None,
            feature_v=vals["feature"] if defined["feature"] else None,
        )
        overlays = [{"p": vals["scenario"]} if defined["scenario"] else {},
                    {"p": vals["part"]} if defined["part"] else {}]
        expected = next(vals[s] for s in
                        ("scenario", "part", "feature", "material", "process", "global")
                        if defined[s])
        assert resolve_parameter(model, "p", FULL_CTX, overlays) == expected


class TestContextPath:
    def test_feature_requires_material(self):
        with pytest.raises(ValueError):
            ContextPath("proc", None, "op")

    def test_str_form(self):
        assert str(ContextPath("a", "b", "c")) == "a/b/c"


class TestEntityCost:
    def entity_model(self, formula, driver="driver_qty"):
        model = scoped_model(global_v=0)
        model.entities["e"] = CostEntity("e", driver, parse_expr(formula),
                                         Category.MATERIAL)
        return model

    def test_zero_formula(self):
        model = self.entity_model("driver_qty * 0")
        assert entity_cost(model, "e", FULL_CTX, [{"driver_qty": 9.0}]) == 0.0

    def test_hand_evaluated(self):
        model = self.entity_model("mass_kg * price_eur_kg", driver="mass_kg")
        value = entity_cost(model, "e", FULL_CTX, [{"mass_kg": 2.0, "price_eur_kg": 3.0}])
        assert value == 6.0

    def test_unresolved_propagates(self):
        model = self.entity_model("h * rate", driver="h")
        with pytest.raises(UnresolvedParameter):
            entity_cost(model, "e", FULL_CTX, [{"rate": 3.0}])


class TestValidation:
    def test_reference_model_is_clean(self, bundle):
        assert validate_model(bundle.model) == []

    def test_unresolved_sub_assembly(self):
        model = scoped_model(global_v=1)
        model.components["c"] = Component(
            "c", "c", Kind.PRODUCED, Num(1.0), Num(1.0), sub_assembly="x")
        model.assemblies["a"] = Assembly("a", "a", ("c",), ("op",))
        messages = [d.message for d in validate_model(model) if d.severity == "error"]
        assert any("unresolved id x" in m for m in messages)

    def test_two_cycle_reported(self):
        def produced(cid, target):
            return Component(cid, cid, Kind.PRODUCED, Num(1.0), Num(1.0),
                             sub_assembly=target)
        model = CostModel(
            id="cyc",
            processes={"proc": ProcessDef("proc")},
            components={"ca": produced("ca", "B"), "cb": produced("cb", "A")},
            assemblies={"A": Assembly("A", "A", ("ca",), ()),
                        "B": Assembly("B", "B", ("cb",), ())},
            root_assembly="A",
        )
        errors = [d for d in validate_model(model) if d.severity == "error"]
        assert any("cycle" in d.message and "A" in d.message and "B" in d.message
                   for d in errors)

    def test_purchased_produced_exclusive(self):
        model = scoped_model(global_v=1)
        model.components["c"] = Component(
            "c", "c", Kind.PURCHASED, Num(1.0), Num(1.0),
            unit_cost=Num(1.0), sub_assembly="a")
        model.assemblies["a"] = Assembly("a", "a", ("c",), ("op",))
        errors = [d for d in validate_model(model) if d.severity == "error"]
        assert errors

    def test_entity_driver_must_appear(self):
        model = scoped_model(global_v=1)
        model.entities["e"] = CostEntity("e", "missing", parse_expr("1 + 2"),
                                         Category.LABOR)
        errors = [d for d in validate_model(model) if d.severity == "error"]
        assert any("driver" in d.message for d in errors)

    def test_unresolvable_expression_flagged(self):
        model = scoped_model(global_v=1)
        model.operations["op"] = Operation(
            id="op", name="op", process_id="proc",
            cycle_time_s=Var("nowhere"), parts_per_cycle=Num(1.0),
            machine_rate_per_h=Num(0.0), labor_rate_per_h=Num(0.0),
            crew_size=Num(0.0), scrap_rate=Num(0.0),
            consumable_cost_per_part=Num(0.0))
        errors = [d for d in validate_model(model) if d.severity == "error"]
        assert any("nowhere" in d.message for d in errors)

    def test_diagnostics_sorted_by_location(self):
        model = gen_model(3)
        diags = validate_model(model)
        keys = [(d.location, d.severity, d.message) for d in diags]
        assert keys == sorted(keys)

    def test_unit_mix_warns(self):
        model = scoped_model(global_v=1)
        model.globals["t_s"] = lit("t_s", 3, "s")
        model.globals["c_eur"] = lit("c_eur", 2, "eur")
        model.globals["mix"] = Parameter("mix", parse_expr("t_s + c_eur"))
        warnings = [d for d in validate_model(model) if d.severity == "warning"]
        assert any("mixes units" in d.message for d in warnings)

    def test_exhaustive_digraphs_up_to_4_nodes(self):
        """Cycle detection agrees with brute-force reachability on all digraphs
        over <= 4 assemblies (every subset of the 16 possible produced links)."""
        for n in (1, 2, 3, 4):
            nodes = [f"a{i}" for i in range(n)]
            pairs = list(itertools.product(range(n), repeat=2))
            ops, components = self._digraph_pieces(nodes, pairs)
            for mask in range(1 << len(pairs)):
                edges = [pairs[i] for i in range(len(pairs)) if mask & (1 << i)]
                flagged = self._engine_flags_cycle(nodes, edges, ops, components)
                assert flagged == self._brute_force_cyclic(n, edges)

    @staticmethod
    def _brute_force_cyclic(n, edges) -> bool:
        reach = [[False] * n for _ in range(n)]
        for a, b in edges:
            reach[a][b] = True
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    reach[i][j] = reach[i][j] or (reach[i][k] and reach[k][j])
        return any(reach[i][i] for i in range(n))

    @staticmethod
    def _digraph_pieces(nodes, pairs):
        ops = {"op0": Operation(
            id="op0", name="op0", process_id="proc",
            cycle_time_s=Num(1.0), parts_per_cycle=Num(1.0),
            machine_rate_per_h=Num(1.0), labor_rate_per_h=Num(0.0),
            crew_size=Num(0.0), scrap_rate=Num(0.0),
            consumable_cost_per_part=Num(0.0))}
        components = {
            f"c{a}_{b}": Component(f"c{a}_{b}", f"c{a}_{b}", Kind.PRODUCED,
                                   Num(1.0), Num(1.0), sub_assembly=nodes[b])
            for a, b in pairs
        }
        return ops, components

    @staticmethod
    def _engine_flags_cycle(nodes, edges, ops=None, components=None) -> bool:
        if ops is None or components is None:
            pairs = sorted(set(edges))
            ops, components = TestValidation._digraph_pieces(nodes, pairs)
        links = {aid: [] for aid in nodes}
        for a, b in edges:
            links[nodes[a]].append(f"c{a}_{b}")
        assemblies = {aid: Assembly(aid, aid, tuple(links[aid]), ("op0",))
                      for aid in nodes}
        used = {cid for ids in links.values() for cid in ids}
        model = CostModel(id="g", processes={"proc": ProcessDef("proc")},
                          components={cid: components[cid] for cid in sorted(used)},
                          operations=ops,
                          assemblies=assemblies, root_assembly=nodes[0])
        return any("cycle" in d.message for d in validate_model(model)
                   if d.severity == "error")

    def test_validation_soundness_fuzz(self):
        """A clean model plus a complete part spec never hits UnresolvedParameter."""
        for seed in range(150):
            model = gen_model(seed)
            assert not [d for d in validate_model(model) if d.severity == "error"]
            part = gen_part(seed * 31 + 7, model)
            compute_part_cost(model, part, validated=True)  # must not raise
