"""Bundled sand-casting reference model, part spec and what-if levers.

The bundle ships as a model file plus JSON part/series fixtures under
``castcost/data``; the expected total committed next to them was produced
by the flat recomputation in the test suite, never by this engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .model import CostModel, PartSpec
from .modelfile import ModelDocument, parse_model
from .rollup import SeriesSpec

REFERENCE_MODEL_ID = "foundry_sand_reference"


@dataclass(frozen=True)
class Lever:
    """One workbench control: where it applies and its plausible range."""

    name: str
    description: str
    scope: str  # "part" | "scenario" | "material_choice"
    lo: float | None = None
    hi: float | None = None
    step: float | None = None
    choices: tuple[str, ...] = ()
    unit: str = ""

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "description": self.description, "scope": self.scope}
        if self.lo is not None:
            out["lo"] = self.lo
        if self.hi is not None:
            out["hi"] = self.hi
        if self.step is not None:
            out["step"] = self.step
        if self.choices:
            out["choices"] = list(self.choices)
        if self.unit:
            out["unit"] = self.unit
        return out


@dataclass(frozen=True)
class ReferenceBundle:
    model: CostModel
    document: ModelDocument
    part: PartSpec
    series: SeriesSpec
    target: float
    oracle_total: float
    levers: tuple[Lever, ...] = field(default_factory=tuple)


def _data_text(name: str) -> str:
    return resources.files("castcost.data").joinpath(name).read_text(encoding="utf-8")


def build_reference_model() -> ReferenceBundle:
    """Load the bundled model, part, series and committed expected total."""
    document = parse_model(_data_text("reference.cmdl"))
    part_raw = json.loads(_data_text("reference_part.json"))
    series_raw = json.loads(_data_text("reference_series.json"))
    expected = json.loads(_data_text("reference_expected.json"))
    part = PartSpec(part_raw["process"], part_raw["material"], dict(part_raw["params"]))
    series = SeriesSpec(int(series_raw["quantity"]), float(series_raw["tooling_cost"]))
    return ReferenceBundle(
        model=document.model,
        document=document,
        part=part,
        series=series,
        target=float(expected["target"]),
        oracle_total=float(expected["oracle_total"]),
        levers=tuple(reference_levers()),
    )


def reference_levers() -> list[Lever]:
    """Workbench levers for the reference model, with plausible ranges."""
    return [
        Lever("parts_per_mold", "castings per mold (cluster size)", "part",
              lo=1, hi=8, step=1, unit="count"),
        Lever("n_cores", "cores per casting (parting-line choice)", "part",
              lo=0, hi=6, step=1, unit="count"),
        Lever("quality_class", "required quality class (drives scrap)", "part",
              lo=1, hi=3, step=1, unit="class"),
        Lever("part_mass_kg", "net part mass", "part",
              lo=0.5, hi=200, unit="kg"),
        Lever("alloy_id", "poured alloy (part material)", "material_choice",
              choices=("ge20", "ge25")),
        Lever("scrap_q1", "scrap rate override, class 1", "scenario", lo=0, hi=0.2),
        Lever("scrap_q2", "scrap rate override, class 2", "scenario", lo=0, hi=0.2),
        Lever("scrap_q3", "scrap rate override, class 3", "scenario", lo=0, hi=0.3),
        Lever("pouring_scrap_rate", "pouring scrap override", "scenario", lo=0, hi=0.1),
        Lever("remoulage_scrap_rate", "mold-closing scrap override", "scenario", lo=0, hi=0.1),
        Lever("core_scrap_rate", "core-making scrap override", "scenario", lo=0, hi=0.15),
        Lever("shakeout_scrap_rate", "shakeout scrap override", "scenario", lo=0, hi=0.1),
    ]


def levers_for_model(model: CostModel) -> list[Lever]:
    """Levers for an arbitrary model: the curated set for the bundled one,
    otherwise every declared part input as an unbounded control."""
    if model.id == REFERENCE_MODEL_ID:
        return reference_levers()
    levers = [
        Lever(name, "part input", "part", unit=unit)
        for name, unit in model.part_inputs.items()
    ]
    if model.materials:
        levers.append(
            Lever("material", "part material", "material_choice",
                  choices=tuple(model.materials))
        )
    return levers
