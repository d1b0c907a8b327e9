// Workbench state: one part being iterated toward its target cost.

import type { ComputeReport, PartPayload, ScenarioDef, SeriesSpec, WhatifResponse } from "./api.js";

export interface WorkbenchState {
  modelId: string | null;
  part: PartPayload;
  series: SeriesSpec | null;
  target: number | null;
  scenarios: ScenarioDef[];
  scenarioOverrides: Record<string, number>;
  lastReport: ComputeReport | null;
  lastWhatif: WhatifResponse | null;
}

export function initialState(): WorkbenchState {
  return {
    modelId: null,
    part: { process: "", material: "", params: {} },
    series: null,
    target: null,
    scenarios: [],
    scenarioOverrides: {},
    lastReport: null,
    lastWhatif: null,
  };
}

/** Format an API-provided number for display without altering its value. */
export function show(value: number): string {
  return String(value);
}
