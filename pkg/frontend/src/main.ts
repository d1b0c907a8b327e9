// Workbench wiring: fetch models and levers, compute on every lever edit
// (debounced), keep only the newest response, and render gauge, breakdown
// and scenario board. All computation happens server-side.

import { ApiClient, LatestGate, type ComputeBody, type Lever, type ScenarioDef } from "./api.js";
import { renderBreakdown } from "./breakdown.js";
import { renderGauge } from "./gauge.js";
import { renderLeverPanel, type LeverChange } from "./levers.js";
import { renderScenarioBoard } from "./scenarios.js";
import { initialState, type WorkbenchState } from "./state.js";

export interface WorkbenchConfig {
  api: ApiClient;
  part: { process: string; material: string; params: Record<string, number> };
  series?: { quantity: number; tooling_cost: number };
  target?: number;
  scenarios?: ScenarioDef[];
  debounceMs?: number;
}

export interface WorkbenchHandles {
  state: WorkbenchState;
  refresh: () => Promise<void>;
  elements: {
    gauge: HTMLElement;
    levers: HTMLElement;
    breakdown: HTMLElement;
    scenarios: HTMLElement;
    status: HTMLElement;
  };
}

export async function initWorkbench(root: HTMLElement, config: WorkbenchConfig): Promise<WorkbenchHandles> {
  root.innerHTML = `
    <header class="topbar">
      <h1>castcost workbench</h1>
      <span data-role="model-name" class="topbar__model"></span>
      <span data-role="status" class="topbar__status"></span>
    </header>
    <main class="layout">
      <section id="levers" class="panel" aria-label="levers"></section>
      <section class="panel panel--center">
        <div id="gauge" aria-label="target gauge"></div>
        <div id="breakdown" aria-label="cost breakdown"></div>
      </section>
      <section id="scenarios" class="panel" aria-label="scenarios"></section>
    </main>`;

  const elements = {
    gauge: root.querySelector<HTMLElement>("#gauge")!,
    levers: root.querySelector<HTMLElement>("#levers")!,
    breakdown: root.querySelector<HTMLElement>("#breakdown")!,
    scenarios: root.querySelector<HTMLElement>("#scenarios")!,
    status: root.querySelector<HTMLElement>("[data-role=status]")!,
  };

  const state = initialState();
  state.part = {
    process: config.part.process,
    material: config.part.material,
    params: { ...config.part.params },
  };
  state.series = config.series ?? null;
  state.target = config.target ?? null;
  state.scenarios = config.scenarios ?? [];

  const gate = new LatestGate();
  const whatifGate = new LatestGate();

  const models = await config.api.listModels();
  if (models.length === 0) {
    elements.status.textContent = "no models registered";
    renderGauge(elements.gauge, null);
    renderBreakdown(elements.breakdown, null);
    renderScenarioBoard(elements.scenarios, null);
    return { state, refresh: async () => {}, elements };
  }
  state.modelId = models[0].id;
  root.querySelector<HTMLElement>("[data-role=model-name]")!.textContent =
    `${state.modelId} v${models[0].version}`;

  const levers: Lever[] = await config.api.levers(state.modelId);

  const computeBody = (): ComputeBody => {
    const body: ComputeBody = { part: state.part };
    if (Object.keys(state.scenarioOverrides).length > 0) {
      body.scenario = { id: "workbench", overrides: { ...state.scenarioOverrides } };
    }
    if (state.series) body.series = state.series;
    if (state.target !== null) body.target = state.target;
    return body;
  };

  const refresh = async (): Promise<void> => {
    if (!state.modelId) return;
    elements.status.textContent = "computing...";
    try {
      const report = await gate.run(() => config.api.compute(state.modelId!, computeBody()));
      if (report === undefined) return; // a newer request superseded this one
      state.lastReport = report;
      renderGauge(elements.gauge, report);
      renderBreakdown(elements.breakdown, report.breakdown);
      elements.status.textContent = "";
    } catch (error) {
      elements.status.textContent = `error: ${(error as Error).message}`;
    }
  };

  const refreshWhatif = async (): Promise<void> => {
    if (!state.modelId || state.scenarios.length === 0) {
      renderScenarioBoard(elements.scenarios, null);
      return;
    }
    const whatif = await whatifGate.run(() =>
      config.api.whatif(state.modelId!, state.part, state.scenarios));
    if (whatif === undefined) return;
    state.lastWhatif = whatif;
    renderScenarioBoard(elements.scenarios, whatif);
  };

  const onLeverChange = (change: LeverChange): void => {
    if (change.scope === "material_choice") {
      state.part = { ...state.part, material: String(change.value) };
    } else if (change.scope === "scenario") {
      state.scenarioOverrides = { ...state.scenarioOverrides, [change.name]: Number(change.value) };
    } else {
      state.part = {
        ...state.part,
        params: { ...state.part.params, [change.name]: Number(change.value) },
      };
    }
    void refresh();
    void refreshWhatif();
  };

  renderLeverPanel(elements.levers, {
    levers,
    values: state.part.params,
    material: state.part.material,
    onChange: onLeverChange,
    debounceMs: config.debounceMs,
  });

  await refresh();
  await refreshWhatif();
  return { state, refresh, elements };
}

interface BootConfig {
  baseUrl?: string;
  part?: WorkbenchConfig["part"];
  series?: WorkbenchConfig["series"];
  target?: number;
  scenarios?: ScenarioDef[];
}

declare global {
  interface Window {
    CASTCOST_CONFIG?: BootConfig;
  }
}

// Browser entry point: configuration via window.CASTCOST_CONFIG, with the
// service assumed local by default.
if (typeof document !== "undefined" && document.getElementById("app")) {
  const boot = window.CASTCOST_CONFIG ?? {};
  const api = new ApiClient(boot.baseUrl ?? "http://127.0.0.1:8125");
  void initWorkbench(document.getElementById("app")!, {
    api,
    part: boot.part ?? { process: "sand_casting", material: "ge20", params: {} },
    series: boot.series,
    target: boot.target,
    scenarios: boot.scenarios ?? [],
  });
}
