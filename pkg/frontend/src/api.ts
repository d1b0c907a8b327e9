// Typed client for the cost-service HTTP API. The workbench displays numbers
// from these responses verbatim and performs no cost arithmetic of its own.

export interface ModelInfo {
  id: string;
  version: number;
}

export interface Lever {
  name: string;
  description: string;
  scope: "part" | "scenario" | "material_choice";
  lo?: number;
  hi?: number;
  step?: number;
  choices?: string[];
  unit?: string;
}

export interface BreakdownLeaf {
  label: string;
  source_id: string;
  category: string;
  amount: number;
  quantity: number;
}

export interface BreakdownNode {
  label: string;
  subtotal: number;
  scrap_multiplier: number;
  category_totals: Record<string, number>;
  children: (BreakdownNode | BreakdownLeaf)[];
}

export function isLeaf(child: BreakdownNode | BreakdownLeaf): child is BreakdownLeaf {
  return "amount" in child;
}

export interface SeriesSpec {
  quantity: number;
  tooling_cost: number;
}

export interface ComputeReport {
  model: string;
  currency: string;
  direct_cost_per_part: number;
  series?: SeriesSpec & { amortized_cost_per_part: number };
  cost_per_part: number;
  indicators?: {
    cost_to_target_ratio: number;
    budget_overrun_ratio: number;
  };
  breakdown: BreakdownNode;
}

export interface DeltaNode {
  label: string;
  base: number;
  variant: number;
  delta: number;
  relative_delta: number | null;
  children: DeltaNode[];
}

export interface WhatifColumn {
  id: string;
  label: string;
  total: number;
  delta: number;
  tree: DeltaNode;
}

export interface WhatifResponse {
  model: string;
  base_total: number;
  scenarios: WhatifColumn[];
}

export interface PartPayload {
  process: string;
  material: string;
  params: Record<string, number>;
}

export interface ComputeBody {
  part: PartPayload;
  scenario?: { id: string; overrides: Record<string, number> };
  series?: SeriesSpec;
  target?: number;
}

export interface ScenarioDef {
  id: string;
  label: string;
  overrides: Record<string, number>;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let message = text;
      try {
        message = (JSON.parse(text) as { message?: string }).message ?? text;
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(response.status, message);
    }
    return JSON.parse(text) as T;
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request("GET", "/api/models");
  }

  levers(modelId: string): Promise<Lever[]> {
    return this.request("GET", `/api/models/${modelId}/levers`);
  }

  compute(modelId: string, body: ComputeBody): Promise<ComputeReport> {
    return this.request("POST", `/api/models/${modelId}/compute`, body);
  }

  whatif(modelId: string, part: PartPayload, scenarios: ScenarioDef[]): Promise<WhatifResponse> {
    return this.request("POST", `/api/models/${modelId}/whatif`, { part, scenarios });
  }
}

/**
 * Serializes a stream of requests so only the most recently issued one may
 * publish its result: older responses arriving late resolve to undefined.
 */
export class LatestGate {
  private ticket = 0;

  async run<T>(task: () => Promise<T>): Promise<T | undefined> {
    const mine = ++this.ticket;
    const result = await task();
    return mine === this.ticket ? result : undefined;
  }
}
