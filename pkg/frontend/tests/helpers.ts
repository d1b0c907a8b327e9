// Shared test plumbing: fixtures captured from the real cost service and a
// fetch stub that answers with them.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { ComputeBody, ComputeReport, Lever, ModelInfo, WhatifResponse } from "../src/api.js";

export interface Fixtures {
  models: ModelInfo[];
  levers: Lever[];
  part: { process: string; material: string; params: Record<string, number> };
  series: { quantity: number; tooling_cost: number };
  target: number;
  compute_by_parts_per_mold: Record<string, ComputeReport>;
  compute_base: ComputeReport;
  whatif: WhatifResponse;
  sweep: { rows: { value: number; total: number; target_ratio: number }[] };
}

export function loadFixtures(): Fixtures {
  const here = dirname(fileURLToPath(import.meta.url));
  const raw = readFileSync(join(here, "fixtures", "reference_api.json"), "utf-8");
  return JSON.parse(raw) as Fixtures;
}

function jsonResponse(payload: unknown, status = 200): Response {
  const body = JSON.stringify(payload);
  return {
    ok: status >= 200 && status < 300,
    status,
    text: () => Promise.resolve(body),
  } as unknown as Response;
}

export interface StubCall {
  method: string;
  url: string;
  body: unknown;
}

/** fetch stub answering from fixtures; compute is routed by parts_per_mold. */
export function makeStubFetch(fixtures: Fixtures) {
  const calls: StubCall[] = [];
  const stub = (async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, url, body });
    if (method === "GET" && url.endsWith("/api/models")) {
      return jsonResponse(fixtures.models);
    }
    if (method === "GET" && url.endsWith("/levers")) {
      return jsonResponse(fixtures.levers);
    }
    if (method === "POST" && url.endsWith("/compute")) {
      const compute = body as ComputeBody;
      const ppm = compute.part.params["parts_per_mold"];
      const report = fixtures.compute_by_parts_per_mold[String(ppm)];
      if (!report) {
        return jsonResponse({ code: "computation_error", message: `no fixture for parts_per_mold=${ppm}` }, 422);
      }
      return jsonResponse(report);
    }
    if (method === "POST" && url.endsWith("/whatif")) {
      return jsonResponse(fixtures.whatif);
    }
    return jsonResponse({ code: "not_found", message: `no stub for ${method} ${url}` }, 404);
  }) as typeof fetch;
  return { stub, calls };
}

export function mount(): HTMLElement {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

export function text(root: ParentNode, selector: string): string {
  const el = root.querySelector<HTMLElement>(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el.textContent ?? "";
}
