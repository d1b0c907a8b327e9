// Integration against the real cost service: spawn the Python CLI's serve
// command and drive it with the same ApiClient the workbench uses. Verifies
// the client consumes the service's actual wire format, and that the
// committed fixtures stay in sync with the engine.

import { spawn, type ChildProcess } from "node:child_process";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { loadFixtures } from "./helpers.js";

const repoRoot = join(dirname(fileURLToPath(import.meta.url)), "..", "..");
const fixtures = loadFixtures();

let child: ChildProcess | null = null;
let baseUrl = "";

function startService(): Promise<string> {
  return new Promise((resolve, reject) => {
    child = spawn(
      "python3",
      ["-m", "castcost.cli", "serve", "--models", "src/castcost/data", "--port", "0"],
      {
        cwd: repoRoot,
        env: { ...process.env, PYTHONPATH: join(repoRoot, "src") },
        stdio: ["ignore", "ignore", "pipe"],
      },
    );
    let buffer = "";
    const timer = setTimeout(
      () => reject(new Error(`service did not start: ${buffer}`)), 15_000);
    child.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/listening on (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    child.on("error", (err) => {
      clearTimeout(timer);
      reject(err);
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early (${code}): ${buffer}`));
    });
  });
}

beforeAll(async () => {
  baseUrl = await startService();
}, 20_000);

afterAll(() => {
  child?.kill();
});

describe("live service integration", () => {
  it("lists the reference model and its levers", async () => {
    const api = new ApiClient(baseUrl);
    const models = await api.listModels();
    expect(models).toEqual([{ id: "foundry_sand_reference", version: 1 }]);
    const levers = await api.levers("foundry_sand_reference");
    expect(levers.map((l) => l.name)).toContain("parts_per_mold");
  });

  it("computes the reference part identically to the committed fixtures", async () => {
    const api = new ApiClient(baseUrl);
    const report = await api.compute("foundry_sand_reference", {
      part: fixtures.part,
      series: fixtures.series,
      target: fixtures.target,
    });
    expect(report).toEqual(fixtures.compute_base);
  });

  it("surfaces computation failures as API errors", async () => {
    const api = new ApiClient(baseUrl);
    await expect(
      api.compute("foundry_sand_reference", {
        part: { ...fixtures.part, params: {} },
      }),
    ).rejects.toThrowError(/missing required input/);
  });
});
