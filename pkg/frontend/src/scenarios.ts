// Scenario board: one column per what-if scenario with its total, delta
// against the base, and the three largest delta nodes from the delta tree.

import type { DeltaNode, WhatifResponse } from "./api.js";
import { show } from "./state.js";

export function topDeltaNodes(tree: DeltaNode, count: number): DeltaNode[] {
  const all: DeltaNode[] = [];
  const walk = (node: DeltaNode) => {
    all.push(node);
    for (const child of node.children) walk(child);
  };
  for (const child of tree.children) walk(child);
  return all
    .sort((a, b) => Math.abs(b.delta) - Math.abs(a.delta) || a.label.localeCompare(b.label))
    .slice(0, count);
}

export function renderScenarioBoard(container: HTMLElement, whatif: WhatifResponse | null): void {
  container.innerHTML = "";
  if (!whatif || whatif.scenarios.length === 0) {
    const empty = document.createElement("p");
    empty.className = "scenarios__empty";
    empty.textContent = "No scenarios defined.";
    container.appendChild(empty);
    return;
  }
  const base = document.createElement("div");
  base.className = "scenario scenario--base";
  const baseTitle = document.createElement("h3");
  baseTitle.textContent = "base";
  const baseTotal = document.createElement("div");
  baseTotal.className = "scenario__total";
  baseTotal.dataset.role = "base-total";
  baseTotal.textContent = show(whatif.base_total);
  base.append(baseTitle, baseTotal);
  container.appendChild(base);

  for (const column of whatif.scenarios) {
    const card = document.createElement("div");
    card.className = "scenario";
    card.dataset.scenario = column.id;

    const title = document.createElement("h3");
    title.textContent = column.label || column.id;
    card.appendChild(title);

    const total = document.createElement("div");
    total.className = "scenario__total";
    total.dataset.role = "scenario-total";
    total.textContent = show(column.total);
    card.appendChild(total);

    const delta = document.createElement("div");
    delta.className = `scenario__delta ${column.delta > 0 ? "delta--up" : "delta--down"}`;
    delta.dataset.role = "scenario-delta";
    delta.textContent = show(column.delta);
    card.appendChild(delta);

    const list = document.createElement("ul");
    list.className = "scenario__drivers";
    for (const node of topDeltaNodes(column.tree, 3)) {
      const item = document.createElement("li");
      const label = document.createElement("span");
      label.textContent = `${node.label} `;
      const amount = document.createElement("span");
      amount.dataset.role = "driver-delta";
      amount.dataset.label = node.label;
      amount.textContent = show(node.delta);
      item.append(label, amount);
      list.appendChild(item);
    }
    card.appendChild(list);
    container.appendChild(card);
  }
}
