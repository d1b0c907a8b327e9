// Collapsible breakdown tree: one <details> per assembly node, leaf rows with
// category chips, bar lengths proportional to each node's share of the root.

import { isLeaf, type BreakdownLeaf, type BreakdownNode } from "./api.js";
import { show } from "./state.js";

const CATEGORY_ORDER = ["material", "labor", "machine", "consumable", "scrap", "tooling"];

export function renderBreakdown(container: HTMLElement, root: BreakdownNode | null): void {
  container.innerHTML = "";
  if (!root) {
    const empty = document.createElement("p");
    empty.textContent = "Nothing computed yet.";
    container.appendChild(empty);
    return;
  }
  container.appendChild(renderLegend(root));
  container.appendChild(renderNode(root, root.subtotal || 1));
}

function renderLegend(root: BreakdownNode): HTMLElement {
  const legend = document.createElement("div");
  legend.className = "legend";
  for (const category of CATEGORY_ORDER) {
    if (!(category in root.category_totals)) continue;
    const entry = document.createElement("span");
    entry.className = `legend__entry cat--${category}`;
    const value = document.createElement("span");
    value.dataset.role = "category-total";
    value.dataset.category = category;
    value.textContent = show(root.category_totals[category]);
    entry.append(`${category} `, value);
    legend.appendChild(entry);
  }
  return legend;
}

function renderNode(node: BreakdownNode, rootTotal: number): HTMLElement {
  const details = document.createElement("details");
  details.open = true;
  details.className = "node";
  details.dataset.label = node.label;

  const summary = document.createElement("summary");
  summary.className = "node__summary";
  const label = document.createElement("span");
  label.className = "node__label";
  label.textContent = node.label;
  const bar = barFor(node.subtotal, rootTotal, "node__bar");
  const amount = document.createElement("span");
  amount.className = "node__subtotal";
  amount.dataset.role = "subtotal";
  amount.textContent = show(node.subtotal);
  summary.append(label, bar, amount);
  details.appendChild(summary);

  const children = document.createElement("div");
  children.className = "node__children";
  for (const child of node.children) {
    children.appendChild(isLeaf(child) ? renderLeaf(child, rootTotal) : renderNode(child, rootTotal));
  }
  details.appendChild(children);
  return details;
}

function renderLeaf(leaf: BreakdownLeaf, rootTotal: number): HTMLElement {
  const row = document.createElement("div");
  row.className = "leaf";
  row.dataset.label = leaf.label;
  const chip = document.createElement("span");
  chip.className = `leaf__chip cat--${leaf.category}`;
  chip.textContent = leaf.category;
  const label = document.createElement("span");
  label.className = "leaf__label";
  label.textContent = leaf.label;
  const bar = barFor(leaf.amount, rootTotal, "leaf__bar");
  const amount = document.createElement("span");
  amount.className = "leaf__amount";
  amount.dataset.role = "amount";
  amount.textContent = show(leaf.amount);
  row.append(chip, label, bar, amount);
  return row;
}

function barFor(value: number, rootTotal: number, className: string): HTMLElement {
  const bar = document.createElement("span");
  bar.className = className;
  const fill = document.createElement("span");
  fill.className = "bar__fill";
  const share = rootTotal > 0 ? Math.max(0, Math.min(value / rootTotal, 1)) : 0;
  fill.style.width = `${share * 100}%`;
  bar.appendChild(fill);
  return bar;
}
