// Target gauge: cost-to-target ratio from the API, colored by threshold.

import type { ComputeReport } from "./api.js";
import { show } from "./state.js";

export type GaugeState = "green" | "amber" | "red";

export interface GaugeThresholds {
  amber: number; // ratios below this are green
  red: number; // ratios above this are red; [amber, red] is amber
}

export const DEFAULT_THRESHOLDS: GaugeThresholds = { amber: 1.0, red: 1.1 };

export function gaugeState(ratio: number, thresholds: GaugeThresholds = DEFAULT_THRESHOLDS): GaugeState {
  if (ratio < thresholds.amber) return "green";
  if (ratio <= thresholds.red) return "amber";
  return "red";
}

export function renderGauge(
  container: HTMLElement,
  report: ComputeReport | null,
  thresholds: GaugeThresholds = DEFAULT_THRESHOLDS,
): void {
  container.innerHTML = "";
  container.classList.add("gauge");
  container.classList.remove("gauge--green", "gauge--amber", "gauge--red");
  if (!report || !report.indicators) {
    const empty = document.createElement("p");
    empty.className = "gauge__empty";
    empty.textContent = "No target set.";
    container.appendChild(empty);
    return;
  }
  const ratio = report.indicators.cost_to_target_ratio;
  const state = gaugeState(ratio, thresholds);
  container.classList.add(`gauge--${state}`);

  const total = document.createElement("div");
  total.className = "gauge__total";
  const totalValue = document.createElement("span");
  totalValue.dataset.role = "cost-per-part";
  totalValue.textContent = show(report.cost_per_part);
  const unit = document.createElement("span");
  unit.className = "gauge__unit";
  unit.textContent = ` ${report.currency}/part`;
  total.append(totalValue, unit);
  container.appendChild(total);

  const badge = document.createElement("div");
  badge.className = "gauge__badge";
  badge.dataset.role = "target-ratio";
  badge.dataset.state = state;
  badge.textContent = show(ratio);
  container.appendChild(badge);

  const caption = document.createElement("div");
  caption.className = "gauge__caption";
  caption.textContent = "cost / target";
  container.appendChild(caption);

  const bar = document.createElement("div");
  bar.className = "gauge__bar";
  const fill = document.createElement("div");
  fill.className = "gauge__fill";
  fill.style.width = `${Math.min(ratio / 1.5, 1) * 100}%`;
  bar.appendChild(fill);
  const marker = document.createElement("div");
  marker.className = "gauge__marker";
  marker.style.left = `${(1 / 1.5) * 100}%`;
  bar.appendChild(marker);
  container.appendChild(bar);

  const overrun = document.createElement("div");
  overrun.className = "gauge__overrun";
  const overrunValue = document.createElement("span");
  overrunValue.dataset.role = "budget-overrun";
  overrunValue.textContent = show(report.indicators.budget_overrun_ratio);
  const overrunLabel = document.createElement("span");
  overrunLabel.className = "gauge__caption";
  overrunLabel.textContent = " budget overrun share";
  overrun.append(overrunValue, overrunLabel);
  container.appendChild(overrun);
}
