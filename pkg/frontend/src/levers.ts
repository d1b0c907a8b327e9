// Lever panel: one control per lever from /levers, range-validated, with a
// debounced change callback. Invalid input shows an inline message and never
// triggers a request.

import type { Lever } from "./api.js";

export interface LeverChange {
  scope: Lever["scope"];
  name: string;
  value: number | string;
}

export interface LeverPanelOptions {
  levers: Lever[];
  values: Record<string, number>;
  material: string;
  onChange: (change: LeverChange) => void;
  debounceMs?: number;
}

export function renderLeverPanel(container: HTMLElement, options: LeverPanelOptions): void {
  const debounceMs = options.debounceMs ?? 300;
  container.innerHTML = "";
  if (options.levers.length === 0) {
    const empty = document.createElement("p");
    empty.className = "levers__empty";
    empty.textContent = "This model exposes no levers.";
    container.appendChild(empty);
    return;
  }
  const timers = new Map<string, ReturnType<typeof setTimeout>>();
  const schedule = (name: string, run: () => void) => {
    const pending = timers.get(name);
    if (pending !== undefined) clearTimeout(pending);
    timers.set(name, setTimeout(run, debounceMs));
  };

  for (const lever of options.levers) {
    const row = document.createElement("div");
    row.className = "lever";
    row.dataset.lever = lever.name;

    const label = document.createElement("label");
    label.className = "lever__label";
    label.htmlFor = `lever-${lever.name}`;
    label.textContent = lever.unit ? `${lever.name} (${lever.unit})` : lever.name;
    label.title = lever.description;
    row.appendChild(label);

    if (lever.scope === "material_choice") {
      const select = document.createElement("select");
      select.id = `lever-${lever.name}`;
      select.className = "lever__input";
      for (const choice of lever.choices ?? []) {
        const option = document.createElement("option");
        option.value = choice;
        option.textContent = choice;
        option.selected = choice === options.material;
        select.appendChild(option);
      }
      select.addEventListener("change", () => {
        schedule(lever.name, () =>
          options.onChange({ scope: lever.scope, name: lever.name, value: select.value }));
      });
      row.appendChild(select);
    } else {
      const input = document.createElement("input");
      input.type = "number";
      input.id = `lever-${lever.name}`;
      input.className = "lever__input";
      if (lever.lo !== undefined) input.min = String(lever.lo);
      if (lever.hi !== undefined) input.max = String(lever.hi);
      if (lever.step !== undefined) input.step = String(lever.step);
      const current = options.values[lever.name];
      if (current !== undefined) input.value = String(current);

      const error = document.createElement("span");
      error.className = "lever__error";
      error.hidden = true;

      input.addEventListener("input", () => {
        const value = Number(input.value);
        const problem = validate(lever, input.value, value);
        if (problem) {
          input.classList.add("lever__input--invalid");
          error.textContent = problem;
          error.hidden = false;
          const pending = timers.get(lever.name);
          if (pending !== undefined) clearTimeout(pending);
          return;
        }
        input.classList.remove("lever__input--invalid");
        error.hidden = true;
        schedule(lever.name, () =>
          options.onChange({ scope: lever.scope, name: lever.name, value }));
      });
      row.appendChild(input);
      row.appendChild(error);
    }
    container.appendChild(row);
  }
}

function validate(lever: Lever, raw: string, value: number): string | null {
  if (raw.trim() === "" || Number.isNaN(value) || !Number.isFinite(value)) {
    return "enter a number";
  }
  if (lever.lo !== undefined && value < lever.lo) {
    return `minimum ${lever.lo}`;
  }
  if (lever.hi !== undefined && value > lever.hi) {
    return `maximum ${lever.hi}`;
  }
  return null;
}
