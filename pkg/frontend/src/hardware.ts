// Alternative-hardware panel: the profile's devices with editable
// quantities plus rows added from the catalog (with autocomplete).
// Alternative rows are styled distinctly from the original configuration.
// Commit issues one what-if through the store.

import type { CatalogEntryDto, HardwareSpecDto } from "./types";

export interface HardwareHandlers {
  onCommit(specs: HardwareSpecDto[] | null): void;
}

export interface HardwarePanelState {
  original: HardwareSpecDto[];
  alternative: HardwareSpecDto[] | null; // null = no hardware counterfactual
  catalog: CatalogEntryDto[];
}

function rowsFrom(state: HardwarePanelState): HardwareSpecDto[] {
  return (state.alternative ?? state.original).map((s) => ({ ...s }));
}

function differs(a: HardwareSpecDto[], b: HardwareSpecDto[]): boolean {
  if (a.length !== b.length) return true;
  return a.some(
    (s, i) => s.catalog_key !== b[i]!.catalog_key || s.quantity !== b[i]!.quantity,
  );
}

export function renderHardwarePanel(
  container: HTMLElement,
  state: HardwarePanelState,
  handlers: HardwareHandlers,
): void {
  const rows = rowsFrom(state);
  const originalKeys = new Set(state.original.map((s) => `${s.catalog_key}=${s.quantity}`));

  const rowHtml = rows
    .map((spec, i) => {
      const isOriginal = originalKeys.has(`${spec.catalog_key}=${spec.quantity}`);
      return `
        <div class="hw-row ${isOriginal ? "original" : "alternative"}" data-index="${i}">
          <span class="hw-name">${spec.catalog_key}</span>
          <input type="number" class="hw-qty" min="1" step="1" value="${spec.quantity}" data-index="${i}">
          <span class="hw-tag">${isOriginal ? "original" : "alternative"}</span>
        </div>`;
    })
    .join("");

  container.innerHTML = `
    <header class="panel-header"><span>alternative hardware</span></header>
    <div class="hw-rows">${rowHtml || '<p class="empty">select a profile to see its hardware</p>'}</div>
    <div class="hw-add">
      <input type="text" class="hw-search" list="hw-options" placeholder="add device from catalog…">
      <datalist id="hw-options">
        ${state.catalog.map((e) => `<option value="${e.name}"></option>`).join("")}
      </datalist>
      <button class="hw-add-button">add</button>
      <button class="hw-reset-button" ${state.alternative ? "" : "disabled"}>reset to original</button>
    </div>`;

  const commit = (nextRows: HardwareSpecDto[]) => {
    handlers.onCommit(differs(nextRows, state.original) ? nextRows : null);
  };

  for (const input of Array.from(container.querySelectorAll<HTMLInputElement>(".hw-qty"))) {
    input.addEventListener("change", () => {
      const next = rowsFrom(state);
      const index = Number(input.dataset.index);
      const quantity = Math.max(1, Math.round(Number(input.value) || 1));
      next[index] = { ...next[index]!, quantity };
      commit(next);
    });
  }

  container.querySelector(".hw-add-button")?.addEventListener("click", () => {
    const search = container.querySelector<HTMLInputElement>(".hw-search");
    const name = search?.value.trim();
    if (!name) return;
    commit([...rowsFrom(state), { catalog_key: name, quantity: 1 }]);
  });

  container.querySelector(".hw-reset-button")?.addEventListener("click", () => {
    handlers.onCommit(null);
  });
}
