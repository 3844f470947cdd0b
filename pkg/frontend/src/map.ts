// Region map: a choropleth over the static state-boundary file, shaded by
// energy intensity. Hovering previews the counterfactual; clicking pins
// it. States absent from the intensity table render hatched and do not
// respond to the pointer.

import gridData from "../assets/us-states-grid.json";
import { fmt } from "./format";
import type { IntensityRowDto } from "./types";

const TILE = 34;
const GAP = 3;

export interface MapHandlers {
  onHover(code: string): void;
  onHoverOut(): void;
  onPin(code: string): void;
}

export interface MapState {
  rows: IntensityRowDto[];
  baselineRegion: string | null;
  pinnedRegion: string | null;
}

interface StateTile {
  code: string;
  name: string;
  col: number;
  row: number;
}

const tiles: StateTile[] = (gridData as { states: StateTile[] }).states;

/** Light-to-dark ramp over the table's own intensity range (presentation
 * only; the numbers themselves come from the service). */
function shade(value: number, min: number, max: number): string {
  const t = max > min ? (value - min) / (max - min) : 0;
  const lightness = 88 - t * 55;
  return `hsl(16, 72%, ${lightness.toFixed(0)}%)`;
}

export function renderMap(container: HTMLElement, state: MapState, handlers: MapHandlers): void {
  const byCode = new Map(state.rows.map((r) => [r.region_code, r.intensity_lbs_per_kwh]));
  const values = state.rows.map((r) => r.intensity_lbs_per_kwh);
  const min = values.length ? Math.min(...values) : 0;
  const max = values.length ? Math.max(...values) : 1;

  const cols = Math.max(...tiles.map((t) => t.col)) + 1;
  const rows = Math.max(...tiles.map((t) => t.row)) + 1;
  const width = cols * (TILE + GAP) + GAP;
  const height = rows * (TILE + GAP) + GAP + 18;

  const cells = tiles
    .map((tile) => {
      const x = GAP + tile.col * (TILE + GAP);
      const y = GAP + tile.row * (TILE + GAP);
      const intensity = byCode.get(tile.code);
      const known = intensity !== undefined;
      const classes = ["state-tile"];
      if (!known) classes.push("missing");
      if (tile.code === state.baselineRegion) classes.push("baseline-region");
      if (tile.code === state.pinnedRegion) classes.push("pinned-region");
      const fill = known ? shade(intensity, min, max) : "url(#hatch)";
      const title = known
        ? `${tile.name}: ${fmt(intensity, 3)} lbs CO2/kWh`
        : `${tile.name}: no intensity data`;
      return `
        <g class="${classes.join(" ")}" data-code="${tile.code}" data-known="${known}">
          <rect x="${x}" y="${y}" width="${TILE}" height="${TILE}" rx="4" fill="${fill}">
            <title>${title}</title>
          </rect>
          <text x="${x + TILE / 2}" y="${y + TILE / 2 + 4}" text-anchor="middle" class="tile-label">${tile.code}</text>
        </g>`;
    })
    .join("");

  container.innerHTML = `
    <svg viewBox="0 0 ${width} ${height}" class="region-map" role="img">
      <defs>
        <pattern id="hatch" width="6" height="6" patternTransform="rotate(45)" patternUnits="userSpaceOnUse">
          <rect width="6" height="6" fill="#eee"></rect>
          <line x1="0" y1="0" x2="0" y2="6" stroke="#bbb" stroke-width="2"></line>
        </pattern>
      </defs>
      ${cells}
      <text x="${GAP}" y="${height - 4}" class="map-caption">intensity ${fmt(min, 2)}–${fmt(max, 2)} lbs CO2/kWh; click a state to pin it</text>
    </svg>`;

  for (const group of Array.from(container.querySelectorAll<SVGGElement>("g.state-tile"))) {
    const code = group.dataset.code!;
    if (group.dataset.known !== "true") continue; // hatched states are unselectable
    group.addEventListener("mouseenter", () => handlers.onHover(code));
    group.addEventListener("mouseleave", () => handlers.onHoverOut());
    group.addEventListener("click", () => handlers.onPin(code));
  }
}
