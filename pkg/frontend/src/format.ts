// Single formatting path for every service-sourced number: the
// traceability tests match rendered text back to response values through
// these helpers.

export function fmt(value: number | null | undefined, digits = 6): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "–";
  if (value !== 0 && Math.abs(value) < 1e-4) return value.toExponential(3);
  return value.toFixed(digits).replace(/\.?0+$/, "") || "0";
}

export function fmtPct(value: number): string {
  return `${value >= 0 ? "+" : ""}${(value * 100).toFixed(1)}%`;
}
