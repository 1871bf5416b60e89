/** Stable per-function colors; parts made directly with make_part are gray. */

export const MAKE_PART_COLOR = "#9e9e9e";

const PALETTE = [
  "#e6574b", // red
  "#4b7be6", // blue
  "#53b86a", // green
  "#e6a84b", // orange
  "#9a5fe0", // purple
  "#3fb8b0", // teal
  "#d35fb0", // magenta
  "#a0b23f", // olive
];

function hashName(name: string): number {
  let h = 2166136261;
  for (let i = 0; i < name.length; i++) {
    h ^= name.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

/**
 * Color for the producing function of a part. The same function name always
 * maps to the same color, in any session and regardless of load order.
 */
export function colorFor(fnName: string): string {
  if (fnName === "make_part") {
    return MAKE_PART_COLOR;
  }
  return PALETTE[hashName(fnName) % PALETTE.length];
}

/** Distinct legend entries for the functions present in a layout. */
export function legend(fnNames: string[]): Array<{ fn: string; color: string }> {
  const seen = new Set<string>();
  const out: Array<{ fn: string; color: string }> = [];
  for (const fn of fnNames) {
    if (!seen.has(fn)) {
      seen.add(fn);
      out.push({ fn, color: colorFor(fn) });
    }
  }
  return out;
}
