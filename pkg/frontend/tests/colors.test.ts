import { describe, expect, it } from "vitest";

import { MAKE_PART_COLOR, colorFor, legend } from "../src/colors.js";

describe("colorFor", () => {
  it("is stable for the same function name", () => {
    expect(colorFor("slat_row")).toBe(colorFor("slat_row"));
  });

  it("colors make_part gray", () => {
    expect(colorFor("make_part")).toBe(MAKE_PART_COLOR);
  });

  it("assigns the fixture functions distinct colors", () => {
    const colors = ["slat_row", "four_legs", "side_panels"].map(colorFor);
    expect(new Set(colors).size).toBe(3);
    expect(colors).not.toContain(MAKE_PART_COLOR);
  });
});

describe("legend", () => {
  it("deduplicates while preserving first-seen order", () => {
    const entries = legend(["slat_row", "make_part", "slat_row", "four_legs"]);
    expect(entries.map((e) => e.fn)).toEqual(["slat_row", "make_part", "four_legs"]);
    expect(entries[1].color).toBe(MAKE_PART_COLOR);
  });
});
