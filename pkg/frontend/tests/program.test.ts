import { describe, expect, it } from "vitest";

import { parseProgram, printProgram, withArgument } from "../src/program.js";

const PROGRAM = [
  "slat_row(frame(1, 0.45, 0.1, 0, 0.275, -0.45), 3);",
  'side_panels(frame(1, 0.25, 1, 0, -0.375, 0), "thin");',
  'make_part(frame(1, 0.08, 1, 0, -0.2, 0), "seat");',
  "",
].join("\n");

describe("parseProgram", () => {
  it("splits statements with function, frame, and arguments", () => {
    const statements = parseProgram(PROGRAM);
    expect(statements).toHaveLength(3);
    expect(statements[0]).toEqual({
      fn: "slat_row",
      frame: [1, 0.45, 0.1, 0, 0.275, -0.45],
      args: ["3"],
    });
    expect(statements[1].args).toEqual(['"thin"']);
    expect(statements[2].fn).toBe("make_part");
  });

  it("rejects malformed statements", () => {
    expect(() => parseProgram("slat_row(1, 2);")).toThrow(/unrecognized/);
    expect(() => parseProgram("slat_row(frame(1, 2), 3);")).toThrow(/frame/);
  });

  it("round-trips through printProgram", () => {
    expect(printProgram(parseProgram(PROGRAM))).toBe(PROGRAM);
  });
});

describe("withArgument", () => {
  it("replaces a single argument and keeps the rest byte-identical", () => {
    const edited = withArgument(PROGRAM, 0, 0, "5");
    expect(edited).toContain("slat_row(frame(1, 0.45, 0.1, 0, 0.275, -0.45), 5);");
    expect(edited.split("\n")[1]).toBe(PROGRAM.split("\n")[1]);
  });

  it("replaces enum arguments", () => {
    const edited = withArgument(PROGRAM, 1, 0, '"thick"');
    expect(edited).toContain('side_panels(frame(1, 0.25, 1, 0, -0.375, 0), "thick");');
  });

  it("rejects out-of-range statement and argument indices", () => {
    expect(() => withArgument(PROGRAM, 9, 0, "1")).toThrow(/no statement/);
    expect(() => withArgument(PROGRAM, 0, 1, "1")).toThrow(/no argument/);
  });
});
