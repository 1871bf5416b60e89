import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import type { LibraryInfo, PartView } from "../src/api.js";
import { annotateSource } from "../src/diagnostics.js";
import { buildPanel, literalFor } from "../src/panel.js";
import { layoutBoxes } from "../src/scene.js";
import { Studio } from "../src/studio.js";

const LIBRARY: LibraryInfo = {
  source: "fn slat_row(cf: Frame, n_slats: int) -> PartList { … }",
  functions: [
    {
      name: "slat_row",
      frame_param: "cf",
      params: [{ name: "n_slats", type: "int" }],
      doc: {
        description: "a row of slats",
        parts: "the slats",
        valid_options: [2, 3, 4],
        parameters: { n_slats: "how many slats to emit" },
      },
      has_body: true,
    },
    {
      name: "side_panels",
      frame_param: "cf",
      params: [{ name: "style", type: "enum", options: ["thick", "thin"] }],
      doc: { description: "panels", parts: "two panels", valid_options: [2], parameters: {} },
      has_body: true,
    },
  ],
  samplers: ["sample_shape_v1"],
};

function slats(n: number): PartView[] {
  return Array.from({ length: n }, (_, i) => ({
    label: "slat",
    dims: [0.2, 0.45, 0.1] as [number, number, number],
    center: [i * 0.3, 0.275, -0.45] as [number, number, number],
    statement_index: 0,
    fn_name: "slat_row",
  }));
}

/** Service stub: executes slat_row(..., n) as n parts, rejects "bad". */
function fakeService() {
  const log: string[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = new URL(url).pathname;
    log.push(path);
    let status = 200;
    let body: unknown;
    if (path === "/library") {
      body = LIBRARY;
    } else if (path === "/execute") {
      const program = (JSON.parse(String(init?.body)) as { program: string }).program;
      if (program.includes("bad")) {
        status = 400;
        body = { error: { code: "SyntaxError", message: "expected ';'", line: 1, column: 4 } };
      } else {
        const n = Number(/,\s*(\d+)\s*\)\s*;/.exec(program)?.[1] ?? "0");
        body = { parts: slats(n), flags: [], canonical: program };
      }
    } else if (path === "/edit") {
      body = {
        program: "slat_row(frame(1, 0.45, 0.1, 0, 0.275, -0.45), 4);\n",
        diff: ["-… 3);", "+… 4);"],
      };
    } else {
      status = 404;
      body = { error: { code: "NotFound", message: path } };
    }
    return { ok: status < 300, status, json: async () => body } as Response;
  };
  return { fetchFn, log };
}

const PROGRAM = "slat_row(frame(1, 0.45, 0.1, 0, 0.275, -0.45), 3);\n";

describe("Studio", () => {
  it("loads the library and renders the executed part count with colors", async () => {
    const { fetchFn } = fakeService();
    const studio = new Studio(new Client("http://svc", fetchFn));
    const library = await studio.load();
    expect(library.functions.map((f) => f.name)).toContain("slat_row");

    await studio.setProgram(PROGRAM);
    expect(studio.parts).toHaveLength(3);
    const boxes = layoutBoxes(studio.parts);
    expect(boxes).toHaveLength(3);
    expect(new Set(boxes.map((b) => b.color)).size).toBe(1);
    expect(boxes[0].fnName).toBe("slat_row");
  });

  it("round-trips a parameter edit through /execute", async () => {
    const { fetchFn, log } = fakeService();
    const studio = new Studio(new Client("http://svc", fetchFn));
    await studio.load();
    await studio.setProgram(PROGRAM);

    const fields = buildPanel(LIBRARY, studio.programText);
    expect(fields).toHaveLength(1);
    expect(fields[0].value).toBe("3");
    expect(fields[0].help).toBe("how many slats to emit");

    const ok = await studio.setParameter(
      fields[0].statementIndex,
      fields[0].argIndex,
      literalFor(fields[0].param, "5"),
    );
    expect(ok).toBe(true);
    expect(studio.programText).toContain(", 5);");
    expect(studio.parts).toHaveLength(5);
    expect(log.filter((p) => p === "/execute")).toHaveLength(2);
  });

  it("keeps the previous program and layout on a 400 and surfaces it inline", async () => {
    const { fetchFn } = fakeService();
    const studio = new Studio(new Client("http://svc", fetchFn));
    await studio.load();
    await studio.setProgram(PROGRAM);

    const ok = await studio.setProgram("bad(frame(1, 1, 1, 0, 0, 0), 1);\n");
    expect(ok).toBe(false);
    expect(studio.programText).toBe(PROGRAM); // unchanged
    expect(studio.parts).toHaveLength(3); // unchanged
    expect(studio.diagnostic?.code).toBe("SyntaxError");

    const annotated = annotateSource(studio.rejectedText!, studio.diagnostic!);
    const lines = annotated.split("\n");
    expect(lines[1]).toBe("   ^"); // caret under column 4
    expect(lines[2]).toContain("SyntaxError: expected ';'");
  });

  it("only changes the program via accept; reject leaves it untouched", async () => {
    const { fetchFn } = fakeService();
    const studio = new Studio(new Client("http://svc", fetchFn));
    await studio.load();
    await studio.setProgram(PROGRAM);

    const edit = await studio.requestEdit("one more slat");
    expect(edit.diff.length).toBeGreaterThan(0);
    expect(studio.programText).toBe(PROGRAM); // pending, not applied

    studio.rejectEdit();
    expect(studio.pendingEdit).toBeNull();
    expect(studio.programText).toBe(PROGRAM);

    await studio.requestEdit("one more slat");
    await studio.acceptEdit();
    expect(studio.programText).toContain(", 4);");
    expect(studio.parts).toHaveLength(4);
    expect(studio.previousText).toBe(PROGRAM);
  });

  it("builds enum literals with quotes", () => {
    expect(literalFor({ name: "style", type: "enum", options: ["thick", "thin"] }, "thin")).toBe(
      '"thin"',
    );
    expect(literalFor({ name: "n", type: "int" }, "4")).toBe("4");
  });
});
