/** Inline rendering of service diagnostics against the program text pane. */

import type { Diagnostic } from "./api.js";

export interface InlineDiagnostic {
  message: string; // "code: message" for display
  line: number | null; // 1-based line in the program text, when known
  column: number | null;
  /** caret marker line ("    ^") aligned under the offending column */
  caret: string | null;
}

export function toInline(diag: Diagnostic): InlineDiagnostic {
  const line = typeof diag.line === "number" ? diag.line : null;
  const column = typeof diag.column === "number" ? diag.column : null;
  return {
    message: `${diag.code}: ${diag.message}`,
    line,
    column,
    caret: column !== null ? " ".repeat(Math.max(0, column - 1)) + "^" : null,
  };
}

/**
 * Annotate program text with the diagnostic: inserts the caret line and the
 * message directly below the offending line, or appends the message when no
 * position is available.
 */
export function annotateSource(text: string, diag: Diagnostic): string {
  const inline = toInline(diag);
  const lines = text.replace(/\n$/, "").split("\n");
  if (inline.line === null || inline.line < 1 || inline.line > lines.length) {
    return [...lines, `! ${inline.message}`].join("\n");
  }
  const out: string[] = [];
  lines.forEach((lineText, i) => {
    out.push(lineText);
    if (i + 1 === inline.line) {
      if (inline.caret !== null) {
        out.push(inline.caret);
      }
      out.push(`! ${inline.message}`);
    }
  });
  return out.join("\n");
}
