/**
 * Client-side model of a shape program: one library call or make_part per
 * statement. Only canonical program text (as returned in `canonical` by
 * /execute) is parsed; all geometry semantics stay server-side.
 */

export interface Statement {
  fn: string;
  frame: number[]; // w, h, d, x, y, z
  args: string[]; // literal text per non-frame argument
}

const STMT_RE =
  /^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*frame\s*\(([^)]*)\)\s*(?:,([^;]*))?\)\s*;\s*$/;

export function parseProgram(text: string): Statement[] {
  const statements: Statement[] = [];
  for (const line of text.split("\n")) {
    if (line.trim() === "") {
      continue;
    }
    const m = STMT_RE.exec(line);
    if (!m) {
      throw new Error(`unrecognized statement: ${line.trim()}`);
    }
    const frame = m[2].split(",").map((s) => Number(s.trim()));
    if (frame.length !== 6 || frame.some((v) => Number.isNaN(v))) {
      throw new Error(`malformed frame in: ${line.trim()}`);
    }
    const args =
      m[3] === undefined
        ? []
        : m[3]
            .split(",")
            .map((s) => s.trim())
            .filter((s) => s !== "");
    statements.push({ fn: m[1], frame, args });
  }
  return statements;
}

export function printProgram(statements: Statement[]): string {
  return statements
    .map((s) => {
      const frame = `frame(${s.frame.map(formatNumber).join(", ")})`;
      const rest = s.args.length > 0 ? `, ${s.args.join(", ")}` : "";
      return `${s.fn}(${frame}${rest});`;
    })
    .join("\n")
    .concat("\n");
}

function formatNumber(v: number): string {
  // mirror the service's 6-significant-digit float form
  const text = Number(v.toPrecision(6)).toString();
  return text === "-0" ? "0" : text;
}

/**
 * Replace one non-frame argument of one statement, returning new program
 * text. Values for enum parameters must already be quoted.
 */
export function withArgument(
  text: string,
  statementIndex: number,
  argIndex: number,
  value: string,
): string {
  const statements = parseProgram(text);
  const stmt = statements[statementIndex];
  if (stmt === undefined) {
    throw new Error(`no statement at index ${statementIndex}`);
  }
  if (argIndex < 0 || argIndex >= stmt.args.length) {
    throw new Error(`statement ${statementIndex} has no argument ${argIndex}`);
  }
  stmt.args = stmt.args.slice();
  stmt.args[argIndex] = value;
  return printProgram(statements);
}
