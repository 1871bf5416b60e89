/** Parameter panel model: editable fields derived from signatures + program. */

import type { LibraryInfo, ParamInfo } from "./api.js";
import { parseProgram } from "./program.js";

export interface ParamField {
  statementIndex: number;
  argIndex: number;
  fn: string;
  param: ParamInfo;
  /** doc text for the parameter, when the library provides one */
  help: string;
  /** current literal text in the program ("3", "0.25", "\"thin\"", "true") */
  value: string;
}

export function buildPanel(library: LibraryInfo, programText: string): ParamField[] {
  const byName = new Map(library.functions.map((f) => [f.name, f]));
  const fields: ParamField[] = [];
  parseProgram(programText).forEach((stmt, statementIndex) => {
    const fn = byName.get(stmt.fn);
    if (fn === undefined) {
      return; // make_part and unknown calls expose no editable parameters
    }
    fn.params.forEach((param, argIndex) => {
      fields.push({
        statementIndex,
        argIndex,
        fn: stmt.fn,
        param,
        help: fn.doc.parameters[param.name] ?? "",
        value: stmt.args[argIndex] ?? "",
      });
    });
  });
  return fields;
}

/** Literal program text for a field's new value, quoting enum choices. */
export function literalFor(param: ParamInfo, raw: string): string {
  if (param.type === "enum") {
    const unquoted = raw.replace(/^"|"$/g, "");
    return `"${unquoted}"`;
  }
  if (param.type === "bool") {
    return raw === "true" ? "true" : "false";
  }
  return raw;
}
