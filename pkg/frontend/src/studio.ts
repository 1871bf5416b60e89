/**
 * View-model for the studio. Owns the one invariant the UI relies on: the
 * displayed layout always equals the /execute response for the displayed
 * program text. Accept/reject is the only path by which an LLM edit changes
 * the program.
 */

import { ApiError, Client } from "./api.js";
import type { Diagnostic, EditResponse, LibraryInfo, PartView } from "./api.js";
import { withArgument } from "./program.js";

export interface StudioSnapshot {
  programText: string;
  parts: PartView[];
  flags: string[];
  diagnostic: Diagnostic | null;
  rejectedText: string | null;
  pendingEdit: EditResponse | null;
}

export class Studio {
  library: LibraryInfo | null = null;
  programText = "";
  parts: PartView[] = [];
  flags: string[] = [];
  diagnostic: Diagnostic | null = null;
  /** program text that failed to execute (kept for inline annotation) */
  rejectedText: string | null = null;
  pendingEdit: EditResponse | null = null;
  /** program text before the last accepted edit, for deform previews */
  previousText: string | null = null;

  constructor(private readonly client: Client) {}

  async load(): Promise<LibraryInfo> {
    this.library = await this.client.getLibrary();
    return this.library;
  }

  /**
   * Execute new program text. On success the text and layout update
   * together; on a service diagnostic the previous program and layout are
   * kept and the failure is surfaced inline.
   */
  async setProgram(text: string): Promise<boolean> {
    try {
      const result = await this.client.execute(text);
      this.programText = result.canonical;
      this.parts = result.parts;
      this.flags = result.flags;
      this.diagnostic = null;
      this.rejectedText = null;
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.diagnostic = err.diagnostic;
        this.rejectedText = text;
        return false;
      }
      throw err;
    }
  }

  /** Edit one parameter of one statement and re-execute. */
  setParameter(statementIndex: number, argIndex: number, value: string): Promise<boolean> {
    return this.setProgram(withArgument(this.programText, statementIndex, argIndex, value));
  }

  async requestEdit(request: string): Promise<EditResponse> {
    this.pendingEdit = await this.client.edit(this.programText, request);
    return this.pendingEdit;
  }

  async acceptEdit(): Promise<boolean> {
    if (this.pendingEdit === null) {
      throw new Error("no pending edit");
    }
    const before = this.programText;
    const ok = await this.setProgram(this.pendingEdit.program);
    if (ok) {
      this.previousText = before;
    }
    this.pendingEdit = null;
    return ok;
  }

  rejectEdit(): void {
    this.pendingEdit = null;
  }

  /** Deform a mesh from the pre-edit layout to the current one. */
  deformPreview(mesh: string): Promise<{ mesh: string; vertices: number }> {
    if (this.previousText === null) {
      return Promise.reject(new Error("no accepted edit to deform against"));
    }
    return this.client.deform(mesh, this.previousText, this.programText);
  }

  snapshot(): StudioSnapshot {
    return {
      programText: this.programText,
      parts: this.parts,
      flags: this.flags,
      diagnostic: this.diagnostic,
      rejectedText: this.rejectedText,
      pendingEdit: this.pendingEdit,
    };
  }
}
