/** Typed client for the shapescript HTTP service. */

export interface PartView {
  label: string;
  dims: [number, number, number];
  center: [number, number, number];
  statement_index: number;
  fn_name: string;
}

export interface ExecuteResponse {
  parts: PartView[];
  flags: string[];
  canonical: string;
}

export interface ParamInfo {
  name: string;
  type: "int" | "float" | "bool" | "enum";
  options?: string[];
}

export interface FunctionInfo {
  name: string;
  frame_param: string;
  params: ParamInfo[];
  doc: {
    description: string;
    parts: string;
    valid_options: number[];
    parameters: Record<string, string>;
  };
  has_body: boolean;
}

export interface LibraryInfo {
  source: string;
  functions: FunctionInfo[];
  samplers: string[];
}

export interface EditResponse {
  program: string;
  diff: string[];
}

export interface DeformResponse {
  mesh: string;
  vertices: number;
}

export interface Diagnostic {
  code: string;
  message: string;
  line?: number;
  column?: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly diagnostic: Diagnostic,
  ) {
    super(diagnostic.message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      const diag: Diagnostic = body?.error ?? {
        code: "HttpError",
        message: `request failed with status ${resp.status}`,
      };
      throw new ApiError(resp.status, diag);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getLibrary(): Promise<LibraryInfo> {
    return this.request<LibraryInfo>("/library");
  }

  execute(program: string): Promise<ExecuteResponse> {
    return this.post<ExecuteResponse>("/execute", { program });
  }

  edit(program: string, request: string): Promise<EditResponse> {
    return this.post<EditResponse>("/edit", { program, request });
  }

  deform(mesh: string, programA: string, programB: string): Promise<DeformResponse> {
    return this.post<DeformResponse>("/deform", {
      mesh,
      program_a: programA,
      program_b: programB,
    });
  }

  listShapes(): Promise<{ shapes: string[] }> {
    return this.request<{ shapes: string[] }>("/shapes");
  }

  listPrograms(): Promise<{ programs: Record<string, string> }> {
    return this.request<{ programs: Record<string, string> }>("/programs");
  }
}
