/** Typed client for the gateway REST API.
 *
 * Every console feature goes through this module; nothing else in the
 * frontend talks to the network, so the whole UI can be exercised against
 * a fake client in tests.
 */

export interface CodePayload {
  type: "code";
  code: string;
  raw: string;
  extraction_notes: string[];
}

export interface ProtocolPayload {
  type: "protocol";
  protocol: string;
  arg: number | null;
}

export interface ClarificationPayload {
  type: "clarification";
  question?: string;
  [key: string]: unknown;
}

export interface TextPayload {
  type: "text";
  value: string;
}

export type ActionPayload =
  | CodePayload
  | ProtocolPayload
  | ClarificationPayload
  | TextPayload;

export interface InputResponse {
  action_id: string;
  session: string;
  interaction_id: number;
  command_class: string;
  status: string;
  payload: ActionPayload;
  error: string | null;
}

export interface TraceEvent {
  kind: string;
  t_start: number;
  t_end: number;
  args: Record<string, unknown>;
}

export interface ConfirmResponse {
  action_id: string;
  status: string;
  output?: string | null;
  error?: string | null;
  trace?: TraceEvent[];
  final_time?: number;
  analysis?: Record<string, unknown>;
}

export interface PendingAction {
  action_id: string;
  command_class: string;
  status: string;
  payload: ActionPayload;
}

export interface LogRow {
  interaction_id: number;
  session: string;
  timestamp: string;
  input_text: string;
  input_mode: string;
  classifier_label: string;
  cog_invoked: string | null;
  cog_output: string;
  confirmed: boolean | null;
  edited_output: string | null;
  executed_ok: boolean | null;
}

export interface ChatChunk {
  doc_id: string;
  index: number;
  score: number;
}

export interface ChatResult {
  route: string;
  answer: string;
  chunks: ChatChunk[];
}

export interface FunctionPreview {
  id: string;
  input: string;
  output: string;
  class: string;
  unchecked: boolean;
}

export interface FunctionEntry {
  id: string;
  input: string;
  output: string;
  class?: string;
  unchecked?: boolean;
}

export class GatewayError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "GatewayError";
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async health(): Promise<boolean> {
    try {
      const body = await this.request<{ status: string }>("GET", "/healthz");
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  submitInput(text: string, session = "default"): Promise<InputResponse> {
    return this.request("POST", "/input", { text, session });
  }

  submitAudio(audioBase64: string, session = "default"): Promise<InputResponse> {
    return this.request("POST", "/input", { audio: audioBase64, session });
  }

  async pending(session = "default"): Promise<PendingAction | null> {
    const body = await this.request<{ pending: PendingAction | null }>(
      "GET",
      `/pending?session=${encodeURIComponent(session)}`,
    );
    return body.pending;
  }

  confirm(actionId: string, editedCode?: string): Promise<ConfirmResponse> {
    return this.request("POST", "/confirm", {
      action_id: actionId,
      edited_code: editedCode ?? null,
      reject: false,
    });
  }

  reject(actionId: string): Promise<ConfirmResponse> {
    return this.request("POST", "/confirm", {
      action_id: actionId,
      edited_code: null,
      reject: true,
    });
  }

  async previewFunction(description: string): Promise<FunctionPreview> {
    const body = await this.request<{ committed: false; preview: FunctionPreview }>(
      "POST",
      "/functions",
      { description },
    );
    return body.preview;
  }

  commitFunction(entry: FunctionEntry): Promise<{ committed: true; id: string; version: number }> {
    return this.request("POST", "/functions", { entry });
  }

  chat(query: string, session = "default"): Promise<ChatResult> {
    return this.request("POST", "/chat", { query, session });
  }

  async log(params: { session?: string; cog?: string; confirmed?: boolean } = {}): Promise<LogRow[]> {
    const search = new URLSearchParams();
    if (params.session !== undefined) search.set("session", params.session);
    if (params.cog !== undefined) search.set("cog", params.cog);
    if (params.confirmed !== undefined) search.set("confirmed", String(params.confirmed));
    const query = search.toString();
    const body = await this.request<{ rows: LogRow[] }>(
      "GET",
      query ? `/log?${query}` : "/log",
    );
    return body.rows;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new GatewayError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
    return JSON.stringify(body);
  } catch {
    return `HTTP ${response.status}`;
  }
}
