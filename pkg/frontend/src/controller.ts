/** Tab logic for the operator console, kept free of DOM dependencies.
 *
 * Each tab owns a small state machine over the gateway client: the
 * commands tab stages one pending action at a time and records every
 * exchange in a message log; the teach tab previews a refined function
 * entry before committing it; the chat tab keeps a transcript with
 * source citations.
 */

import type {
  ActionPayload,
  ChatResult,
  ConfirmResponse,
  FunctionEntry,
  FunctionPreview,
  GatewayClient,
  InputResponse,
  LogRow,
  TraceEvent,
} from "./api.js";
import { GatewayError } from "./api.js";

export type Role = "user" | "assistant" | "system";

export interface Message {
  role: Role;
  text: string;
  kind: "text" | "code" | "trace" | "error";
}

export interface StagedAction {
  actionId: string;
  commandClass: string;
  originalCode: string;
  /** Current contents of the edit box; diverges from originalCode on edit. */
  code: string;
}

/** Subset of GatewayClient each controller needs; tests pass fakes. */
export type CommandsApi = Pick<
  GatewayClient,
  "submitInput" | "confirm" | "reject" | "pending" | "log"
>;
export type TeachApi = Pick<GatewayClient, "previewFunction" | "commitFunction">;
export type ChatApi = Pick<GatewayClient, "chat">;

export function describePayload(payload: ActionPayload): string {
  switch (payload.type) {
    case "code":
      return payload.code;
    case "protocol":
      return payload.arg == null ? payload.protocol : `${payload.protocol} ${payload.arg}`;
    case "clarification":
      return typeof payload.question === "string"
        ? payload.question
        : JSON.stringify(payload);
    case "text":
      return payload.value;
  }
}

export function describeTrace(trace: TraceEvent[], finalTime?: number): string {
  const lines = trace.map((event) => {
    const args = Object.entries(event.args)
      .map(([key, value]) => `${key}=${value}`)
      .join(", ");
    return `t=${event.t_start.toFixed(1)}s ${event.kind}(${args})`;
  });
  if (finalTime !== undefined) {
    lines.push(`final simulated time: ${finalTime.toFixed(1)}s`);
  }
  return lines.join("\n");
}

export class CommandsController {
  readonly messages: Message[] = [];
  staged: StagedAction | null = null;

  constructor(
    private readonly client: CommandsApi,
    readonly session: string = "default",
  ) {}

  /** Re-adopt an action the gateway still holds, e.g. after a reload. */
  async resume(): Promise<StagedAction | null> {
    const pending = await this.client.pending(this.session);
    if (pending !== null) {
      this.stage(pending.action_id, pending.command_class, pending.payload);
    }
    return this.staged;
  }

  async submit(text: string): Promise<InputResponse> {
    this.push("user", text, "text");
    let response: InputResponse;
    try {
      response = await this.client.submitInput(text, this.session);
    } catch (error) {
      this.pushError(error);
      throw error;
    }
    if (response.status === "pending") {
      this.stage(response.action_id, response.command_class, response.payload);
    } else if (response.status === "executed") {
      this.push("assistant", describePayload(response.payload), "text");
    } else if (response.error) {
      this.push("system", response.error, "error");
    } else {
      this.push("assistant", describePayload(response.payload), "text");
    }
    return response;
  }

  /** Record the operator's edit of the staged code without sending it. */
  edit(code: string): void {
    if (this.staged === null) {
      throw new Error("nothing is staged");
    }
    this.staged.code = code;
  }

  get stagedIsEdited(): boolean {
    return this.staged !== null && this.staged.code !== this.staged.originalCode;
  }

  async confirm(): Promise<ConfirmResponse> {
    const staged = this.requireStaged();
    const edited = this.stagedIsEdited ? staged.code : undefined;
    let result: ConfirmResponse;
    try {
      result = await this.client.confirm(staged.actionId, edited);
    } catch (error) {
      this.pushError(error);
      throw error;
    }
    this.staged = null;
    if (edited !== undefined) {
      this.push("system", `edited before execution:\n${edited}`, "code");
    }
    if (result.trace !== undefined) {
      this.push("assistant", describeTrace(result.trace, result.final_time), "trace");
    } else if (result.analysis !== undefined) {
      this.push("assistant", JSON.stringify(result.analysis, null, 2), "text");
    } else if (result.error) {
      this.push("system", result.error, "error");
    } else if (result.output) {
      this.push("assistant", result.output, "text");
    }
    return result;
  }

  async reject(): Promise<void> {
    const staged = this.requireStaged();
    await this.client.reject(staged.actionId);
    this.staged = null;
    this.push("system", "action rejected; nothing was executed", "text");
  }

  recentLog(): Promise<LogRow[]> {
    return this.client.log({ session: this.session });
  }

  private stage(actionId: string, commandClass: string, payload: ActionPayload): void {
    const text = describePayload(payload);
    if (payload.type === "clarification") {
      // nothing executable was produced; surface the question and stay idle
      this.push("assistant", text, "text");
      return;
    }
    this.staged = {
      actionId,
      commandClass,
      originalCode: text,
      code: text,
    };
    this.push("assistant", text, "code");
  }

  private requireStaged(): StagedAction {
    if (this.staged === null) {
      throw new Error("nothing is staged");
    }
    return this.staged;
  }

  private push(role: Role, text: string, kind: Message["kind"]): void {
    this.messages.push({ role, text, kind });
  }

  private pushError(error: unknown): void {
    const text =
      error instanceof GatewayError
        ? `gateway refused (${error.status}): ${error.message}`
        : String(error);
    this.push("system", text, "error");
  }
}

export class TeachController {
  preview: FunctionPreview | null = null;

  constructor(private readonly client: TeachApi) {}

  async refine(description: string): Promise<FunctionPreview> {
    this.preview = await this.client.previewFunction(description);
    return this.preview;
  }

  /** Commit the previewed entry, honoring any fields the operator edited. */
  async commit(edits: Partial<FunctionEntry> = {}): Promise<number> {
    if (this.preview === null) {
      throw new Error("nothing previewed");
    }
    const entry: FunctionEntry = {
      id: edits.id ?? this.preview.id,
      input: edits.input ?? this.preview.input,
      output: edits.output ?? this.preview.output,
      class: edits.class ?? this.preview.class,
      unchecked: edits.unchecked ?? this.preview.unchecked,
    };
    const result = await this.client.commitFunction(entry);
    this.preview = null;
    return result.version;
  }

  /** Commit a hand-written entry directly, skipping the refine step. */
  async commitDirect(entry: FunctionEntry): Promise<number> {
    const result = await this.client.commitFunction(entry);
    return result.version;
  }
}

export interface ChatMessage extends Message {
  route?: string;
  chunks?: ChatResult["chunks"];
}

export class ChatController {
  readonly messages: ChatMessage[] = [];

  constructor(
    private readonly client: ChatApi,
    readonly session: string = "default",
  ) {}

  async ask(query: string): Promise<ChatResult> {
    this.messages.push({ role: "user", text: query, kind: "text" });
    let result: ChatResult;
    try {
      result = await this.client.chat(query, this.session);
    } catch (error) {
      this.messages.push({ role: "system", text: String(error), kind: "error" });
      throw error;
    }
    this.messages.push({
      role: "assistant",
      text: result.answer,
      kind: "text",
      route: result.route,
      chunks: result.chunks,
    });
    return result;
  }
}
