import { describe, expect, it } from "vitest";

import type {
  ActionPayload,
  ConfirmResponse,
  InputResponse,
  LogRow,
} from "../src/api.js";
import { GatewayError } from "../src/api.js";
import {
  ChatController,
  CommandsController,
  TeachController,
  describePayload,
  describeTrace,
} from "../src/controller.js";

function codePayload(code: string): ActionPayload {
  return { type: "code", code, raw: code, extraction_notes: [] };
}

function pendingResponse(code: string, actionId = "a1"): InputResponse {
  return {
    action_id: actionId,
    session: "s",
    interaction_id: 1,
    command_class: "Op",
    status: "pending",
    payload: codePayload(code),
    error: null,
  };
}

/** Fake of the command-tab API surface with recorded calls. */
function fakeCommandsApi(overrides: Partial<Record<string, unknown>> = {}) {
  const calls: Array<{ method: string; args: unknown[] }> = [];
  const api = {
    submitInput: async (text: string, session: string): Promise<InputResponse> => {
      calls.push({ method: "submitInput", args: [text, session] });
      return (overrides.input as InputResponse) ?? pendingResponse("sam.measure(5)");
    },
    confirm: async (actionId: string, edited?: string): Promise<ConfirmResponse> => {
      calls.push({ method: "confirm", args: [actionId, edited] });
      return (
        (overrides.confirm as ConfirmResponse) ?? {
          action_id: actionId,
          status: "executed",
          trace: [
            { kind: "Measure", t_start: 0, t_end: 10, args: { exposure_s: 10, saved: true } },
          ],
          final_time: 10,
        }
      );
    },
    reject: async (actionId: string): Promise<ConfirmResponse> => {
      calls.push({ method: "reject", args: [actionId] });
      return { action_id: actionId, status: "rejected" };
    },
    pending: async () => (overrides.pending as never) ?? null,
    log: async (): Promise<LogRow[]> => [],
  };
  return { api, calls };
}

describe("CommandsController", () => {
  it("stages generated code and records both sides of the exchange", async () => {
    const { api } = fakeCommandsApi();
    const controller = new CommandsController(api, "s");
    await controller.submit("Measure sample for 5 seconds.");
    expect(controller.staged).toMatchObject({
      actionId: "a1",
      code: "sam.measure(5)",
      originalCode: "sam.measure(5)",
    });
    expect(controller.messages).toEqual([
      { role: "user", text: "Measure sample for 5 seconds.", kind: "text" },
      { role: "assistant", text: "sam.measure(5)", kind: "code" },
    ]);
  });

  it("confirms unedited code without sending an edit", async () => {
    const { api, calls } = fakeCommandsApi();
    const controller = new CommandsController(api, "s");
    await controller.submit("Measure sample for 5 seconds.");
    const result = await controller.confirm();
    expect(result.status).toBe("executed");
    expect(calls.find((c) => c.method === "confirm")?.args).toEqual(["a1", undefined]);
    expect(controller.staged).toBeNull();
    const trace = controller.messages.at(-1);
    expect(trace?.kind).toBe("trace");
    expect(trace?.text).toContain("Measure(exposure_s=10, saved=true)");
    expect(trace?.text).toContain("final simulated time: 10.0s");
  });

  it("sends the edited code and logs the edit", async () => {
    const { api, calls } = fakeCommandsApi();
    const controller = new CommandsController(api, "s");
    await controller.submit("Measure sample for 5 seconds.");
    controller.edit("sam.measure(10)");
    expect(controller.stagedIsEdited).toBe(true);
    await controller.confirm();
    expect(calls.find((c) => c.method === "confirm")?.args).toEqual([
      "a1",
      "sam.measure(10)",
    ]);
    expect(
      controller.messages.some(
        (m) => m.kind === "code" && m.role === "system" && m.text.includes("sam.measure(10)"),
      ),
    ).toBe(true);
  });

  it("editing back to the original counts as unedited", async () => {
    const { api, calls } = fakeCommandsApi();
    const controller = new CommandsController(api, "s");
    await controller.submit("Measure sample for 5 seconds.");
    controller.edit("sam.measure(10)");
    controller.edit("sam.measure(5)");
    expect(controller.stagedIsEdited).toBe(false);
    await controller.confirm();
    expect(calls.find((c) => c.method === "confirm")?.args).toEqual(["a1", undefined]);
  });

  it("reject clears the staged action and notes it in the log", async () => {
    const { api, calls } = fakeCommandsApi();
    const controller = new CommandsController(api, "s");
    await controller.submit("Measure sample for 5 seconds.");
    await controller.reject();
    expect(calls.at(-1)).toEqual({ method: "reject", args: ["a1"] });
    expect(controller.staged).toBeNull();
    expect(controller.messages.at(-1)?.text).toContain("rejected");
  });

  it("clarifications are shown but never staged", async () => {
    const { api } = fakeCommandsApi({
      input: {
        ...pendingResponse(""),
        command_class: "MISSED",
        payload: { type: "clarification", question: "Could you rephrase that?" },
      },
    });
    const controller = new CommandsController(api, "s");
    await controller.submit("do the thing");
    expect(controller.staged).toBeNull();
    expect(controller.messages.at(-1)).toMatchObject({
      role: "assistant",
      text: "Could you rephrase that?",
    });
  });

  it("surfaces gateway refusals in the message log and rethrows", async () => {
    const api = {
      ...fakeCommandsApi().api,
      submitInput: async () => {
        throw new GatewayError(409, "session already has a pending action");
      },
    };
    const controller = new CommandsController(api, "s");
    await expect(controller.submit("another")).rejects.toBeInstanceOf(GatewayError);
    expect(controller.messages.at(-1)).toMatchObject({
      role: "system",
      kind: "error",
      text: "gateway refused (409): session already has a pending action",
    });
  });

  it("resume re-adopts a pending action the gateway still holds", async () => {
    const { api } = fakeCommandsApi({
      pending: {
        action_id: "old",
        command_class: "Op",
        status: "pending",
        payload: codePayload("sam.align()"),
      },
    });
    const controller = new CommandsController(api, "s");
    const staged = await controller.resume();
    expect(staged).toMatchObject({ actionId: "old", code: "sam.align()" });
  });

  it("confirm and edit require a staged action", async () => {
    const controller = new CommandsController(fakeCommandsApi().api, "s");
    expect(() => controller.edit("x")).toThrow("nothing is staged");
    await expect(controller.confirm()).rejects.toThrow("nothing is staged");
  });
});

describe("payload and trace rendering", () => {
  it("describes every payload shape", () => {
    expect(describePayload(codePayload("wsam()"))).toBe("wsam()");
    expect(describePayload({ type: "protocol", protocol: "linecut_qz", arg: 0.1 })).toBe(
      "linecut_qz 0.1",
    );
    expect(describePayload({ type: "protocol", protocol: "circular_average", arg: null })).toBe(
      "circular_average",
    );
    expect(describePayload({ type: "clarification", question: "hm?" })).toBe("hm?");
    expect(describePayload({ type: "text", value: "noted" })).toBe("noted");
  });

  it("renders one line per event plus the final time", () => {
    const text = describeTrace(
      [
        { kind: "Move", t_start: 0, t_end: 0, args: { axis: "th", target: 0.5 } },
        { kind: "Measure", t_start: 0, t_end: 5, args: { exposure_s: 5 } },
      ],
      5,
    );
    expect(text.split("\n")).toEqual([
      "t=0.0s Move(axis=th, target=0.5)",
      "t=0.0s Measure(exposure_s=5)",
      "final simulated time: 5.0s",
    ]);
  });
});

describe("TeachController", () => {
  function fakeTeachApi() {
    const committed: unknown[] = [];
    const api = {
      previewFunction: async (description: string) => ({
        id: "wbs",
        input: description,
        output: "wbs()",
        class: "Op",
        unchecked: true,
      }),
      commitFunction: async (entry: unknown) => {
        committed.push(entry);
        return { committed: true as const, id: "wbs", version: 2 };
      },
    };
    return { api, committed };
  }

  it("previews, applies operator edits, and commits once", async () => {
    const { api, committed } = fakeTeachApi();
    const controller = new TeachController(api);
    await controller.refine("where is the beamstop");
    expect(controller.preview?.output).toBe("wbs()");
    const version = await controller.commit({ input: "check where the beamstop is" });
    expect(version).toBe(2);
    expect(committed).toEqual([
      {
        id: "wbs",
        input: "check where the beamstop is",
        output: "wbs()",
        class: "Op",
        unchecked: true,
      },
    ]);
    expect(controller.preview).toBeNull();
  });

  it("commit without a preview fails", async () => {
    const controller = new TeachController(fakeTeachApi().api);
    await expect(controller.commit()).rejects.toThrow("nothing previewed");
  });
});

describe("ChatController", () => {
  it("keeps a transcript with routes and citations", async () => {
    const controller = new ChatController({
      chat: async (query: string) => ({
        route: "scientific_thorough",
        answer: `about: ${query}`,
        chunks: [{ doc_id: "detectors.txt", index: 0, score: 1.25 }],
      }),
    });
    await controller.ask("what is the pixel size?");
    expect(controller.messages).toHaveLength(2);
    expect(controller.messages[1]).toMatchObject({
      role: "assistant",
      route: "scientific_thorough",
      text: "about: what is the pixel size?",
    });
    expect(controller.messages[1].chunks).toEqual([
      { doc_id: "detectors.txt", index: 0, score: 1.25 },
    ]);
  });

  it("records backend failures in the transcript", async () => {
    const controller = new ChatController({
      chat: async () => {
        throw new GatewayError(500, "router backend unavailable");
      },
    });
    await expect(controller.ask("hello")).rejects.toBeInstanceOf(GatewayError);
    expect(controller.messages.at(-1)?.kind).toBe("error");
  });
});
