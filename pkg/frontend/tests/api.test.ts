import { describe, expect, it } from "vitest";

import { GatewayClient, GatewayError } from "../src/api.js";

interface Recorded {
  url: string;
  method?: string;
  body?: unknown;
}

function stubFetch(responses: Array<{ status?: number; body: unknown }>) {
  const calls: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method,
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    const next = responses.shift();
    if (!next) {
      throw new Error("no stubbed response left");
    }
    return new Response(JSON.stringify(next.body), {
      status: next.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetchFn, calls };
}

describe("GatewayClient", () => {
  it("posts text input with the session and parses the response", async () => {
    const { fetchFn, calls } = stubFetch([
      {
        body: {
          action_id: "a1",
          session: "s",
          interaction_id: 1,
          command_class: "Op",
          status: "pending",
          payload: { type: "code", code: "sam.measure(5)", raw: "sam.measure(5)", extraction_notes: [] },
          error: null,
        },
      },
    ]);
    const client = new GatewayClient("http://gw:8000/", fetchFn);
    const response = await client.submitInput("Measure sample for 5 seconds.", "s");
    expect(calls[0]).toEqual({
      url: "http://gw:8000/input",
      method: "POST",
      body: { text: "Measure sample for 5 seconds.", session: "s" },
    });
    expect(response.status).toBe("pending");
    expect(response.payload).toMatchObject({ type: "code", code: "sam.measure(5)" });
  });

  it("sends edited code on confirm and reject=true on reject", async () => {
    const { fetchFn, calls } = stubFetch([
      { body: { action_id: "a1", status: "executed" } },
      { body: { action_id: "a2", status: "rejected" } },
    ]);
    const client = new GatewayClient("http://gw", fetchFn);
    await client.confirm("a1", "sam.measure(10)");
    await client.reject("a2");
    expect(calls[0].body).toEqual({
      action_id: "a1",
      edited_code: "sam.measure(10)",
      reject: false,
    });
    expect(calls[1].body).toEqual({ action_id: "a2", edited_code: null, reject: true });
  });

  it("maps error statuses to GatewayError with the server detail", async () => {
    const { fetchFn } = stubFetch([
      { status: 409, body: { detail: "session already has a pending action" } },
    ]);
    const client = new GatewayClient("http://gw", fetchFn);
    const error = await client.submitInput("x").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(GatewayError);
    expect((error as GatewayError).status).toBe(409);
    expect((error as GatewayError).message).toBe("session already has a pending action");
  });

  it("builds log queries from the provided filters only", async () => {
    const { fetchFn, calls } = stubFetch([{ body: { rows: [] } }, { body: { rows: [] } }]);
    const client = new GatewayClient("http://gw", fetchFn);
    await client.log({ session: "s", confirmed: true });
    await client.log();
    expect(calls[0].url).toBe("http://gw/log?session=s&confirmed=true");
    expect(calls[1].url).toBe("http://gw/log");
  });

  it("unwraps the pending envelope", async () => {
    const { fetchFn, calls } = stubFetch([
      { body: { pending: null } },
      {
        body: {
          pending: {
            action_id: "a9",
            command_class: "Op",
            status: "pending",
            payload: { type: "code", code: "wsam()", raw: "wsam()", extraction_notes: [] },
          },
        },
      },
    ]);
    const client = new GatewayClient("http://gw", fetchFn);
    expect(await client.pending("empty session")).toBeNull();
    const pending = await client.pending();
    expect(calls[0].url).toBe("http://gw/pending?session=empty%20session");
    expect(pending?.action_id).toBe("a9");
  });

  it("health returns false on transport failure instead of throwing", async () => {
    const client = new GatewayClient("http://gw", async () => {
      throw new TypeError("fetch failed");
    });
    expect(await client.health()).toBe(false);
  });

  it("commits function entries and unwraps previews", async () => {
    const { fetchFn, calls } = stubFetch([
      {
        body: {
          committed: false,
          preview: { id: "wbs", input: "where is the beamstop", output: "wbs()", class: "Op", unchecked: true },
        },
      },
      { body: { committed: true, id: "wbs", version: 3 } },
    ]);
    const client = new GatewayClient("http://gw", fetchFn);
    const preview = await client.previewFunction("report the beamstop position");
    expect(preview.output).toBe("wbs()");
    const commit = await client.commitFunction({ id: "wbs", input: "where is the beamstop", output: "wbs()" });
    expect(commit.version).toBe(3);
    expect(calls[1].body).toEqual({
      entry: { id: "wbs", input: "where is the beamstop", output: "wbs()" },
    });
  });
});
