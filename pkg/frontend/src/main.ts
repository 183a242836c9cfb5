/** DOM shell: wires the three tab controllers to the page.
 *
 * The gateway base URL defaults to the page origin and can be overridden
 * with ?gateway=http://host:port for development against a separately
 * served backend.
 */

import { GatewayClient, GatewayError } from "./api.js";
import {
  ChatController,
  CommandsController,
  TeachController,
  type Message,
} from "./controller.js";
import { AudioRecorder } from "./audio.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("gateway") ?? window.location.origin;
const session = params.get("session") ?? "console";

const client = new GatewayClient(baseUrl);
const commands = new CommandsController(client, session);
const teach = new TeachController(client);
const chat = new ChatController(client, session);
const recorder = new AudioRecorder();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

// --- tab switching ------------------------------------------------------

for (const button of document.querySelectorAll<HTMLButtonElement>(".tab-button")) {
  button.addEventListener("click", () => {
    for (const other of document.querySelectorAll(".tab-button")) {
      other.classList.toggle("active", other === button);
    }
    for (const panel of document.querySelectorAll<HTMLElement>(".tab-panel")) {
      panel.hidden = panel.id !== `panel-${button.dataset.tab}`;
    }
  });
}

// --- commands tab -------------------------------------------------------

function renderMessages(container: HTMLElement, messages: readonly Message[]): void {
  container.replaceChildren(
    ...messages.map((message) => {
      const div = document.createElement("div");
      div.className = `msg msg-${message.role} msg-${message.kind}`;
      div.textContent = message.text;
      return div;
    }),
  );
  container.scrollTop = container.scrollHeight;
}

function renderPending(): void {
  const panel = el<HTMLElement>("pending-panel");
  const codeBox = el<HTMLTextAreaElement>("pending-code");
  if (commands.staged === null) {
    panel.hidden = true;
    codeBox.value = "";
  } else {
    panel.hidden = false;
    el<HTMLElement>("pending-class").textContent = commands.staged.commandClass;
    codeBox.value = commands.staged.code;
  }
}

function refreshCommands(): void {
  renderMessages(el("command-log"), commands.messages);
  renderPending();
  void refreshAuditLog();
}

async function refreshAuditLog(): Promise<void> {
  try {
    const rows = await commands.recentLog();
    const table = el<HTMLElement>("audit-rows");
    table.replaceChildren(
      ...rows.slice(-20).map((row) => {
        const tr = document.createElement("tr");
        for (const cell of [
          row.timestamp,
          row.input_text,
          row.classifier_label,
          row.cog_output,
          row.edited_output ?? "",
          row.confirmed === null ? "pending" : row.confirmed ? "confirmed" : "rejected",
        ]) {
          const td = document.createElement("td");
          td.textContent = cell;
          tr.appendChild(td);
        }
        return tr;
      }),
    );
  } catch {
    // audit table is best-effort; the message log already shows errors
  }
}

el<HTMLFormElement>("command-form").addEventListener("submit", async (event) => {
  event.preventDefault();
  const input = el<HTMLInputElement>("command-input");
  const text = input.value.trim();
  if (!text) {
    return;
  }
  input.value = "";
  try {
    await commands.submit(text);
  } catch {
    // recorded in the message log by the controller
  }
  refreshCommands();
});

el<HTMLTextAreaElement>("pending-code").addEventListener("input", (event) => {
  commands.edit((event.target as HTMLTextAreaElement).value);
});

el<HTMLButtonElement>("confirm-button").addEventListener("click", async () => {
  try {
    await commands.confirm();
  } catch {
    // recorded in the message log by the controller
  }
  refreshCommands();
});

el<HTMLButtonElement>("reject-button").addEventListener("click", async () => {
  await commands.reject();
  refreshCommands();
});

el<HTMLButtonElement>("record-button").addEventListener("click", async () => {
  const button = el<HTMLButtonElement>("record-button");
  if (!recorder.recording) {
    await recorder.start();
    button.textContent = "stop";
    return;
  }
  button.textContent = "record";
  const audio = await recorder.stop();
  try {
    await client.submitAudio(audio, session);
  } catch (error) {
    const text =
      error instanceof GatewayError && error.status === 501
        ? "voice input needs a transcription endpoint on the gateway"
        : String(error);
    commands.messages.push({ role: "system", text, kind: "error" });
  }
  refreshCommands();
});

// --- teach tab ----------------------------------------------------------

function renderPreview(): void {
  const panel = el<HTMLElement>("preview-panel");
  if (teach.preview === null) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  el<HTMLInputElement>("preview-id").value = teach.preview.id;
  el<HTMLInputElement>("preview-input").value = teach.preview.input;
  el<HTMLInputElement>("preview-output").value = teach.preview.output;
  el<HTMLElement>("preview-class").textContent = teach.preview.class;
}

el<HTMLFormElement>("teach-form").addEventListener("submit", async (event) => {
  event.preventDefault();
  const description = el<HTMLTextAreaElement>("teach-description").value.trim();
  if (!description) {
    return;
  }
  try {
    await teach.refine(description);
    el<HTMLElement>("teach-status").textContent = "review the draft, then commit";
  } catch (error) {
    el<HTMLElement>("teach-status").textContent = String(error);
  }
  renderPreview();
});

el<HTMLButtonElement>("commit-button").addEventListener("click", async () => {
  try {
    const version = await teach.commit({
      id: el<HTMLInputElement>("preview-id").value,
      input: el<HTMLInputElement>("preview-input").value,
      output: el<HTMLInputElement>("preview-output").value,
    });
    el<HTMLElement>("teach-status").textContent = `committed; registry version ${version}`;
  } catch (error) {
    el<HTMLElement>("teach-status").textContent = String(error);
  }
  renderPreview();
});

// --- chat tab -----------------------------------------------------------

el<HTMLFormElement>("chat-form").addEventListener("submit", async (event) => {
  event.preventDefault();
  const input = el<HTMLInputElement>("chat-input");
  const query = input.value.trim();
  if (!query) {
    return;
  }
  input.value = "";
  try {
    await chat.ask(query);
  } catch {
    // recorded in the transcript by the controller
  }
  const container = el<HTMLElement>("chat-log");
  container.replaceChildren(
    ...chat.messages.map((message) => {
      const div = document.createElement("div");
      div.className = `msg msg-${message.role} msg-${message.kind}`;
      div.textContent = message.text;
      if (message.chunks && message.chunks.length > 0) {
        const cite = document.createElement("div");
        cite.className = "citations";
        cite.textContent =
          "sources: " +
          message.chunks.map((chunk) => `${chunk.doc_id}#${chunk.index}`).join(", ");
        div.appendChild(cite);
      }
      return div;
    }),
  );
  container.scrollTop = container.scrollHeight;
});

// --- startup ------------------------------------------------------------

void (async () => {
  const dot = el<HTMLElement>("status-dot");
  dot.classList.toggle("connected", await client.health());
  await commands.resume(); // re-adopt a pending action left from a reload
  refreshCommands();
})();
