"""REST gateway wiring the cogs, simulator, analysis engine, and chat router."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .. import chatbot
from ..backends import BackendSpec, echo_backend, load_backend_config
from ..cogs import (
    CodeCandidate,
    CogContext,
    PendingAction,
    ProtocolCommand,
    confirm_action,
    refine,
    reject_action,
    run_workflow1,
)
from ..errors import BadConfig, NlbeamError
from ..registry import (
    FunctionEntry,
    PromptStyle,
    append_function,
    load_registry,
    save_registry,
)
from .store import LogRow, LogStore
from .transport import InProcessChannel

_COG_NAMES = {
    "Op": "Operator",
    "Ana": "Analyst",
    "Notebook": "Notebook",
    "gpcam": "ToolLaunch",
    "xicam": "ToolLaunch",
    "MISSED": None,
}


@dataclass
class GatewayConfig:
    registry_path: str
    db_path: str = ":memory:"
    backends: dict = field(default_factory=dict)  # cog name -> BackendSpec
    notebook_dir: str = "."
    corpus_dir: Optional[str] = None
    transcription_endpoint: Optional[str] = None
    instrument: str = "default"
    style: PromptStyle = PromptStyle.ONE_WORD
    tool_commands: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "GatewayConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if "registry_path" not in data:
            raise BadConfig("config needs registry_path")
        backends = {}
        if "backend_config" in data:
            backends = load_backend_config(data["backend_config"])
        return cls(
            registry_path=data["registry_path"],
            db_path=data.get("db_path", ":memory:"),
            backends=backends,
            notebook_dir=data.get("notebook_dir", "."),
            corpus_dir=data.get("corpus_dir"),
            transcription_endpoint=data.get("transcription_endpoint"),
            instrument=data.get("instrument", "default"),
            style=PromptStyle[data.get("style", "ONE_WORD")],
            tool_commands=data.get("tool_commands", {}),
        )


class Gateway:
    """Session manager plus cog dispatch; one instance per service process."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        self.registry = load_registry(config.registry_path)
        self.store = LogStore(config.db_path)
        self.channel = InProcessChannel()
        self.contexts: dict[str, CogContext] = {}
        self.interaction_for_action: dict[str, int] = {}
        self.corpus_index = None
        if config.corpus_dir:
            self.corpus_index = chatbot.CorpusIndex.build(config.corpus_dir)
        self._restore_unfinished()

    # --- internals -----------------------------------------------------

    def _backend(self, cog: str) -> BackendSpec:
        return self.config.backends.get(cog, echo_backend())

    def context(self, session_id: str) -> CogContext:
        if session_id not in self.contexts:
            self.store.ensure_session(session_id, self.config.instrument)
            self.contexts[session_id] = CogContext(
                registry=self.registry,
                backends={
                    cog: self._backend(cog)
                    for cog in ("classifier", "operator", "analyst", "refiner", "chat")
                },
                session_id=session_id,
                style=self.config.style,
                notebook_path=os.path.join(
                    self.config.notebook_dir, f"notebook-{session_id}.csv"
                ),
                tool_commands=dict(self.config.tool_commands),
            )
        ctx = self.contexts[session_id]
        ctx.registry = self.registry  # pick up registry updates
        return ctx

    def _restore_unfinished(self) -> None:
        """Re-present unexecuted actions as pending after a restart."""
        for action_id, session_id, command_class, payload_json, created_at in (
            self.store.unfinished_actions()
        ):
            ctx = self.context(session_id)
            ctx.actions[action_id] = PendingAction(
                action_id=action_id,
                session_id=session_id,
                command_class=command_class,
                payload=_payload_from_json(payload_json),
                created_at=created_at,
                status="pending",
            )
            self.store.save_pending(
                action_id, session_id, command_class, payload_json, "pending", created_at
            )

    def pending_for(self, session_id: str) -> Optional[PendingAction]:
        ctx = self.contexts.get(session_id)
        if not ctx:
            return None
        for action in ctx.actions.values():
            if action.status == "pending":
                return action
        return None

    # --- operations ----------------------------------------------------

    def handle_input(self, session_id: str, text: str) -> dict:
        if self.pending_for(session_id) is not None:
            raise BadConfig("session already has a pending action")
        ctx = self.context(session_id)
        self.channel.publish(session_id, "console", "user_input", {"text": text})
        action = run_workflow1(text, ctx)
        row = LogRow(
            session_id=session_id,
            input_text=text,
            classifier_label=action.command_class,
            cog_invoked=_COG_NAMES.get(action.command_class),
            cog_output=_payload_str(action.payload),
            confirmed=True if action.status == "executed" else None,
            executed_ok=True if action.status == "executed" else None,
        )
        interaction_id = self.store.record(row)
        self.interaction_for_action[action.action_id] = interaction_id
        if action.status == "pending":
            self.store.save_pending(
                action.action_id,
                session_id,
                action.command_class,
                _payload_to_json(action.payload),
                "pending",
                action.created_at,
            )
        self.channel.publish(
            session_id,
            "cog_manager",
            "cog_result",
            {"action_id": action.action_id, "status": action.status},
        )
        return {
            "action_id": action.action_id,
            "session": session_id,
            "interaction_id": interaction_id,
            "command_class": action.command_class,
            "status": action.status,
            "payload": _payload_dict(action.payload),
            "error": action.error,
        }

    def handle_confirm(
        self, action_id: str, edited_code: Optional[str] = None, reject: bool = False
    ) -> dict:
        ctx = self._ctx_for_action(action_id)
        if reject:
            action = reject_action(action_id, ctx)
            self.store.finalize_pending(action_id, "rejected")
            self._update_log(action_id, confirmed=False)
            return {"action_id": action_id, "status": "rejected"}
        result = confirm_action(action_id, ctx, edited_code)
        action = ctx.actions[action_id]
        self.store.finalize_pending(action_id, action.status)
        self._update_log(
            action_id,
            confirmed=True,
            edited_output=edited_code,
            executed_ok=result.status == "executed",
        )
        self.channel.publish(
            action.session_id,
            "gateway",
            "execution_result",
            {"action_id": action_id, "status": result.status},
        )
        out = {
            "action_id": action_id,
            "status": result.status,
            "output": result.output,
            "error": result.error,
        }
        if result.trace is not None:
            out["trace"] = [json.loads(ev.to_json()) for ev in result.trace.events]
            out["final_time"] = result.trace.final_time
        if result.analysis is not None:
            out["analysis"] = result.analysis
        return out

    def handle_function(
        self, description: Optional[str] = None, entry: Optional[dict] = None
    ) -> dict:
        if entry is not None:
            fe = FunctionEntry(
                id=entry["id"],
                input_phrase=entry["input"],
                output_code=entry["output"],
                command_class=entry.get("class", "Op"),
                unchecked=bool(entry.get("unchecked", False)),
            )
            self.registry = append_function(self.registry, fe)
            save_registry(self.registry, self.config.registry_path)
            self.store.record_function(fe.id, json.dumps(entry), added_by="console")
            return {"committed": True, "id": fe.id, "version": self.registry.version}
        if description is None:
            raise BadConfig("need a description or an entry")
        fe = refine(description, self.registry, self._backend("refiner"))
        return {
            "committed": False,
            "preview": {
                "id": fe.id,
                "input": fe.input_phrase,
                "output": fe.output_code,
                "class": fe.command_class,
                "unchecked": fe.unchecked,
            },
        }

    def handle_chat(self, session_id: str, query: str) -> dict:
        result = chatbot.chat(query, self.corpus_index, self._backend("chat"))
        self.channel.publish(session_id, "gateway", "chat", {"query": query})
        return result

    # --- helpers -------------------------------------------------------

    def _ctx_for_action(self, action_id: str) -> CogContext:
        for ctx in self.contexts.values():
            if action_id in ctx.actions:
                return ctx
        from ..errors import UnknownAction

        raise UnknownAction(f"no action {action_id!r}")

    def _update_log(self, action_id: str, confirmed: bool, edited_output=None, executed_ok=None):
        interaction_id = self.interaction_for_action.get(action_id)
        if interaction_id is not None:
            self.store.update_confirmation(
                interaction_id, confirmed, edited_output, executed_ok
            )


def _payload_str(payload) -> str:
    if isinstance(payload, CodeCandidate):
        return payload.code
    if isinstance(payload, ProtocolCommand):
        return payload.protocol if payload.arg is None else f"{payload.protocol} {payload.arg:g}"
    if isinstance(payload, dict):
        return json.dumps(payload, sort_keys=True)
    return str(payload)


def _payload_dict(payload) -> dict:
    if isinstance(payload, CodeCandidate):
        return {
            "type": "code",
            "code": payload.code,
            "raw": payload.raw_model_output,
            "extraction_notes": payload.extraction_notes,
        }
    if isinstance(payload, ProtocolCommand):
        return {"type": "protocol", "protocol": payload.protocol, "arg": payload.arg}
    if isinstance(payload, dict):
        return {"type": "clarification", **payload}
    return {"type": "text", "value": str(payload)}


def _payload_to_json(payload) -> str:
    return json.dumps(_payload_dict(payload))


def _payload_from_json(text: str):
    d = json.loads(text)
    if d.get("type") == "code":
        return CodeCandidate(
            code=d["code"],
            raw_model_output=d.get("raw", d["code"]),
            extraction_notes=list(d.get("extraction_notes", [])),
        )
    if d.get("type") == "protocol":
        return ProtocolCommand(protocol=d["protocol"], arg=d.get("arg"))
    if d.get("type") == "clarification":
        return {k: v for k, v in d.items() if k != "type"}
    return d.get("value", "")


def replay_session(config: GatewayConfig, session_id: str, store: LogStore | None = None) -> list:
    """Re-run every logged input of a session on a fresh context.

    Returns [(input_text, command_class, payload_text)]; with deterministic
    backends this reproduces the original cog outputs exactly.
    """
    store = store or LogStore(config.db_path)
    rows = store.query_log(session=session_id)
    gw = Gateway(
        GatewayConfig(
            registry_path=config.registry_path,
            db_path=":memory:",
            backends=config.backends,
            notebook_dir=config.notebook_dir,
            corpus_dir=None,
            instrument=config.instrument,
            style=config.style,
        )
    )
    out = []
    for row in rows:
        response = gw.handle_input(f"replay-{session_id}", row.input_text)
        out.append((row.input_text, response["command_class"], _payload_str_from_dict(response["payload"])))
        if response["status"] == "pending":
            gw.handle_confirm(response["action_id"])
    return out


def _payload_str_from_dict(d: dict) -> str:
    if d.get("type") == "code":
        return d["code"]
    if d.get("type") == "protocol":
        arg = d.get("arg")
        return d["protocol"] if arg is None else f"{d['protocol']} {arg:g}"
    if d.get("type") == "clarification":
        return json.dumps({k: v for k, v in d.items() if k != "type"}, sort_keys=True)
    return str(d.get("value", ""))


# --- FastAPI app --------------------------------------------------------


from pydantic import BaseModel


class InputBody(BaseModel):
    text: Optional[str] = None
    audio: Optional[str] = None  # base64; needs a transcription endpoint
    session: str = "default"


class ConfirmBody(BaseModel):
    action_id: str
    edited_code: Optional[str] = None
    reject: bool = False


class FunctionBody(BaseModel):
    description: Optional[str] = None
    entry: Optional[dict] = None


class ChatBody(BaseModel):
    query: str
    session: str = "default"


def create_app(gateway: Gateway):
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import JSONResponse

    app = FastAPI(title="nlbeam gateway")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/input")
    def post_input(body: InputBody):
        if body.audio is not None and gateway.config.transcription_endpoint is None:
            raise HTTPException(
                status_code=501, detail="no transcription endpoint configured"
            )
        if not body.text:
            raise HTTPException(status_code=422, detail="text required")
        try:
            return gateway.handle_input(body.session, body.text)
        except BadConfig as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except NlbeamError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    @app.get("/pending")
    def get_pending(session: str = "default"):
        action = gateway.pending_for(session)
        if action is None:
            return JSONResponse({"pending": None})
        return {
            "pending": {
                "action_id": action.action_id,
                "command_class": action.command_class,
                "status": action.status,
                "payload": _payload_dict(action.payload),
            }
        }

    @app.post("/confirm")
    def post_confirm(body: ConfirmBody):
        from ..errors import AlreadyFinalized, UnknownAction

        try:
            return gateway.handle_confirm(body.action_id, body.edited_code, body.reject)
        except UnknownAction as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except AlreadyFinalized as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except NlbeamError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/functions")
    def post_functions(body: FunctionBody):
        try:
            return gateway.handle_function(body.description, body.entry)
        except NlbeamError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/chat")
    def post_chat(body: ChatBody):
        try:
            return gateway.handle_chat(body.session, body.query)
        except NlbeamError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    @app.get("/log")
    def get_log(
        session: Optional[str] = None,
        cog: Optional[str] = None,
        confirmed: Optional[bool] = None,
    ):
        rows = gateway.store.query_log(session=session, cog=cog, confirmed=confirmed)
        return {
            "rows": [
                {
                    "interaction_id": r.interaction_id,
                    "session": r.session_id,
                    "timestamp": r.timestamp,
                    "input_text": r.input_text,
                    "input_mode": r.input_mode,
                    "classifier_label": r.classifier_label,
                    "cog_invoked": r.cog_invoked,
                    "cog_output": r.cog_output,
                    "confirmed": r.confirmed,
                    "edited_output": r.edited_output,
                    "executed_ok": r.executed_ok,
                }
                for r in rows
            ]
        }

    return app
