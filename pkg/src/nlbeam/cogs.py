"""Command-processing cogs and the manager that wires them together.

Workflow 1: classify a natural-language command, dispatch it to the
operator/analyst/notebook/tool path, and hold any executable result as a
PendingAction until a human confirms (optionally with edits).  Workflow 2:
refine a free-form function description into a registry entry.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import re
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

from .backends import BackendSpec, ChatRequest, complete
from .errors import (
    AlreadyFinalized,
    BackendError,
    ClassifierUnavailable,
    EmptyCode,
    MalformedRefinement,
    NlbeamError,
    StorageUnavailable,
    UnknownAction,
    UnknownProtocol,
)
from .registry import (
    CLASS_ORDER,
    FunctionEntry,
    PromptStyle,
    Registry,
    build_analyst_prompt,
    build_classifier_prompt,
    build_operator_prompt,
    build_refiner_prompt,
)
from .sim import InstrumentState, SimLimits, execute, parse_program

MISSED = "MISSED"
COMMAND_CLASSES = CLASS_ORDER + (MISSED,)

PROTOCOLS = (
    "thumbnails",
    "circular_average",
    "qr_image",
    "q_image",
    "linecut_qr",
    "linecut_qz",
    "linecut_angle",
    "sector_average",
    "circular_average_q2I_fit",
)
_ARG_PROTOCOLS = ("linecut_qr", "linecut_qz", "linecut_angle")

UNKNOWN_FUNCTION_SENTINEL = "UNKNOWN FUNCTION:"


@dataclass
class CodeCandidate:
    code: str
    raw_model_output: str
    extraction_notes: list = field(default_factory=list)


@dataclass(frozen=True)
class ProtocolCommand:
    protocol: str
    arg: Optional[float] = None


@dataclass
class PendingAction:
    action_id: str
    session_id: str
    command_class: str
    payload: object  # CodeCandidate | ProtocolCommand | note text | tool name
    created_at: str
    status: str = "pending"  # pending -> confirmed/edited_confirmed/rejected -> executed/failed
    error: Optional[str] = None

    _TRANSITIONS = {
        "pending": {"confirmed", "edited_confirmed", "rejected"},
        "confirmed": {"executed", "failed"},
        "edited_confirmed": {"executed", "failed"},
        "rejected": set(),
        "executed": set(),
        "failed": set(),
    }

    def transition(self, new_status: str) -> None:
        if new_status not in self._TRANSITIONS[self.status]:
            raise AlreadyFinalized(
                f"action {self.action_id} cannot go {self.status} -> {new_status}"
            )
        self.status = new_status


@dataclass
class ExecutionResult:
    action_id: str
    status: str
    output: str = ""
    trace: Optional[object] = None
    state: Optional[InstrumentState] = None
    analysis: Optional[dict] = None
    error: Optional[str] = None


@dataclass
class CogContext:
    registry: Registry
    backends: dict  # cog name -> BackendSpec
    session_id: str = "default"
    style: PromptStyle = PromptStyle.ONE_WORD
    notebook_path: Optional[str] = None
    tool_commands: dict = field(default_factory=dict)  # {gpcam: cmd, xicam: cmd}
    sim_state: InstrumentState = field(default_factory=InstrumentState)
    sim_limits: SimLimits = field(default_factory=SimLimits)
    analysis_executor: Optional[Callable[[ProtocolCommand], dict]] = None
    actions: dict = field(default_factory=dict)  # action_id -> PendingAction
    log: list = field(default_factory=list)  # append-only event dicts

    def backend_for(self, cog: str) -> BackendSpec:
        try:
            return self.backends[cog]
        except KeyError:
            raise BackendError(f"no backend configured for cog {cog!r}") from None

    def record(self, event: str, **fields) -> None:
        row = {"event": event, "session": self.session_id}
        row.update(fields)
        self.log.append(row)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


# --- classifier --------------------------------------------------------

_PUNCT = ".,;:!?\"'`"


def parse_class_label(text: str, style: PromptStyle) -> str:
    """Map raw model output to a command class; any failure is MISSED."""
    if style is PromptStyle.ONE_WORD:
        tokens = text.split()
        if not tokens:
            return MISSED
        word = tokens[0].strip(_PUNCT).lower()
        for cls in CLASS_ORDER:
            if word == cls.lower():
                return cls
        return MISSED
    if style is PromptStyle.ID:
        m = re.search(r"-?\d+", text)
        if m:
            n = int(m.group())
            if 0 <= n < len(CLASS_ORDER):
                return CLASS_ORDER[n]
        return MISSED
    # LIST: first bracketed vector with exactly one 1 and the rest 0
    m = re.search(r"\[([^\]]*)\]", text)
    if not m:
        return MISSED
    parts = [p.strip() for p in m.group(1).split(",")]
    if len(parts) != len(CLASS_ORDER) or sorted(parts) != ["0"] * 4 + ["1"]:
        return MISSED
    return CLASS_ORDER[parts.index("1")]


def classify(input_text: str, style: PromptStyle, reg: Registry, backend: BackendSpec) -> str:
    prompt = build_classifier_prompt(reg, style)
    try:
        resp = complete(backend, ChatRequest(system_prompt=prompt, user_prompt=input_text))
    except BackendError as exc:
        raise ClassifierUnavailable(str(exc)) from exc
    return parse_class_label(resp.text, style)


# --- operator ----------------------------------------------------------

_FENCE = re.compile(r"^```[a-zA-Z]*\s*$")


def extract_code(raw: str) -> CodeCandidate:
    """Normalize raw model output into bare command-language code."""
    notes = []
    lines = raw.split("\n")
    if any(_FENCE.match(ln) for ln in lines):
        lines = [ln for ln in lines if not _FENCE.match(ln)]
        notes.append("stripped_code_fences")
    kept = [ln for ln in lines if not ln.lstrip().startswith("#")]
    if len(kept) != len(lines):
        notes.append("stripped_comment_lines")
    code = "\n".join(kept).strip("\n")
    if code != "\n".join(kept):
        notes.append("trimmed_blank_edges")
    if not code.strip():
        raise EmptyCode("no code left after extraction")
    if UNKNOWN_FUNCTION_SENTINEL not in code:
        try:
            parse_program(code)
        except NlbeamError as exc:
            notes.append(f"parse_failed: {exc}")
    return CodeCandidate(code=code, raw_model_output=raw, extraction_notes=notes)


def operate(input_text: str, reg: Registry, backend: BackendSpec) -> CodeCandidate:
    prompt = build_operator_prompt(reg)
    resp = complete(backend, ChatRequest(system_prompt=prompt, user_prompt=input_text))
    return extract_code(resp.text)


# --- analyst -----------------------------------------------------------


def parse_protocol(text: str) -> ProtocolCommand:
    tokens = text.strip().split()
    if not tokens:
        raise UnknownProtocol("analyst returned an empty reply")
    name = tokens[0]
    if name not in PROTOCOLS:
        raise UnknownProtocol(f"unknown analysis protocol {name!r}")
    if len(tokens) == 1:
        return ProtocolCommand(protocol=name)
    if len(tokens) == 2 and name in _ARG_PROTOCOLS:
        try:
            return ProtocolCommand(protocol=name, arg=float(tokens[1]))
        except ValueError:
            raise UnknownProtocol(f"bad argument {tokens[1]!r} for {name}") from None
    raise UnknownProtocol(f"malformed protocol command {text.strip()!r}")


def analyze(input_text: str, reg: Registry, backend: BackendSpec) -> ProtocolCommand:
    prompt = build_analyst_prompt(reg)
    resp = complete(backend, ChatRequest(system_prompt=prompt, user_prompt=input_text))
    return parse_protocol(resp.text)


# --- refiner -----------------------------------------------------------


def _slug(text: str) -> str:
    s = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return s[:48].rstrip("-") or "entry"


def refine(description: str, reg: Registry, backend: BackendSpec) -> FunctionEntry:
    prompt = build_refiner_prompt(reg)
    resp = complete(backend, ChatRequest(system_prompt=prompt, user_prompt=description))
    text = resp.text.strip()
    if text.startswith("```"):
        text = "\n".join(
            ln for ln in text.split("\n") if not _FENCE.match(ln)
        ).strip()
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise MalformedRefinement(f"refiner reply is not JSON: {exc}") from exc
    if (
        not isinstance(data, dict)
        or set(data) != {"input", "output"}
        or not all(isinstance(v, str) for v in data.values())
    ):
        raise MalformedRefinement(
            'refiner reply must be a JSON object with exactly "input" and "output"'
        )
    return FunctionEntry(
        id=_slug(data["input"]),
        input_phrase=data["input"],
        output_code=data["output"],
        command_class="Op",  # default pending human edit
        unchecked=True,
    )


# --- notebook ----------------------------------------------------------


def take_note(text: str, ctx: CogContext) -> tuple[str, str, str]:
    """Append (timestamp, session, text) to the session CSV and return the row."""
    if ctx.notebook_path is None:
        raise StorageUnavailable("no notebook path configured")
    row = (_now(), ctx.session_id, text)
    try:
        import os

        write_header = not os.path.exists(ctx.notebook_path)
        with open(ctx.notebook_path, "a", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            if write_header:
                writer.writerow(["timestamp", "session", "text"])
            writer.writerow(row)
    except OSError as exc:
        raise StorageUnavailable(str(exc)) from exc
    return row


# --- workflow 1 --------------------------------------------------------


def _new_action(ctx: CogContext, command_class: str, payload, status="pending", error=None):
    action = PendingAction(
        action_id=uuid.uuid4().hex,
        session_id=ctx.session_id,
        command_class=command_class,
        payload=payload,
        created_at=_now(),
        status=status,
        error=error,
    )
    ctx.actions[action.action_id] = action
    return action


def run_workflow1(input_text: str, ctx: CogContext) -> PendingAction:
    cls = classify(input_text, ctx.style, ctx.registry, ctx.backend_for("classifier"))
    ctx.record("classified", input=input_text, command_class=cls)
    try:
        if cls == "Op":
            candidate = operate(input_text, ctx.registry, ctx.backend_for("operator"))
            action = _new_action(ctx, cls, candidate)
        elif cls == "Ana":
            protocol = analyze(input_text, ctx.registry, ctx.backend_for("analyst"))
            action = _new_action(ctx, cls, protocol)
        elif cls == "Notebook":
            row = take_note(input_text, ctx)
            action = _new_action(ctx, cls, input_text, status="confirmed")
            action.transition("executed")
            ctx.record("note_taken", action_id=action.action_id, row=list(row))
        elif cls in ("gpcam", "xicam"):
            action = _new_action(ctx, cls, cls)
        else:  # MISSED
            action = _new_action(
                ctx,
                MISSED,
                {"clarification": f"Could not classify the request: {input_text!r}. Please rephrase."},
            )
    except NlbeamError as exc:
        action = _new_action(ctx, cls, None, status="failed", error=str(exc))
    ctx.record(
        "action_created",
        action_id=action.action_id,
        command_class=action.command_class,
        status=action.status,
        payload=_payload_text(action.payload),
    )
    return action


def _payload_text(payload) -> str:
    if isinstance(payload, CodeCandidate):
        return payload.code
    if isinstance(payload, ProtocolCommand):
        if payload.arg is None:
            return payload.protocol
        return f"{payload.protocol} {payload.arg:g}"
    if isinstance(payload, dict):
        return json.dumps(payload, sort_keys=True)
    return str(payload)


def _default_analysis_executor(cmd: ProtocolCommand) -> dict:
    from . import analysis

    return analysis.dispatch_protocol(cmd.protocol, cmd.arg)


def confirm_action(
    action_id: str, ctx: CogContext, edited_code: Optional[str] = None
) -> ExecutionResult:
    action = ctx.actions.get(action_id)
    if action is None:
        raise UnknownAction(f"no action {action_id!r}")
    if action.status != "pending":
        raise AlreadyFinalized(f"action {action_id} already {action.status}")

    if edited_code is not None:
        if not isinstance(action.payload, CodeCandidate):
            raise UnknownAction("only code actions accept edits")
        parse_program(edited_code, extra_functions=_registry_functions(ctx.registry))
        original = action.payload.code
        action.payload = CodeCandidate(
            code=edited_code,
            raw_model_output=action.payload.raw_model_output,
            extraction_notes=action.payload.extraction_notes + ["human_edited"],
        )
        action.transition("edited_confirmed")
        # both versions go to the log for later prompt development
        ctx.record("edited", action_id=action_id, original=original, edited=edited_code)
    else:
        action.transition("confirmed")
    ctx.record("confirmed", action_id=action_id, status=action.status)

    try:
        result = _execute_action(action, ctx)
    except NlbeamError as exc:
        action.transition("failed")
        action.error = str(exc)
        ctx.record("failed", action_id=action_id, error=str(exc))
        return ExecutionResult(action_id=action_id, status="failed", error=str(exc))
    action.transition("executed")
    ctx.record("executed", action_id=action_id, output=result.output)
    return result


def reject_action(action_id: str, ctx: CogContext) -> PendingAction:
    action = ctx.actions.get(action_id)
    if action is None:
        raise UnknownAction(f"no action {action_id!r}")
    action.transition("rejected")
    ctx.record("rejected", action_id=action_id)
    return action


def _registry_functions(reg: Registry) -> tuple:
    names = (_call_name(e.output_code) for e in reg.entries if not e.unchecked)
    return tuple(n for n in names if n)


def _call_name(code: str) -> str:
    m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_.]*)\s*\(", code)
    return m.group(1) if m else ""


def _execute_action(action: PendingAction, ctx: CogContext) -> ExecutionResult:
    if isinstance(action.payload, CodeCandidate):
        if UNKNOWN_FUNCTION_SENTINEL in action.payload.code:
            raise UnknownAction(
                "cannot execute a candidate carrying an UNKNOWN FUNCTION sentinel"
            )
        extra = _registry_functions(ctx.registry)
        program = parse_program(action.payload.code, extra_functions=extra)
        state, trace = execute(program, ctx.sim_state, ctx.sim_limits, extra_functions=extra)
        ctx.sim_state = state
        output = "".join(
            ev.args.get("text", "") + "\n" for ev in trace.events if ev.kind == "Output"
        )
        return ExecutionResult(
            action_id=action.action_id,
            status="executed",
            output=output.rstrip("\n"),
            trace=trace,
            state=state,
        )
    if isinstance(action.payload, ProtocolCommand):
        executor = ctx.analysis_executor or _default_analysis_executor
        result = executor(action.payload)
        return ExecutionResult(
            action_id=action.action_id,
            status="executed",
            output=action.payload.protocol,
            analysis=result,
        )
    if action.command_class in ("gpcam", "xicam"):
        cmd = ctx.tool_commands.get(action.command_class)
        if cmd:
            import subprocess

            subprocess.Popen(cmd, shell=True)
            output = f"launched {action.command_class}: {cmd}"
        else:
            output = f"tool launch stub: {action.command_class}"
        return ExecutionResult(
            action_id=action.action_id, status="executed", output=output
        )
    # MISSED clarification: nothing to execute
    return ExecutionResult(
        action_id=action.action_id,
        status="executed",
        output=_payload_text(action.payload),
    )
