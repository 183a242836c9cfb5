"""Uniform completion interface over interchangeable model providers.

Three backend kinds: an OpenAI-compatible remote client, a deterministic
scripted backend driven by (matcher, output) rules, and an echo backend.
The scripted backend is a pure function of (rules, user_prompt), which keeps
every pipeline test byte-reproducible.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import BadConfig, NoRuleMatched, Timeout, Unreachable

REMOTE = "remote_openai_compatible"
SCRIPTED = "scripted"
ECHO = "echo"


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = 0.0
    max_tokens: int = 1024
    seed: Optional[int] = None
    model_id: str = "default"

    def __post_init__(self):
        if not self.system_prompt or not self.user_prompt:
            raise BadConfig("prompts must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise BadConfig("temperature must be in [0, 2]")
        if self.max_tokens <= 0:
            raise BadConfig("max_tokens must be positive")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    latency_s: float
    token_counts: Optional[tuple[int, int]] = None  # (prompt, completion)


@dataclass(frozen=True)
class Rule:
    match: str
    output: str
    mode: str = "exact"  # "exact" or "substring"

    def hits(self, user_prompt: str) -> bool:
        if self.mode == "exact":
            return user_prompt == self.match
        if self.mode == "substring":
            return self.match in user_prompt
        raise BadConfig(f"unknown rule mode {self.mode!r}")


@dataclass(frozen=True)
class BackendSpec:
    kind: str
    endpoint: Optional[str] = None
    api_key: Optional[str] = None
    model_id: Optional[str] = None
    timeout_s: float = 120.0
    rules: tuple = ()

    def __post_init__(self):
        if self.kind not in (REMOTE, SCRIPTED, ECHO):
            raise BadConfig(f"unknown backend kind {self.kind!r}")
        if self.kind == REMOTE and not self.endpoint:
            raise BadConfig("remote backend requires an endpoint")
        if self.kind == SCRIPTED and not self.rules:
            raise BadConfig("scripted backend requires at least one rule")


def scripted_backend(rules) -> BackendSpec:
    return BackendSpec(kind=SCRIPTED, rules=tuple(rules))


def echo_backend() -> BackendSpec:
    return BackendSpec(kind=ECHO)


def load_rules(path) -> tuple[Rule, ...]:
    """Scripted rules file: JSONL of {"match", "mode", "output"}."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            rules.append(Rule(d["match"], d["output"], d.get("mode", "exact")))
    return tuple(rules)


def _complete_scripted(backend: BackendSpec, req: ChatRequest) -> str:
    for rule in backend.rules:
        if rule.hits(req.user_prompt):
            return rule.output
    raise NoRuleMatched(f"no scripted rule matches {req.user_prompt!r}")


def _complete_remote(backend: BackendSpec, req: ChatRequest) -> str:
    import httpx

    payload = {
        "model": backend.model_id or req.model_id,
        "messages": [
            {"role": "system", "content": req.system_prompt},
            {"role": "user", "content": req.user_prompt},
        ],
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    }
    if req.seed is not None:
        payload["seed"] = req.seed
    headers = {"Content-Type": "application/json"}
    if backend.api_key:
        headers["Authorization"] = f"Bearer {backend.api_key}"
    url = backend.endpoint.rstrip("/") + "/chat/completions"

    last_exc = None
    for attempt in range(2):  # one retry on transport error, none on timeout
        try:
            resp = httpx.post(
                url, json=payload, headers=headers, timeout=backend.timeout_s
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except httpx.TimeoutException as exc:
            raise Timeout(f"backend timed out after {backend.timeout_s}s") from exc
        except (httpx.TransportError, httpx.HTTPStatusError, KeyError, ValueError) as exc:
            last_exc = exc
    raise Unreachable(f"backend unreachable: {last_exc}") from last_exc


def complete(backend: BackendSpec, req: ChatRequest) -> ChatResponse:
    """Run one chat completion; latency covers the provider call only."""
    start = time.monotonic()
    if backend.kind == SCRIPTED:
        text = _complete_scripted(backend, req)
    elif backend.kind == ECHO:
        text = req.user_prompt
    else:
        text = _complete_remote(backend, req)
    return ChatResponse(text=text, latency_s=time.monotonic() - start)


# --- per-cog backend configuration -------------------------------------


def load_backend_config(path) -> dict[str, BackendSpec]:
    """JSON config mapping cog name -> backend spec.

    Environment variables NLBEAM_ENDPOINT and NLBEAM_API_KEY override the
    corresponding fields of every remote backend.
    """
    import os

    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    out = {}
    for cog, spec in data.items():
        kind = spec.get("kind", ECHO)
        rules = ()
        if "rules_file" in spec:
            rules = load_rules(spec["rules_file"])
        elif "rules" in spec:
            rules = tuple(
                Rule(r["match"], r["output"], r.get("mode", "exact"))
                for r in spec["rules"]
            )
        out[cog] = BackendSpec(
            kind=kind,
            endpoint=os.environ.get("NLBEAM_ENDPOINT", spec.get("endpoint")),
            api_key=os.environ.get("NLBEAM_API_KEY", spec.get("api_key")),
            model_id=spec.get("model_id"),
            timeout_s=float(spec.get("timeout_s", 120.0)),
            rules=rules,
        )
    return out
