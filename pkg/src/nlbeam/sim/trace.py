"""Canonical event traces and the functional-equivalence check."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class TraceEvent:
    t_start: float
    kind: str
    args: dict
    snapshot: tuple  # (x, y, th, phi, temperature)

    def to_json(self) -> str:
        return json.dumps(
            {
                "t_start": self.t_start,
                "kind": self.kind,
                "args": self.args,
                "snapshot": list(self.snapshot),
            },
            sort_keys=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "TraceEvent":
        d = json.loads(line)
        return cls(d["t_start"], d["kind"], d["args"], tuple(d["snapshot"]))


@dataclass
class Trace:
    events: list[TraceEvent] = field(default_factory=list)
    final_time: float = 0.0

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        events = [TraceEvent.from_json(line) for line in text.splitlines() if line.strip()]
        final = events[-1].t_start if events else 0.0
        return cls(events=events, final_time=final)


@dataclass
class EquivalenceTolerance:
    # rounding (not epsilon comparison) keeps the equivalence transitive
    float_decimals: int = 9
    time_decimals: int = 9
    ignore: frozenset = frozenset({"Output"})


def _round(value, decimals):
    if isinstance(value, float):
        return round(value, decimals)
    if isinstance(value, (list, tuple)):
        return tuple(_round(v, decimals) for v in value)
    return value


def _normalize(trace: Trace, tol: EquivalenceTolerance):
    out = []
    for ev in trace.events:
        if ev.kind in tol.ignore:
            continue
        args = {k: _round(v, tol.float_decimals) for k, v in sorted(ev.args.items())}
        out.append((round(ev.t_start, tol.time_decimals), ev.kind, tuple(args.items())))
    return out


def trace_equivalent(a: Trace, b: Trace, tol: EquivalenceTolerance | None = None) -> bool:
    """True iff the two traces are element-wise equal after normalization.

    Normalization drops ignored event kinds and rounds floats to fixed
    decimal places.  Argument names are already canonical at execution time,
    so keyword vs positional call styles compare equal.
    """
    tol = tol or EquivalenceTolerance()
    return _normalize(a, tol) == _normalize(b, tol)
