"""Dataset runner: multi-reference selection, per-case scores, aggregates."""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import DatasetMalformed, EmptyReference
from ..sim import execute, parse_program, trace_equivalent
from ..errors import NlbeamError
from .codebleu import codebleu
from .edit import levenshtein, normalized_levenshtein, wer

KINDS = (
    "classifier",
    "operator_sequential",
    "operator_structured",
    "analyst",
    "transcriber",
)


@dataclass
class EvalCase:
    input: str
    references: list[str]
    kind: str

    def __post_init__(self):
        if not self.references:
            raise EmptyReference("EvalCase needs at least one reference")
        if self.kind not in KINDS:
            raise DatasetMalformed(f"unknown case kind {self.kind!r}")


@dataclass
class CaseResult:
    output: str
    latency_s: float
    exact: bool
    ld: int
    nld: float
    chosen_reference: dict
    codebleu: Optional[dict] = None
    wer: Optional[float] = None
    trace_equivalent: Optional[bool] = None


@dataclass
class MetricReport:
    run_count: int
    per_case: list  # list over runs of lists of CaseResult
    aggregate: dict

    def to_json(self) -> str:
        def enc(o):
            return o.__dict__

        return json.dumps(
            {
                "run_count": self.run_count,
                "aggregate": self.aggregate,
                "per_case": self.per_case,
            },
            default=enc,
            indent=2,
        )


def best_reference(candidate: str, references: list[str], metric: str):
    """Pick the reference that is optimal for the given metric.

    Maximizes for codebleu/exact, minimizes for ld/nld/wer.  Ties break in
    reference order.
    """
    if not references:
        raise EmptyReference("no references to choose from")
    scorers = {
        "ld": lambda r: levenshtein(candidate, r),
        "nld": lambda r: normalized_levenshtein(candidate, r),
        "wer": lambda r: wer(r, candidate),
        "exact": lambda r: 1.0 if candidate.rstrip() == r.rstrip() else 0.0,
        "codebleu": lambda r: codebleu(r, candidate).composite,
    }
    score = scorers[metric]
    maximize = metric in ("exact", "codebleu")
    best, best_score = references[0], score(references[0])
    for ref in references[1:]:
        s = score(ref)
        if (s > best_score) if maximize else (s < best_score):
            best, best_score = ref, s
    return best, best_score


def load_dataset(path) -> list[EvalCase]:
    cases = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                cases.append(EvalCase(d["input"], list(d["references"]), d["kind"]))
            except (KeyError, ValueError, TypeError) as exc:
                raise DatasetMalformed(f"bad case: {exc}", case_index=i) from exc
    return cases


def _score_case(case: EvalCase, output: str, latency: float) -> CaseResult:
    chosen = {}
    ref_exact, s_exact = best_reference(output, case.references, "exact")
    chosen["exact"] = ref_exact
    ref_ld, ld = best_reference(output, case.references, "ld")
    chosen["ld"] = ref_ld
    ref_nld, nld = best_reference(output, case.references, "nld")
    chosen["nld"] = ref_nld
    result = CaseResult(
        output=output,
        latency_s=latency,
        exact=bool(s_exact),
        ld=int(ld),
        nld=nld,
        chosen_reference=chosen,
    )
    if case.kind == "operator_structured":
        # codebleu is meaningful only for multi-line structured programs
        ref_cb, _ = best_reference(output, case.references, "codebleu")
        chosen["codebleu"] = ref_cb
        result.codebleu = codebleu(ref_cb, output).__dict__
        result.trace_equivalent = _any_trace_equivalent(output, case.references)
    if case.kind == "transcriber":
        ref_wer, w = best_reference(output, case.references, "wer")
        chosen["wer"] = ref_wer
        result.wer = w
    return result


def _any_trace_equivalent(output: str, references: list[str]) -> bool:
    try:
        _, out_trace = execute(parse_program(output))
    except NlbeamError:
        return False
    for ref in references:
        try:
            _, ref_trace = execute(parse_program(ref))
        except NlbeamError:
            continue
        if trace_equivalent(out_trace, ref_trace):
            return True
    return False


def _mean_std(values):
    if not values:
        return 0.0, 0.0
    if len(values) == 1:
        return float(values[0]), 0.0
    return statistics.mean(values), statistics.stdev(values)


def run_eval(
    cases: list[EvalCase],
    cog: Callable[[str], tuple[str, float]],
    runs: int = 5,
) -> MetricReport:
    """Run every case `runs` times through a cog callable.

    The cog maps an input string to (output text, backend latency seconds);
    latency covers the model call only, not prompt assembly.
    """
    all_runs = []
    for _ in range(runs):
        results = []
        for case in cases:
            output, latency = cog(case.input)
            results.append(_score_case(case, output, latency))
        all_runs.append(results)

    def per_run(fn):
        return [fn(run) for run in all_runs]

    def agg(fn):
        mean, std = _mean_std(per_run(fn))
        return {"mean": mean, "std": std}

    n = len(cases) or 1
    aggregate = {
        "exact_match": agg(lambda run: sum(r.exact for r in run) / n),
        "ld": agg(lambda run: sum(r.ld for r in run) / n),
        "nld": agg(lambda run: sum(r.nld for r in run) / n),
        "latency_s": agg(lambda run: sum(r.latency_s for r in run) / n),
    }
    cb_runs = [
        [r.codebleu["composite"] for r in run if r.codebleu is not None]
        for run in all_runs
    ]
    if any(cb_runs):
        mean, std = _mean_std([sum(v) / len(v) for v in cb_runs if v])
        aggregate["codebleu"] = {"mean": mean, "std": std}
        te = [
            sum(1 for r in run if r.trace_equivalent) / max(1, len([r for r in run if r.trace_equivalent is not None]))
            for run in all_runs
        ]
        mean, std = _mean_std(te)
        aggregate["trace_equivalent"] = {"mean": mean, "std": std}
    wer_runs = [[r.wer for r in run if r.wer is not None] for run in all_runs]
    if any(wer_runs):
        mean, std = _mean_std([sum(v) / len(v) for v in wer_runs if v])
        aggregate["wer"] = {"mean": mean, "std": std}
    return MetricReport(run_count=runs, per_case=all_runs, aggregate=aggregate)
