"""Free-form question answering: route, retrieve, answer.

Questions pass through two classification decisions (scientific vs. generic,
then thorough vs. high-level), lexical BM25 retrieval over a local document
corpus, and a fixed question-answering template.
"""

from __future__ import annotations

import math
import os
import re
from collections import Counter
from dataclasses import dataclass, field

from .backends import BackendSpec, ChatRequest, complete
from .errors import BackendError, EmptyCorpus, RouterUnavailable

GENERIC = "generic"
SCIENTIFIC_HIGH_LEVEL = "scientific_high_level"
SCIENTIFIC_THOROUGH = "scientific_thorough"

HIGH_LEVEL_BUDGET = 3
THOROUGH_BUDGET = 8

QA_TEMPLATE = (
    "Answer the question below using the provided context. \n"
    "\n"
    "Context (with relevance scores): \n"
    "\n"
    "{context} ---- \n"
    "\n"
    "Question: {question} \n"
    "\n"
    'Write a direct, concise answer based on the context. If the context is '
    'insufficient, respond with, "The context provided was not enough, but '
    "based on what I know, this is the answer: [answer].\n"
    "Keep answers to the point, focusing only on relevant details. If quotes "
    "are present and relevant, include them. \n"
    "\n"
    "Answer:"
)

SCIENTIFIC_DECISION_PROMPT = (
    "You decide whether a user question concerns science, instrumentation, "
    "measurements, or data analysis, or is a generic conversational question.\n"
    "Answer with exactly one word: scientific or generic."
)

DEPTH_DECISION_PROMPT = (
    "You decide whether a scientific question calls for a thorough, detailed "
    "answer with references, or a quick high-level summary.\n"
    "Answer with exactly one word: thorough or high-level."
)

INSUFFICIENT_CONTEXT_PREFIX = (
    "The context provided was not enough, but based on what I know, "
    "this is the answer: "
)


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    index: int
    text: str


@dataclass(frozen=True)
class RetrievedContext:
    chunks: tuple  # of (Chunk, score), scores non-increasing
    budget: int


_TOKEN = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass
class CorpusIndex:
    """Immutable BM25 index over paragraph-chunked plain-text documents."""

    chunks: tuple = ()
    k1: float = 1.2
    b: float = 0.75
    _df: Counter = field(default_factory=Counter)
    _tf: tuple = ()
    _lengths: tuple = ()
    _avg_len: float = 0.0

    @classmethod
    def build(cls, corpus_dir) -> "CorpusIndex":
        chunks = []
        try:
            names = sorted(os.listdir(corpus_dir))
        except OSError as exc:
            raise EmptyCorpus(f"cannot read corpus directory: {exc}") from exc
        for name in names:
            if not name.endswith((".txt", ".md")):
                continue
            path = os.path.join(corpus_dir, name)
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
            paragraphs = [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]
            for i, para in enumerate(paragraphs):
                chunks.append(Chunk(doc_id=name, index=i, text=para))
        if not chunks:
            raise EmptyCorpus(f"no text chunks found under {corpus_dir}")
        tf = tuple(Counter(_tokens(c.text)) for c in chunks)
        lengths = tuple(sum(t.values()) for t in tf)
        df = Counter()
        for t in tf:
            df.update(t.keys())
        return cls(
            chunks=tuple(chunks),
            _df=df,
            _tf=tf,
            _lengths=lengths,
            _avg_len=sum(lengths) / len(lengths),
        )

    def score(self, query: str, chunk_pos: int) -> float:
        tf = self._tf[chunk_pos]
        length = self._lengths[chunk_pos]
        n = len(self.chunks)
        s = 0.0
        for term in _tokens(query):
            f = tf.get(term, 0)
            if not f:
                continue
            idf = math.log(1 + (n - self._df[term] + 0.5) / (self._df[term] + 0.5))
            s += idf * f * (self.k1 + 1) / (
                f + self.k1 * (1 - self.b + self.b * length / self._avg_len)
            )
        return s


def retrieve(query: str, index: CorpusIndex, budget: int) -> RetrievedContext:
    """Top-`budget` chunks by BM25; ties break by doc_id then chunk index."""
    if not index.chunks:
        raise EmptyCorpus("corpus index is empty")
    scored = [
        (index.score(query, pos), chunk) for pos, chunk in enumerate(index.chunks)
    ]
    scored.sort(key=lambda sc: (-sc[0], sc[1].doc_id, sc[1].index))
    top = [(chunk, score) for score, chunk in scored[: max(0, budget)] if score > 0]
    return RetrievedContext(chunks=tuple(top), budget=budget)


def _decide(query: str, backend: BackendSpec, system_prompt: str, labels) -> str:
    try:
        resp = complete(
            backend,
            ChatRequest(system_prompt=system_prompt, user_prompt=query, temperature=0.0),
        )
    except BackendError as exc:
        raise RouterUnavailable(str(exc)) from exc
    # earliest label mentioned anywhere in the reply wins; this lets one
    # scripted rule ("scientific, thorough") drive both sequential decisions
    text = resp.text.lower()
    hits = [(text.find(label), label) for label in labels if label in text]
    return min(hits)[1] if hits else labels[0]


def route(query: str, backend: BackendSpec) -> str:
    """Two sequential decisions; unparseable replies fall back conservatively."""
    first = _decide(query, backend, SCIENTIFIC_DECISION_PROMPT, ("generic", "scientific"))
    if first == "generic":
        return GENERIC
    depth = _decide(query, backend, DEPTH_DECISION_PROMPT, ("high-level", "thorough"))
    return SCIENTIFIC_THOROUGH if depth == "thorough" else SCIENTIFIC_HIGH_LEVEL


def budget_for(route_kind: str) -> int:
    return THOROUGH_BUDGET if route_kind == SCIENTIFIC_THOROUGH else HIGH_LEVEL_BUDGET


def render_context(context: RetrievedContext) -> str:
    return "\n\n".join(
        f"[{score:.3f}] ({chunk.doc_id}#{chunk.index}) {chunk.text}"
        for chunk, score in context.chunks
    )


def answer(
    query: str,
    route_kind: str,
    context: RetrievedContext | None,
    backend: BackendSpec,
    temperature: float = 0.7,
) -> str:
    if route_kind == GENERIC:
        resp = complete(
            backend,
            ChatRequest(
                system_prompt="You are a helpful assistant.",
                user_prompt=query,
                temperature=temperature,
            ),
        )
        return resp.text
    rendered = render_context(context) if context and context.chunks else ""
    prompt = QA_TEMPLATE.replace("{context}", rendered).replace("{question}", query)
    resp = complete(
        backend,
        ChatRequest(system_prompt=prompt, user_prompt=query, temperature=temperature),
    )
    if not rendered:
        return INSUFFICIENT_CONTEXT_PREFIX + resp.text
    return resp.text


def chat(query: str, index: CorpusIndex | None, backend: BackendSpec) -> dict:
    """Full pipeline: route, retrieve for scientific routes, answer."""
    kind = route(query, backend)
    context = None
    if kind != GENERIC and index is not None:
        context = retrieve(query, index, budget_for(kind))
    text = answer(query, kind, context, backend)
    return {
        "route": kind,
        "answer": text,
        "chunks": [
            {"doc_id": c.doc_id, "index": c.index, "score": s}
            for c, s in (context.chunks if context else ())
        ],
    }
