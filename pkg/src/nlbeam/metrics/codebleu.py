"""Composite code-similarity score: n-gram, keyword-weighted n-gram,
AST-subtree, and data-flow components over the beamline command language."""

from __future__ import annotations

import ast
import math
from collections import Counter
from dataclasses import dataclass

from ..errors import InvalidWeights, NlbeamError
from ..sim import parse_program
from ..sim.parser import SIGNATURES

KEYWORDS = frozenset(
    {
        "for",
        "while",
        "if",
        "else",
        "elif",
        "in",
        "import",
        "pass",
        "True",
        "False",
        "None",
        "range",
    }
    | {name.split(".")[-1] for name in SIGNATURES}
)

KEYWORD_WEIGHT = 4.0


@dataclass
class CodeBleuScore:
    ngram_match: float
    weighted_ngram_match: float
    syntax_match: float
    dataflow_match: float
    composite: float
    parse_ok: bool  # False when syntax/data-flow components were zeroed out


# --- n-gram components -------------------------------------------------


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _bleu(ref_tokens, cand_tokens, unigram_weight=None):
    """Modified-precision BLEU-4 with brevity penalty over whitespace tokens.

    unigram_weight, if given, maps a token to its weight for the 1-gram
    precision (keyword-weighted variant); higher n-grams are unweighted.
    """
    if not cand_tokens or not ref_tokens:
        return 1.0 if cand_tokens == ref_tokens else 0.0
    log_sum = 0.0
    used = 0
    for n in range(1, 5):
        cand = _ngrams(cand_tokens, n)
        if not cand:
            continue
        ref = _ngrams(ref_tokens, n)
        if n == 1 and unigram_weight is not None:
            total = sum(unigram_weight(t[0]) * c for t, c in cand.items())
            matched = sum(
                unigram_weight(t[0]) * min(c, ref.get(t, 0)) for t, c in cand.items()
            )
        else:
            total = sum(cand.values())
            matched = sum(min(c, ref.get(t, 0)) for t, c in cand.items())
        if matched == 0:
            return 0.0
        log_sum += math.log(matched / total)
        used += 1
    score = math.exp(log_sum / used)
    if len(cand_tokens) < len(ref_tokens):
        score *= math.exp(1.0 - len(ref_tokens) / len(cand_tokens))
    return score


def _keyword_weight(token: str) -> float:
    return KEYWORD_WEIGHT if token in KEYWORDS else 1.0


# --- syntax component --------------------------------------------------

_SKIP = (ast.expr_context,)


def _children(node):
    return [c for c in ast.iter_child_nodes(node) if not isinstance(c, _SKIP)]


def _shape(node) -> str:
    kids = _children(node)
    if not kids:
        return type(node).__name__
    return f"{type(node).__name__}({','.join(_shape(c) for c in kids)})"


def _subtrees(tree) -> Counter:
    """Multiset of node-type-labeled subtree shapes with depth >= 2."""
    shapes = Counter()
    for node in ast.walk(tree):
        if isinstance(node, _SKIP):
            continue
        if _children(node):
            shapes[_shape(node)] += 1
    return shapes


def _syntax_match(ref_tree, cand_tree) -> float:
    ref = _subtrees(ref_tree)
    if not ref:
        return 1.0
    cand = _subtrees(cand_tree)
    matched = sum(min(c, cand.get(s, 0)) for s, c in ref.items())
    return matched / sum(ref.values())


# --- data-flow component -----------------------------------------------


def _dataflow_edges(tree) -> Counter:
    """Def-use edges with variables renamed var0, var1, ... in definition order."""
    order: dict[str, int] = {}

    def define(name: str) -> None:
        order.setdefault(name, len(order))

    edges: Counter = Counter()
    for node in ast.walk(tree):
        if isinstance(node, ast.Assign):
            for t in node.targets:
                if isinstance(t, ast.Name):
                    define(t.id)
        elif isinstance(node, (ast.AugAssign, ast.For)):
            t = node.target
            if isinstance(t, ast.Name):
                define(t.id)
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load):
            if node.id in order:
                edges[f"var{order[node.id]}"] += 1
    return edges


def _dataflow_match(ref_tree, cand_tree) -> float:
    ref = _dataflow_edges(ref_tree)
    cand = _dataflow_edges(cand_tree)
    if not ref:
        return 1.0 if not cand else 0.0
    matched = sum(min(c, cand.get(e, 0)) for e, c in ref.items())
    return matched / sum(ref.values())


# --- composite ---------------------------------------------------------


def codebleu(
    reference: str,
    candidate: str,
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
    extra_functions=(),
) -> CodeBleuScore:
    if len(weights) != 4 or any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise InvalidWeights("weights must be non-negative and sum to 1")

    ref_tokens = reference.split()
    cand_tokens = candidate.split()
    ngram = _bleu(ref_tokens, cand_tokens)
    weighted = _bleu(ref_tokens, cand_tokens, unigram_weight=_keyword_weight)

    parse_ok = True
    try:
        ref_tree = parse_program(reference, extra_functions).py_ast
        cand_tree = parse_program(candidate, extra_functions).py_ast
    except NlbeamError:
        parse_ok = False
        syntax = 0.0
        dataflow = 0.0
    else:
        syntax = _syntax_match(ref_tree, cand_tree)
        dataflow = _dataflow_match(ref_tree, cand_tree)

    a, b, c, d = weights
    composite = a * ngram + b * weighted + c * syntax + d * dataflow
    return CodeBleuScore(ngram, weighted, syntax, dataflow, composite, parse_ok)
