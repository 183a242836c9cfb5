"""Edit-distance based string metrics: LD, NLD, WER, exact-match accuracy."""

from __future__ import annotations

import re
import string

import numpy as np

from .._kernels import edit_distance_kernel
from ..errors import EmptyReference, LengthMismatch

_PUNCT_RE = re.compile("[" + re.escape(string.punctuation) + "]")


def _codes(s: str) -> np.ndarray:
    return np.array([ord(c) for c in s], dtype=np.int32)


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions, or substitutions."""
    return edit_distance_kernel(_codes(a), _codes(b))


def normalized_levenshtein(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer length; 0.0 for two empty strings."""
    denom = max(len(a), len(b))
    if denom == 0:
        return 0.0
    return levenshtein(a, b) / denom


def _words(text: str) -> list[str]:
    return _PUNCT_RE.sub(" ", text.lower()).split()


def _token_distance(a: list[str], b: list[str]) -> int:
    vocab = {}
    for tok in a + b:
        vocab.setdefault(tok, len(vocab))
    ca = np.array([vocab[t] for t in a], dtype=np.int32)
    cb = np.array([vocab[t] for t in b], dtype=np.int32)
    return edit_distance_kernel(ca, cb)


def wer(reference: str, hypothesis: str) -> float:
    """Word error rate: word-level edit distance over the reference word count.

    Tokenization lowercases and strips punctuation before whitespace splitting.
    The value may exceed 1 when the hypothesis is much longer than the reference.
    """
    ref_words = _words(reference)
    if not ref_words:
        raise EmptyReference("reference has no words")
    return _token_distance(ref_words, _words(hypothesis)) / len(ref_words)


def exact_match_accuracy(predictions: list[str], references: list[list[str]]) -> float:
    """Fraction of predictions that string-equal at least one of their references.

    Trailing whitespace is normalized on both sides before comparison.
    """
    if len(predictions) != len(references):
        raise LengthMismatch(
            f"{len(predictions)} predictions vs {len(references)} cases"
        )
    if not predictions:
        return 0.0
    hits = 0
    for pred, refs in zip(predictions, references):
        p = pred.rstrip()
        if any(p == r.rstrip() for r in refs):
            hits += 1
    return hits / len(predictions)
