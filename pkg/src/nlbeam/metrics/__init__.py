from .edit import levenshtein, normalized_levenshtein, wer, exact_match_accuracy
from .codebleu import codebleu, CodeBleuScore
from .classify import classifier_report, ConfusionMatrix
from .runner import best_reference, load_dataset, run_eval, EvalCase, MetricReport

__all__ = [
    "levenshtein",
    "normalized_levenshtein",
    "wer",
    "exact_match_accuracy",
    "codebleu",
    "CodeBleuScore",
    "classifier_report",
    "ConfusionMatrix",
    "best_reference",
    "load_dataset",
    "run_eval",
    "EvalCase",
    "MetricReport",
]
