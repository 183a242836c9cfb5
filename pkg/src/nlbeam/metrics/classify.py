"""Confusion matrix and F1 reporting for the classifier."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import LengthMismatch

REAL_CLASSES = ("Op", "Ana", "Notebook", "gpcam", "xicam")
ALL_CLASSES = REAL_CLASSES + ("MISSED",)


@dataclass
class ConfusionMatrix:
    classes: tuple = ALL_CLASSES
    counts: dict = field(default_factory=dict)  # (gold, predicted) -> int

    def add(self, gold: str, predicted: str) -> None:
        key = (gold, predicted)
        self.counts[key] = self.counts.get(key, 0) + 1

    def row_sum(self, gold: str) -> int:
        return sum(c for (g, _), c in self.counts.items() if g == gold)

    def col_sum(self, predicted: str) -> int:
        return sum(c for (_, p), c in self.counts.items() if p == predicted)

    def as_grid(self) -> list[list[int]]:
        return [
            [self.counts.get((g, p), 0) for p in self.classes] for g in self.classes
        ]


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def classifier_report(gold: list[str], predicted: list[str]):
    """Confusion counts plus per-class precision/recall/F1 and the two averages.

    0/0 ratios are defined as 0.  Macro-F1 is the unweighted mean over the
    five real classes; weighted-F1 is support-weighted.  MISSED appears only
    as a predicted column.
    """
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(predicted)} predictions")
    cm = ConfusionMatrix()
    for g, p in zip(gold, predicted):
        cm.add(g, p)

    per_class = {}
    for cls in REAL_CLASSES:
        tp = cm.counts.get((cls, cls), 0)
        pred = cm.col_sum(cls)
        support = cm.row_sum(cls)
        precision = tp / pred if pred else 0.0
        recall = tp / support if support else 0.0
        per_class[cls] = {
            "precision": precision,
            "recall": recall,
            "f1": _f1(precision, recall),
            "support": support,
        }

    macro = sum(v["f1"] for v in per_class.values()) / len(REAL_CLASSES)
    total_support = sum(v["support"] for v in per_class.values())
    weighted = (
        sum(v["f1"] * v["support"] for v in per_class.values()) / total_support
        if total_support
        else 0.0
    )
    return cm, macro, weighted, per_class
