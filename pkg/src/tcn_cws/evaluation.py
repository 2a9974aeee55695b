"""Word-level precision / recall / F1 and throughput measurement."""

import time
from dataclasses import dataclass

from .corpus import split_words
from .errors import EvaluationError, MeasurementError


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int
    sentences_per_second: float = None

    def machine_line(self):
        return (
            f"P={self.precision!r} R={self.recall!r} F={self.f1!r} "
            f"gold={self.gold} pred={self.predicted} correct={self.correct}"
        )

    def human(self):
        text = (
            f"precision {self.precision * 100:.2f}  recall {self.recall * 100:.2f}  "
            f"F1 {self.f1 * 100:.2f}\n"
            f"gold words {self.gold}, predicted words {self.predicted}, correct {self.correct}"
        )
        if self.sentences_per_second is not None:
            text += f"\n{self.sentences_per_second:.1f} sentences/s"
        return text


def word_spans(words):
    spans = set()
    start = 0
    for w in words:
        spans.add((start, start + len(w)))
        start += len(w)
    return spans


def count_matches(gold_words, pred_words):
    gold = word_spans(gold_words)
    pred = word_spans(pred_words)
    return len(gold), len(pred), len(gold & pred)


def report_from_counts(gold, predicted, correct):
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return EvalReport(p, r, f, gold, predicted, correct)


def f1_score(gold_lines, pred_lines):
    """Score predicted segmentations against gold ones, line by line.

    Lines are whitespace-segmented strings. Words are compared as character
    offset spans, so a repeated word only matches at its own position.
    """
    gold_lines = list(gold_lines)
    pred_lines = list(pred_lines)
    if len(gold_lines) != len(pred_lines):
        raise EvaluationError(
            f"gold has {len(gold_lines)} lines but prediction has {len(pred_lines)}"
        )
    n_gold = n_pred = n_correct = 0
    for lineno, (g, p) in enumerate(zip(gold_lines, pred_lines), 1):
        gw, pw = split_words(g), split_words(p)
        if "".join(gw) != "".join(pw):
            raise EvaluationError("character streams differ", line=lineno)
        a, b, c = count_matches(gw, pw)
        n_gold += a
        n_pred += b
        n_correct += c
    return report_from_counts(n_gold, n_pred, n_correct)


def throughput(sentences, elapsed):
    """Sentences per second for a timed pass."""
    if elapsed <= 0:
        raise MeasurementError("elapsed time must be positive")
    return sentences / elapsed


class Stopwatch:
    """Accumulating wall-clock timer; only time spent inside ``with`` counts."""

    def __init__(self):
        self.elapsed = 0.0

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed += time.perf_counter() - self._start
        return False
