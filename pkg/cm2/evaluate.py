"""Evaluation of a coordinate matrix on labelled test documents.

Rejection is a predicted label of its own (``REJECTED``) that is always
wrong. Precision, recall and F1 are exact fractions; micro F equals accuracy
and macro F averages the classes that have test support.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple, TypeVar

from .classifier import REJECTED, ClassificationResult, classify, measure, score
from .config import ClassifierConfig
from .errors import InputError
from .model import Document
from .registry import CoordinateMatrix

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class LabeledDoc:
    doc: Document
    true_class: str

    def __post_init__(self):
        if not self.true_class:
            raise InputError(f"document {self.doc.id!r} has an empty true class")


@dataclass(frozen=True)
class ClassMetrics:
    precision: Fraction
    recall: Fraction
    f1: Fraction
    support: int


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    true_class: str
    predicted: str
    score: Fraction

    @property
    def correct(self) -> bool:
        return self.predicted == self.true_class


@dataclass(frozen=True)
class EvalReport:
    """Metrics of one evaluation run at penalty ``theta``."""
    micro_f: Fraction
    macro_f: Fraction
    per_class: Dict[str, ClassMetrics]
    confusion: Dict[Tuple[str, str], int]
    theta: int
    predictions: Tuple[Prediction, ...] = field(default=(), compare=False)

    @property
    def n_documents(self) -> int:
        return sum(self.confusion.values())

    @property
    def rejected(self) -> int:
        return sum(n for (_, predicted), n in self.confusion.items() if predicted == REJECTED)

    @property
    def accuracy(self) -> Fraction:
        correct = sum(n for (true, predicted), n in self.confusion.items() if true == predicted)
        return Fraction(correct, self.n_documents)


def _ratio(numerator: int, denominator: int) -> Fraction:
    return Fraction(numerator, denominator) if denominator else Fraction(0)


def build_report(class_order: Sequence[str], predictions: Sequence[Prediction], theta: int) -> EvalReport:
    """Aggregate predictions into per-class, micro and macro metrics."""
    if not predictions:
        raise InputError("cannot evaluate an empty test set")

    confusion = Counter((p.true_class, p.predicted) for p in predictions)
    support = Counter(p.true_class for p in predictions)
    predicted = Counter(p.predicted for p in predictions)
    hits = Counter(p.true_class for p in predictions if p.correct)

    seen = set(support) | (set(predicted) - {REJECTED})
    order = [c for c in class_order if c in seen] + sorted(seen - set(class_order))

    per_class = {}
    for class_id in order:
        tp = hits[class_id]
        fp = predicted[class_id] - tp
        fn = support[class_id] - tp
        per_class[class_id] = ClassMetrics(
            precision=_ratio(tp, tp + fp),
            recall=_ratio(tp, tp + fn),
            f1=_ratio(2 * tp, 2 * tp + fp + fn),
            support=support[class_id],
        )

    supported = [m.f1 for m in per_class.values() if m.support > 0]
    macro_f = sum(supported, Fraction(0)) / len(supported)
    micro_f = Fraction(sum(hits.values()), len(predictions))

    return EvalReport(
        micro_f=micro_f,
        macro_f=macro_f,
        per_class=per_class,
        confusion=dict(sorted(confusion.items())),
        theta=theta,
        predictions=tuple(predictions),
    )


def _parallel_map(fn: Callable[[LabeledDoc], T], items: Sequence[LabeledDoc], workers: int) -> List[T]:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_inputs(matrix: CoordinateMatrix, test_set: Sequence[LabeledDoc]):
    if not test_set:
        raise InputError("cannot evaluate an empty test set")
    if not matrix.rows:
        raise InputError("cannot evaluate an empty coordinate matrix")
    unknown = sorted({item.true_class for item in test_set} - set(matrix.class_order))
    if unknown:
        raise InputError(f"test set contains classes missing from the registry: {', '.join(unknown)}")


def _predictions(test_set: Sequence[LabeledDoc], results: Sequence[ClassificationResult]) -> List[Prediction]:
    return [
        Prediction(item.doc.id, item.true_class, result.label, result.score)
        for item, result in zip(test_set, results)
    ]


def evaluate(matrix: CoordinateMatrix, test_set: Sequence[LabeledDoc], cfg: ClassifierConfig,
             workers: int = 1) -> EvalReport:
    """Classify every document of ``test_set`` and aggregate the metrics."""
    _check_inputs(matrix, test_set)
    results = _parallel_map(lambda item: classify(matrix, item.doc, cfg), test_set, workers)
    report = build_report(matrix.class_order, _predictions(test_set, results), cfg.max_penalty)
    logger.info(
        f"Evaluated {report.n_documents} document(s) at max penalty {cfg.max_penalty}: "
        f"micro F {float(report.micro_f):.4f}, macro F {float(report.macro_f):.4f}, "
        f"{report.rejected} rejected"
    )
    return report


def check_thetas(thetas: Sequence[int]) -> List[int]:
    thetas = list(thetas)
    if not thetas:
        raise InputError("penalty list must not be empty")
    for theta in thetas:
        if isinstance(theta, bool) or not isinstance(theta, int) or theta < 1:
            raise InputError(f"penalties must be positive integers, got {theta!r}")
    if any(b <= a for a, b in zip(thetas, thetas[1:])):
        raise InputError(f"penalties must be strictly increasing, got {thetas}")
    return thetas


def penalty_sweep(matrix: CoordinateMatrix, test_set: Sequence[LabeledDoc], thetas: Sequence[int],
                  cfg_base: ClassifierConfig, workers: int = 1) -> List[EvalReport]:
    """One report per penalty; each document is searched once and re-scored per penalty."""
    thetas = check_thetas(thetas)
    _check_inputs(matrix, test_set)

    measurements = _parallel_map(lambda item: measure(matrix, item.doc, cfg_base), test_set, workers)
    reports = []
    for theta in thetas:
        results = [score(matrix, m, theta, searches=len(m)) for m in measurements]
        report = build_report(matrix.class_order, _predictions(test_set, results), theta)
        logger.info(f"theta={theta}: micro F {float(report.micro_f):.4f}, macro F {float(report.macro_f):.4f}")
        reports.append(report)
    return reports
