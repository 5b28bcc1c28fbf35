"""Document classification against a coordinate matrix.

Every matrix row is searched once in the test document. The nearest
occurrence's Manhattan distance to the trained position is clamped to the
maximum penalty (a missing keyword costs exactly the penalty), distances are
averaged per class, and the first class whose mean is strictly below the
running minimum (initialised to the penalty) wins. No class below the penalty
means the document is rejected.
"""

import logging
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import metrics
from .config import ClassifierConfig
from .errors import InputError
from .model import Coord, Document, manhattan
from .registry import CoordinateMatrix, MatrixRow, find_keyword_occurrences

logger = logging.getLogger(__name__)

REJECTED = "REJECTED"


@dataclass(frozen=True)
class KeywordDistance:
    """Clamped distance of one matrix row to its nearest counterpart in a document."""
    class_id: str
    keyword: str
    distance: int
    found: bool
    matched_coord: Optional[Coord] = None


@dataclass(frozen=True)
class ClassScore:
    class_id: str
    mean_distance: Fraction
    breakdown: Tuple[KeywordDistance, ...]

    @property
    def total_distance(self) -> int:
        return sum(kd.distance for kd in self.breakdown)


@dataclass(frozen=True)
class ClassificationResult:
    """Predicted class (None when rejected), its score Δ and every class's score."""
    predicted: Optional[str]
    score: Fraction
    scores: Tuple[ClassScore, ...]
    max_penalty: int
    searches: int = field(default=0, compare=False)

    @property
    def rejected(self) -> bool:
        return self.predicted is None

    @property
    def label(self) -> str:
        return REJECTED if self.predicted is None else self.predicted

    def score_for(self, class_id: str) -> ClassScore:
        for class_score in self.scores:
            if class_score.class_id == class_id:
                return class_score
        raise KeyError(class_id)

    def margin(self) -> Optional[Fraction]:
        """Distance between the winning mean and the best other mean."""
        if self.predicted is None or len(self.scores) < 2:
            return None
        others = [s.mean_distance for s in self.scores if s.class_id != self.predicted]
        return min(others) - self.score


@dataclass(frozen=True)
class Measurement:
    """Nearest occurrence of a row's keyword, before clamping."""
    row: MatrixRow
    nearest: Optional[Coord] = None
    distance: Optional[int] = None

    def clamp(self, max_penalty: int) -> KeywordDistance:
        if self.nearest is None:
            return KeywordDistance(self.row.class_id, self.row.keyword, max_penalty, False, None)
        return KeywordDistance(
            self.row.class_id, self.row.keyword, min(self.distance, max_penalty), True, self.nearest
        )


def format_score(value: Fraction) -> str:
    """Integer when exact, otherwise 4 decimal places (round half even)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    with localcontext() as ctx:
        ctx.prec = 50
        decimal = Decimal(value.numerator) / Decimal(value.denominator)
        return str(decimal.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def _measure_row(row: MatrixRow, doc: Document, cfg: ClassifierConfig) -> Measurement:
    best: Optional[Tuple[int, Coord]] = None
    for coord in find_keyword_occurrences(doc, row.keyword, cfg):
        distance = manhattan(row.coord, coord)
        # occurrences arrive in reading order, so ties keep the earliest
        if best is None or distance < best[0]:
            best = (distance, coord)
    if best is None:
        return Measurement(row)
    return Measurement(row, nearest=best[1], distance=best[0])


def keyword_distance(row: MatrixRow, doc: Document, cfg: ClassifierConfig) -> KeywordDistance:
    """Clamped distance from ``row`` to its nearest occurrence in ``doc``."""
    return _measure_row(row, doc, cfg).clamp(cfg.max_penalty)


def measure(matrix: CoordinateMatrix, doc: Document, cfg: ClassifierConfig) -> Tuple[Measurement, ...]:
    """Search every matrix row once; one measurement per row, in matrix order."""
    measurements = tuple(_measure_row(row, doc, cfg) for row in matrix.rows)
    metrics.keyword_searches_total.inc(len(measurements))
    return measurements


def score(matrix: CoordinateMatrix, measurements: Sequence[Measurement], max_penalty: int,
          searches: int = 0) -> ClassificationResult:
    """Clamp, average per class and pick the winner for one penalty value."""
    if len(measurements) != len(matrix):
        raise InputError(f"expected {len(matrix)} measurements, got {len(measurements)}")
    if max_penalty < 1:
        raise InputError(f"max_penalty must be >= 1, got {max_penalty}")

    scores: List[ClassScore] = []
    predicted: Optional[str] = None
    best = Fraction(max_penalty)
    for class_id, start, end in matrix.class_spans():
        breakdown = tuple(m.clamp(max_penalty) for m in measurements[start:end])
        mean = Fraction(sum(kd.distance for kd in breakdown), len(breakdown))
        scores.append(ClassScore(class_id, mean, breakdown))
        if mean < best:
            predicted, best = class_id, mean

    return ClassificationResult(predicted, best, tuple(scores), max_penalty, searches)


def classify(matrix: CoordinateMatrix, doc: Document, cfg: ClassifierConfig) -> ClassificationResult:
    """Classify ``doc`` against every class of ``matrix``."""
    if not matrix.rows:
        raise InputError("cannot classify against an empty coordinate matrix")

    started = time.perf_counter()
    measurements = measure(matrix, doc, cfg)
    result = score(matrix, measurements, cfg.max_penalty, searches=len(measurements))
    metrics.classify_seconds.observe(time.perf_counter() - started)
    metrics.classifications_total.labels(outcome='rejected' if result.rejected else 'classified').inc()

    logger.debug(f"{doc.id}: {result.label} (score {format_score(result.score)}, {result.searches} searches)")
    return result


def explain(result: ClassificationResult) -> str:
    """Human-readable per-keyword and per-class breakdown of ``result``."""
    theta = result.max_penalty
    lines = [f"Classification report (maximum penalty {theta})", "=" * 80]
    if result.rejected:
        lines.append(f"Predicted: {REJECTED} (no class below θ = {theta})")
    else:
        lines.append(f"Predicted: {result.predicted}")
    lines.append(f"Score: {format_score(result.score)}")
    margin = result.margin()
    if margin is not None:
        lines.append(f"Margin: {format_score(margin)} (to the next best class)")

    breakdown = [kd for class_score in result.scores for kd in class_score.breakdown]
    class_width = max([len("Class")] + [len(s.class_id) for s in result.scores])
    keyword_width = max([len("Keyword")] + [len(kd.keyword) for kd in breakdown])

    lines.append("-" * 80)
    lines.append(f"{'Class':<{class_width}}  {'Keyword':<{keyword_width}}  {'Distance':>8}  Found  Matched at")
    for kd in breakdown:
        matched = f"({kd.matched_coord.top}, {kd.matched_coord.left})" if kd.matched_coord else "-"
        lines.append(
            f"{kd.class_id:<{class_width}}  {kd.keyword:<{keyword_width}}  {kd.distance:>8}  "
            f"{'yes' if kd.found else 'no':<5}  {matched}"
        )

    lines.append("-" * 80)
    lines.append(f"{'Class':<{class_width}}  {'Mean':>10}")
    for class_score in result.scores:
        marker = "  <" if class_score.class_id == result.predicted else ""
        lines.append(f"{class_score.class_id:<{class_width}}  {format_score(class_score.mean_distance):>10}{marker}")
    return "\n".join(lines) + "\n"
