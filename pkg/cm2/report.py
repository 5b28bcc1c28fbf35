"""Text, CSV and key=value renderings of classification and evaluation results.

All renderings are deterministic: no timestamps, LF line endings, fixed
column order.
"""

import csv
import io
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Sequence

from .classifier import REJECTED, ClassificationResult, ClassScore, KeywordDistance, format_score
from .errors import InputError
from .evaluate import EvalReport
from .model import Coord


def format_fixed(value: Fraction, places: int = 4) -> str:
    """``value`` with exactly ``places`` decimals, rounding half to even."""
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = 50
        decimal = Decimal(value.numerator) / Decimal(value.denominator)
        return str(decimal.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(value: str) -> str:
    out = []
    chars = iter(value)
    for ch in chars:
        if ch == "\\":
            nxt = next(chars, "")
            out.append({"n": "\n", "r": "\r"}.get(nxt, nxt))
        else:
            out.append(ch)
    return "".join(out)


def format_text(result: ClassificationResult) -> str:
    """One line: the predicted class (or REJECTED) and its score."""
    return f"{result.label} {format_score(result.score)}\n"


def format_struct(result: ClassificationResult) -> str:
    """Line-oriented ``key=value`` rendering that :func:`parse_struct` reads back."""
    lines = [
        f"predicted={_escape(result.label)}",
        f"rejected={'true' if result.rejected else 'false'}",
        f"score={format_score(result.score)}",
        f"score.exact={result.score}",
        f"theta={result.max_penalty}",
        f"classes={len(result.scores)}",
    ]
    for i, class_score in enumerate(result.scores, start=1):
        prefix = f"class.{i}"
        lines += [
            f"{prefix}.id={_escape(class_score.class_id)}",
            f"{prefix}.mean={format_score(class_score.mean_distance)}",
            f"{prefix}.mean.exact={class_score.mean_distance}",
            f"{prefix}.keywords={len(class_score.breakdown)}",
        ]
        for k, kd in enumerate(class_score.breakdown, start=1):
            key = f"{prefix}.keyword.{k}"
            lines += [
                f"{key}.text={_escape(kd.keyword)}",
                f"{key}.distance={kd.distance}",
                f"{key}.found={'true' if kd.found else 'false'}",
                f"{key}.top={kd.matched_coord.top if kd.matched_coord else ''}",
                f"{key}.left={kd.matched_coord.left if kd.matched_coord else ''}",
            ]
    return "\n".join(lines) + "\n"


def parse_struct(text: str) -> ClassificationResult:
    """Rebuild the ClassificationResult rendered by :func:`format_struct`."""
    fields: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"line {number}: expected key=value, got {line!r}")
        fields[key] = _unescape(value)

    try:
        scores = []
        for i in range(1, int(fields["classes"]) + 1):
            prefix = f"class.{i}"
            class_id = fields[f"{prefix}.id"]
            breakdown = []
            for k in range(1, int(fields[f"{prefix}.keywords"]) + 1):
                key = f"{prefix}.keyword.{k}"
                found = fields[f"{key}.found"] == "true"
                coord = Coord(int(fields[f"{key}.top"]), int(fields[f"{key}.left"])) if found else None
                breakdown.append(KeywordDistance(
                    class_id, fields[f"{key}.text"], int(fields[f"{key}.distance"]), found, coord
                ))
            scores.append(ClassScore(class_id, Fraction(fields[f"{prefix}.mean.exact"]), tuple(breakdown)))

        rejected = fields["rejected"] == "true"
        return ClassificationResult(
            predicted=None if rejected else fields["predicted"],
            score=Fraction(fields["score.exact"]),
            scores=tuple(scores),
            max_penalty=int(fields["theta"]),
        )
    except KeyError as e:
        raise InputError(f"structured output is missing key {e.args[0]!r}") from e
    except ValueError as e:
        raise InputError(f"structured output has an invalid value: {e}") from e


def _csv(rows: List[List[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def sweep_csv(reports: Sequence[EvalReport]) -> str:
    """``theta,micro_f,macro_f`` table, one row per report."""
    rows: List[List[object]] = [["theta", "micro_f", "macro_f"]]
    rows += [[r.theta, format_fixed(r.micro_f), format_fixed(r.macro_f)] for r in reports]
    return _csv(rows)


def per_class_csv(report: EvalReport) -> str:
    rows: List[List[object]] = [["class_id", "precision", "recall", "f1", "support"]]
    for class_id, m in report.per_class.items():
        rows.append([class_id, format_fixed(m.precision), format_fixed(m.recall), format_fixed(m.f1), m.support])
    return _csv(rows)


def confusion_csv(report: EvalReport) -> str:
    rows: List[List[object]] = [["true_class", "predicted", "count"]]
    rows += [[true, predicted, count] for (true, predicted), count in report.confusion.items()]
    return _csv(rows)


def eval_text(report: EvalReport) -> str:
    """Summary and per-class table of an evaluation run."""
    lines = [
        f"Evaluation report (maximum penalty {report.theta})",
        "=" * 80,
        f"Documents: {report.n_documents}",
        f"Rejected:  {report.rejected}",
        f"Micro F:   {format_fixed(report.micro_f)}",
        f"Macro F:   {format_fixed(report.macro_f)}",
        "-" * 80,
    ]
    width = max([len("Class")] + [len(c) for c in report.per_class])
    lines.append(f"{'Class':<{width}}  {'Precision':>9}  {'Recall':>9}  {'F1':>9}  {'Support':>7}")
    for class_id, m in report.per_class.items():
        lines.append(
            f"{class_id:<{width}}  {format_fixed(m.precision):>9}  {format_fixed(m.recall):>9}  "
            f"{format_fixed(m.f1):>9}  {m.support:>7}"
        )

    errors = [p for p in report.predictions if not p.correct]
    if errors:
        lines.append("-" * 80)
        lines.append(f"Misclassified ({len(errors)}):")
        for p in errors:
            suffix = "" if p.predicted == REJECTED else f" (score {format_score(p.score)})"
            lines.append(f"  {p.doc_id}: {p.true_class} -> {p.predicted}{suffix}")
    return "\n".join(lines) + "\n"

