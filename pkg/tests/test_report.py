"""Tests for result renderings."""

from fractions import Fraction

import pytest

from cm2.classifier import classify
from cm2.errors import InputError
from cm2.evaluate import LabeledDoc, evaluate, penalty_sweep
from cm2.registry import CoordinateMatrix, MatrixRow
from cm2.model import Coord
from cm2.report import (
    confusion_csv,
    eval_text,
    format_fixed,
    format_struct,
    format_text,
    parse_struct,
    per_class_csv,
    sweep_csv,
)

from tests.conftest import make_doc


class TestClassificationOutput:
    """Test single-document renderings."""

    def test_text(self, golden_matrix, test_doc, cfg):
        assert format_text(classify(golden_matrix, test_doc, cfg)) == "Statement B 3\n"

    def test_text_rejected(self, golden_matrix, cfg):
        assert format_text(classify(golden_matrix, make_doc("empty", []), cfg)) == "REJECTED 200\n"

    def test_struct_lines(self, golden_matrix, test_doc, cfg):
        lines = format_struct(classify(golden_matrix, test_doc, cfg)).splitlines()

        assert lines[:6] == [
            "predicted=Statement B",
            "rejected=false",
            "score=3",
            "score.exact=3",
            "theta=200",
            "classes=2",
        ]
        assert "class.2.keyword.1.distance=4" in lines
        assert "class.1.keyword.2.found=false" in lines
        assert "class.1.keyword.2.top=" in lines

    @pytest.mark.parametrize("doc_fixture", ["test_doc", "statement_a", "statement_b"])
    def test_struct_parses_back(self, golden_matrix, cfg, doc_fixture, request):
        result = classify(golden_matrix, request.getfixturevalue(doc_fixture), cfg)
        assert parse_struct(format_struct(result)) == result

    def test_struct_keeps_fractions_and_odd_names(self, cfg):
        matrix = CoordinateMatrix((
            MatrixRow("multi\nline\\class", "a", Coord(0, 0)),
            MatrixRow("multi\nline\\class", "b", Coord(0, 0)),
            MatrixRow("multi\nline\\class", "d", Coord(0, 0)),
        ))
        doc = make_doc("d", [("a", 0, 1, 10), ("b", 0, 500, 10)])
        result = classify(matrix, doc, cfg)

        text = format_struct(result)
        assert "score=133.6667" in text
        assert "score.exact=401/3" in text
        assert parse_struct(text) == result

    def test_struct_rejected(self, golden_matrix, cfg):
        result = classify(golden_matrix, make_doc("empty", []), cfg)
        parsed = parse_struct(format_struct(result))
        assert parsed.rejected and parsed.score == 200

    def test_parse_struct_errors(self):
        with pytest.raises(InputError):
            parse_struct("predicted\n")
        with pytest.raises(InputError):
            parse_struct("predicted=x\n")


class TestEvaluationOutput:
    """Test evaluation renderings."""

    @pytest.fixture
    def report(self, golden_matrix, statement_a, test_doc, cfg):
        test_set = [
            LabeledDoc(statement_a, "Statement A"),
            LabeledDoc(test_doc, "Statement B"),
            LabeledDoc(make_doc("blank", []), "Statement B"),
        ]
        return evaluate(golden_matrix, test_set, cfg)

    def test_format_fixed(self):
        assert format_fixed(Fraction(1)) == "1.0000"
        assert format_fixed(Fraction(2, 3)) == "0.6667"
        assert format_fixed(Fraction(1, 20000)) == "0.0000"
        assert format_fixed(Fraction(1, 8), places=2) == "0.12"

    def test_per_class_csv(self, report):
        assert per_class_csv(report) == (
            "class_id,precision,recall,f1,support\n"
            "Statement A,1.0000,1.0000,1.0000,1\n"
            "Statement B,1.0000,0.5000,0.6667,2\n"
        )

    def test_confusion_csv(self, report):
        assert confusion_csv(report) == (
            "true_class,predicted,count\n"
            "Statement A,Statement A,1\n"
            "Statement B,REJECTED,1\n"
            "Statement B,Statement B,1\n"
        )

    def test_eval_text(self, report):
        text = eval_text(report)

        assert text.startswith("Evaluation report (maximum penalty 200)\n")
        assert "Micro F:   0.6667" in text
        assert "Macro F:   0.8333" in text
        assert "blank: Statement B -> REJECTED" in text

    def test_sweep_csv(self, golden_matrix, test_doc, cfg):
        reports = penalty_sweep(golden_matrix, [LabeledDoc(test_doc, "Statement B")], [2, 3, 200], cfg)

        assert sweep_csv(reports) == (
            "theta,micro_f,macro_f\n"
            "2,0.0000,0.0000\n"
            "3,1.0000,1.0000\n"
            "200,1.0000,1.0000\n"
        )
