"""Tests for evaluation metrics and the maximum penalty sweep."""

import itertools
import random
from fractions import Fraction

import pytest
from sklearn.metrics import f1_score, precision_recall_fscore_support

from cm2.classifier import REJECTED
from cm2.config import ClassifierConfig
from cm2.errors import InputError
from cm2.evaluate import LabeledDoc, Prediction, build_report, evaluate, penalty_sweep
from cm2.model import Coord
from cm2.registry import CoordinateMatrix, MatrixRow, build_matrix
from cm2.synth import SynthSpec, gen_corpus

from tests.conftest import make_doc


_doc_ids = itertools.count(1)


def labeled(true_class, *words):
    return LabeledDoc(make_doc(f"{true_class}-{next(_doc_ids)}", words), true_class)


@pytest.fixture
def three_class_matrix():
    return CoordinateMatrix((
        MatrixRow("x", "alpha", Coord(100, 100)),
        MatrixRow("y", "beta", Coord(1000, 1000)),
        MatrixRow("z", "gamma", Coord(2000, 2000)),
    ))


@pytest.fixture
def three_class_test_set():
    return [
        labeled("x", ("Alpha", 100, 100, 80)),
        labeled("x", ("Alpha", 105, 100, 80)),
        labeled("x", ("Beta", 1000, 1000, 80)),
        labeled("y", ("Beta", 1000, 1000, 80)),
        labeled("y"),
        labeled("z", ("Gamma", 2000, 2000, 80)),
        labeled("z", ("Alpha", 100, 100, 80)),
    ]


def small_corpus(**overrides):
    values = dict(n_templates=6, instances_per_template=5, distractor_words=15, seed=7)
    values.update(overrides)
    return gen_corpus(SynthSpec(**values))


def without_theta(report):
    return report.micro_f, report.macro_f, report.per_class, report.confusion


class TestEvaluate:
    """Test metric computation."""

    def test_hand_computed_confusion(self, three_class_matrix, three_class_test_set, cfg):
        report = evaluate(three_class_matrix, three_class_test_set, cfg)

        assert report.confusion == {
            ("x", "x"): 2, ("x", "y"): 1,
            ("y", REJECTED): 1, ("y", "y"): 1,
            ("z", "x"): 1, ("z", "z"): 1,
        }
        x, y, z = report.per_class["x"], report.per_class["y"], report.per_class["z"]
        assert (x.precision, x.recall, x.f1, x.support) == (Fraction(2, 3), Fraction(2, 3), Fraction(2, 3), 3)
        assert (y.precision, y.recall, y.f1, y.support) == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 2)
        assert (z.precision, z.recall, z.f1, z.support) == (Fraction(1), Fraction(1, 2), Fraction(2, 3), 2)
        assert report.micro_f == report.accuracy == Fraction(4, 7)
        assert report.macro_f == Fraction(11, 18)
        assert report.rejected == 1
        assert report.n_documents == 7
        assert report.theta == 200

    def test_matches_sklearn(self, three_class_matrix, three_class_test_set, cfg):
        report = evaluate(three_class_matrix, three_class_test_set, cfg)
        y_true = [p.true_class for p in report.predictions]
        y_pred = [p.predicted for p in report.predictions]

        assert float(report.micro_f) == pytest.approx(f1_score(y_true, y_pred, average="micro"))
        assert float(report.macro_f) == pytest.approx(
            f1_score(y_true, y_pred, labels=["x", "y", "z"], average="macro")
        )

    def test_perfect_predictions(self, golden_matrix, statement_a, statement_b, test_doc, cfg):
        test_set = [
            LabeledDoc(statement_a, "Statement A"),
            LabeledDoc(statement_b, "Statement B"),
            LabeledDoc(test_doc, "Statement B"),
        ]
        report = evaluate(golden_matrix, test_set, cfg)

        assert report.micro_f == report.macro_f == 1
        assert all(m.f1 == 1 for m in report.per_class.values())

    def test_all_rejected(self, golden_matrix, cfg):
        test_set = [LabeledDoc(make_doc("e1", []), "Statement A"), LabeledDoc(make_doc("e2", []), "Statement B")]
        report = evaluate(golden_matrix, test_set, cfg)

        assert report.micro_f == 0
        assert report.rejected == 2
        assert all(m.recall == 0 for m in report.per_class.values())

    def test_supports_sum_to_corpus_size(self, three_class_matrix, three_class_test_set, cfg):
        report = evaluate(three_class_matrix, three_class_test_set, cfg)
        assert sum(m.support for m in report.per_class.values()) == len(three_class_test_set)

    def test_empty_test_set(self, golden_matrix, cfg):
        with pytest.raises(InputError):
            evaluate(golden_matrix, [], cfg)

    def test_unknown_true_class(self, golden_matrix, test_doc, cfg):
        with pytest.raises(InputError, match="Statement C"):
            evaluate(golden_matrix, [LabeledDoc(test_doc, "Statement C")], cfg)

    def test_labeled_doc_needs_class(self, test_doc):
        with pytest.raises(InputError):
            LabeledDoc(test_doc, "")

    def test_parallel_matches_sequential(self, cfg):
        corpus = small_corpus()
        matrix = build_matrix(corpus.templates, cfg)

        sequential = evaluate(matrix, corpus.test_set, cfg, workers=1)
        parallel = evaluate(matrix, corpus.test_set, cfg, workers=4)

        assert parallel == sequential
        assert parallel.predictions == sequential.predictions


class TestBuildReport:
    """Compare aggregation against scikit-learn on arbitrary predictions."""

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_random_predictions(self, seed):
        rng = random.Random(seed)
        classes = ["a", "b", "c", "d", "e"]
        predictions = []
        for i in range(200):
            true = rng.choice(classes[:4])
            predicted = rng.choice(classes + [REJECTED])
            predictions.append(Prediction(f"doc{i}", true, predicted, Fraction(0)))

        report = build_report(classes, predictions, 200)
        y_true = [p.true_class for p in predictions]
        y_pred = [p.predicted for p in predictions]
        supported = sorted(set(y_true))

        assert float(report.micro_f) == pytest.approx(f1_score(y_true, y_pred, average="micro"))
        assert float(report.macro_f) == pytest.approx(
            f1_score(y_true, y_pred, labels=supported, average="macro")
        )
        precision, recall, f1, support = precision_recall_fscore_support(
            y_true, y_pred, labels=supported, average=None, zero_division=0
        )
        for i, class_id in enumerate(supported):
            metrics = report.per_class[class_id]
            assert float(metrics.precision) == pytest.approx(precision[i])
            assert float(metrics.recall) == pytest.approx(recall[i])
            assert float(metrics.f1) == pytest.approx(f1[i])
            assert metrics.support == support[i]

    def test_predicted_only_class_has_no_support(self):
        predictions = [
            Prediction("d1", "a", "a", Fraction(0)),
            Prediction("d2", "a", "b", Fraction(0)),
        ]
        report = build_report(["a", "b"], predictions, 200)

        assert report.per_class["b"].support == 0
        assert report.per_class["b"].precision == 0
        assert report.macro_f == report.per_class["a"].f1 == Fraction(2, 3)


class TestPenaltySweep:
    """Test evaluation across maximum penalties."""

    def test_singleton_matches_evaluate(self, cfg):
        corpus = small_corpus()
        matrix = build_matrix(corpus.templates, cfg)

        [swept] = penalty_sweep(matrix, corpus.test_set, [200], cfg)
        direct = evaluate(matrix, corpus.test_set, cfg)

        assert swept == direct
        assert swept.predictions == direct.predictions

    def test_small_penalty_hurts_on_jittered_corpus(self, cfg):
        corpus = small_corpus(jitter=20)
        matrix = build_matrix(corpus.templates, cfg)

        low, high = penalty_sweep(matrix, corpus.test_set, [10, 200], cfg)

        assert (low.theta, high.theta) == (10, 200)
        assert low.micro_f < high.micro_f

    def test_penalties_beyond_page_size_agree(self, cfg):
        corpus = small_corpus(drop_prob=0.0)
        matrix = build_matrix(corpus.templates, cfg)

        low, high = penalty_sweep(matrix, corpus.test_set, [6000, 7000], cfg)

        assert without_theta(low) == without_theta(high)

    def test_one_report_per_penalty(self, cfg):
        corpus = small_corpus(n_templates=3, instances_per_template=2)
        matrix = build_matrix(corpus.templates, cfg)

        reports = penalty_sweep(matrix, corpus.test_set, [10, 50, 100, 200, 300, 500], cfg, workers=2)

        assert [r.theta for r in reports] == [10, 50, 100, 200, 300, 500]

    @pytest.mark.parametrize("thetas", [[], [200, 100], [100, 100], [0, 10], [1.5]])
    def test_invalid_penalties(self, golden_matrix, test_doc, cfg, thetas):
        with pytest.raises(InputError):
            penalty_sweep(golden_matrix, [LabeledDoc(test_doc, "Statement B")], thetas, cfg)


class TestDefaultCorpus:
    """One-shot accuracy on the full-size synthetic corpus."""

    def test_micro_f_at_default_penalty(self):
        corpus = gen_corpus(SynthSpec(seed=42))
        cfg = ClassifierConfig(max_penalty=200)
        matrix = build_matrix(corpus.templates, cfg)

        report = evaluate(matrix, corpus.test_set, cfg, workers=4)

        assert matrix.n_classes == 53
        assert report.n_documents == 530
        assert report.micro_f >= Fraction(99, 100)
