"""
Tests for P/R AUC, sentence cosine and the DS false-positive ratio.
"""

import csv
import json

import numpy as np
import pytest

from modules.corpus import attach_scores, read_corpus
from modules.crowdtruth_metrics import load_quality_scores
from modules.errors import JoinError, ValidationError
from modules.evaluation import (
    Evaluator,
    cosine_eval,
    cosine_histogram,
    false_positive_ratio,
    join_scores,
    load_gold,
    pr_curve,
    read_score_records,
    write_eval_report,
    write_summary,
)
from modules.interfaces import CorpusSentence, ScoredPair
from tests.utils.fixture_loader import load_fixture

CASES = load_fixture("evaluation_cases.json")
PR_CASES = CASES["pr_cases"]
COSINE_CASES = CASES["cosine_cases"]
FP_CASES = CASES["fp_ratio_cases"]


def _pairs(predicted, gold):
    return [ScoredPair(f"s{i}", 0, float(p), float(g)) for i, (p, g) in enumerate(zip(predicted, gold))]


def _vector(inventory, scores):
    row = [0.0] * 16
    for name, value in scores.items():
        row[inventory.index(name)] = value
    return tuple(row)


def _write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return str(path)


class TestPRCurve:

    @pytest.mark.parametrize("case", PR_CASES, ids=[c["name"] for c in PR_CASES])
    def test_hand_values(self, case):
        curve, auc = pr_curve(_pairs(case["predicted"], case["gold"]), case["gold_threshold"])
        numerator, denominator = case["auc"]
        assert auc == pytest.approx(numerator / denominator, abs=1e-9)
        assert len(curve) == len(case["curve"])
        for point, (threshold, precision, recall) in zip(curve, case["curve"]):
            assert point.threshold == pytest.approx(threshold, abs=1e-12)
            assert point.precision == pytest.approx(precision, abs=1e-9)
            assert point.recall == pytest.approx(recall, abs=1e-9)

    def test_recall_non_increasing_and_full_at_lowest_cut(self):
        rng = np.random.default_rng(5)
        predicted, gold = rng.random(200), rng.random(200)
        curve, auc = pr_curve(_pairs(predicted, gold))
        recalls = [p.recall for p in curve]
        assert recalls[0] == 1.0
        assert all(a >= b for a, b in zip(recalls, recalls[1:]))
        assert 0.0 <= auc <= 1.0
        assert all(0.0 <= p.precision <= 1.0 for p in curve)

    def test_invariant_under_monotone_transform_and_permutation(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            predicted = rng.random(100)
            gold = rng.random(100)
            _, auc = pr_curve(_pairs(predicted, gold))
            _, transformed = pr_curve(_pairs(predicted ** 3 * 0.5, gold))
            order = rng.permutation(100)
            shuffled = [_pairs(predicted, gold)[i] for i in order]
            _, permuted = pr_curve(shuffled)
            assert transformed == pytest.approx(auc, abs=1e-12)
            assert permuted == pytest.approx(auc, abs=1e-12)

    def test_no_gold_positive(self):
        with pytest.raises(ValidationError, match="no gold positives"):
            pr_curve(_pairs([0.9, 0.1], [0.1, 0.2]))

    def test_empty(self):
        with pytest.raises(ValidationError):
            pr_curve([])

    def test_duplicate_pairs(self):
        pairs = _pairs([0.9], [1.0]) * 2
        with pytest.raises(ValidationError, match="duplicate"):
            pr_curve(pairs)

    def test_threshold_range(self):
        with pytest.raises(ValidationError):
            pr_curve(_pairs([0.9], [1.0]), gold_threshold=1.0)


class TestCosineEval:

    @pytest.mark.parametrize("case", COSINE_CASES, ids=[c["name"] for c in COSINE_CASES])
    def test_hand_values(self, case, inventory):
        predictions = {"s1": _vector(inventory, case["predicted"])}
        gold = {"s1": _vector(inventory, case["gold"])}
        cosines = cosine_eval(join_scores(predictions, gold))
        assert cosines["s1"] == pytest.approx(case["cosine"], abs=1e-12)

    def test_scale_invariant(self, inventory):
        rng = np.random.default_rng(3)
        gold = {"s": tuple(rng.random(16))}
        base = tuple(rng.random(16))
        scaled = tuple(0.25 * v for v in base)
        a = cosine_eval(join_scores({"s": base}, gold))["s"]
        b = cosine_eval(join_scores({"s": scaled}, gold))["s"]
        assert a == pytest.approx(b, abs=1e-12)

    def test_missing_relations(self):
        with pytest.raises(ValidationError, match="missing relations"):
            cosine_eval([ScoredPair("s1", 0, 0.5, 0.5)])

    def test_keeps_input_order(self, inventory):
        predictions = {sid: (0.5,) * 16 for sid in ("z", "a", "m")}
        cosines = cosine_eval(join_scores(predictions, dict(predictions)))
        assert list(cosines) == ["z", "a", "m"]
        assert set(cosines.values()) == {1.0}


class TestJoin:

    def test_orphans_reported(self):
        predictions = {f"p{i}": (0.0,) * 16 for i in range(15)}
        gold = {"g1": (0.0,) * 16}
        with pytest.raises(JoinError) as excinfo:
            join_scores(predictions, gold)
        assert len(excinfo.value.missing_in_gold) == 15
        assert excinfo.value.missing_in_predictions == ["g1"]
        message = str(excinfo.value)
        assert "p9" in message and "p10" not in message

    def test_prediction_file_requires_all_relations(self, tmp_path, inventory):
        path = _write_jsonl(tmp_path / "p.jsonl", [{"id": "s1", "scores": {"origin": 0.5}}])
        with pytest.raises(ValidationError, match="missing relations"):
            read_score_records(path, inventory)

    def test_unknown_relation_rejected(self, tmp_path, inventory):
        scores = {name: 0.0 for name in inventory.named}
        scores["lives_in"] = 1.0
        path = _write_jsonl(tmp_path / "p.jsonl", [{"id": "s1", "scores": scores}])
        with pytest.raises(ValidationError, match="unknown relation"):
            read_score_records(path, inventory)


class TestGold:

    def test_gold_from_quality_json(self, inventory, toy_dir):
        gold = load_gold(str(toy_dir / "quality.json"), inventory)
        assert sorted(gold) == ["c1", "c2", "c3", "c4"]
        assert len(gold["c1"]) == 16
        assert gold["c1"][inventory.index("place_of_birth")] == 0.75

    def test_gold_from_jsonl_with_filter(self, inventory, toy_dir):
        gold = load_gold(str(toy_dir / "expected_ds_plus_crowd.jsonl"), inventory, restrict_ids=["c2", "c3"])
        assert list(gold) == ["c2", "c3"]


class TestFalsePositiveRatio:

    @pytest.mark.parametrize("case", FP_CASES, ids=[c["name"] for c in FP_CASES])
    def test_hand_values(self, case, inventory):
        r = inventory.index(case["relation"])
        crowd = []
        for i, value in enumerate(case["srs"]):
            ds = [0] * 16
            ds[r] = 1
            scores = [0.0] * 16
            scores[r] = value
            crowd.append(CorpusSentence(f"s{i}", ("a", "b"), (0, 0), (1, 1), tuple(ds), tuple(scores)))
        ratios = false_positive_ratio(crowd, case["gold_threshold"], inventory)
        assert ratios[case["relation"]] == pytest.approx(case["ratio"], abs=1e-12)
        assert ratios["title"] is None

    def test_toy_crowd(self, inventory, toy_dir):
        quality = load_quality_scores(str(toy_dir / "quality.json"), inventory)
        crowd = attach_scores(read_corpus(str(toy_dir / "crowd.jsonl"), inventory), quality.srs, inventory)
        ratios = false_positive_ratio(crowd, 0.5, inventory)
        assert ratios["origin"] == 1.0
        assert ratios["place_of_birth"] == 0.0
        assert ratios["founded_by"] == 0.0
        assert ratios["spouse"] is None

    def test_requires_srs(self, inventory, toy_dir):
        crowd = read_corpus(str(toy_dir / "crowd.jsonl"), inventory)
        with pytest.raises(ValidationError, match="carries no srs"):
            false_positive_ratio(crowd, 0.5, inventory)


class TestReports:

    def test_evaluator_and_files(self, tmp_path, inventory):
        gold = {"s1": _vector(inventory, {"origin": 1.0}), "s2": _vector(inventory, {"spouse": 0.75})}
        report = Evaluator(inventory, verbose=False).evaluate("same", dict(gold), gold)
        assert report.auc == 1.0
        assert report.mean_cosine == 1.0
        assert report.counts == {"sentences": 2, "pairs": 32, "gold_positives": 2}

        paths = write_eval_report(report, str(tmp_path), gold_threshold=0.5)
        with open(paths["pr_curve"], newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["threshold", "precision", "recall"]
        with open(paths["cosine_histogram"], newline="", encoding="utf-8") as f:
            hist = list(csv.reader(f))
        assert hist[0] == ["bin_low", "bin_high", "count"]
        assert len(hist) == 21
        assert hist[-1][2] == "2"
        data = json.loads(open(paths["report"], encoding="utf-8").read())
        assert data["system"] == "same"

        summary = tmp_path / "summary.csv"
        write_summary([report], str(summary))
        assert summary.read_text(encoding="utf-8").splitlines()[1].startswith("same,1.0,1.0,2,32")

    def test_cosine_histogram_bins(self):
        bins = cosine_histogram([0.0, 0.5, 1.0, 1.0], bins=4)
        assert [count for _, _, count in bins] == [1, 0, 1, 2]
        assert bins[0][0] == 0.0 and bins[-1][1] == 1.0
