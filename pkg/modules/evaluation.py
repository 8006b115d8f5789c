"""
Evaluation of relation scores against crowd srs.

- micro precision/recall over sentence-relation pairs, gold positive when
  srs >= gold_threshold, with a trapezoidal P/R AUC
- per-sentence cosine between predicted and gold 16-relation vectors
- DS false-positive ratio per relation on the crowd corpus

`none` never enters a score vector.
"""

import csv
import json
import os
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import auc as trapezoid_auc

import config
from modules.base_module import BaseModule
from modules.corpus import score_vector
from modules.errors import JoinError, ValidationError
from modules.interfaces import CorpusSentence, EvalReport, PRPoint, QualityScores, ScoredPair
from modules.logging_utils import log_eval
from modules.relation_inventory import RelationInventory
from modules.sentence_encoder import cosine_similarity

ScoreTable = Dict[str, Tuple[float, ...]]


def _check_threshold(gold_threshold: float) -> None:
    if not 0.0 < gold_threshold < 1.0:
        raise ValidationError(f"gold threshold must lie in (0, 1), got {gold_threshold}")


def read_score_records(path: str, inventory: RelationInventory) -> ScoreTable:
    """
    Read a JSONL file of {"id", "scores": {relation: real}} records.

    Prediction files, propagation output and corpora with attached scores all
    fit. Every named relation must be present; `none` is ignored.
    """
    table: ScoreTable = {}
    named = set(inventory.named)
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"invalid JSON: {e.msg}", path=path, line=line_number) from None
            if not isinstance(record, dict) or "id" not in record or not isinstance(record.get("scores"), dict):
                raise ValidationError("expected an object with 'id' and a 'scores' map", path=path, line=line_number)
            sentence_id = str(record["id"])
            if sentence_id in table:
                raise ValidationError(f"duplicate sentence id '{sentence_id}'", path=path, line=line_number)
            missing = sorted(named - set(record["scores"]))
            if missing:
                raise ValidationError(
                    f"sentence '{sentence_id}' is missing relations: {', '.join(missing)}",
                    path=path,
                    line=line_number,
                )
            try:
                table[sentence_id] = score_vector(record["scores"], inventory, where=f" of '{sentence_id}'")
            except ValidationError as e:
                raise ValidationError(str(e), path=path, line=line_number) from None
    return table


def gold_from_quality(quality: QualityScores, inventory: RelationInventory) -> ScoreTable:
    named = len(inventory.named)
    return {sid: tuple(row[:named]) for sid, row in sorted(quality.srs.items())}


def load_gold(
    path: str,
    inventory: RelationInventory,
    restrict_ids: Optional[Iterable[str]] = None,
) -> ScoreTable:
    """Gold srs from a quality JSON (`srs` map) or a JSONL score file."""
    gold: Optional[ScoreTable] = None
    with open(path, "r", encoding="utf-8") as f:
        head = f.read(1)
    if head == "{":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError:
            data = None  # JSONL starts with "{" too
        if isinstance(data, dict) and "srs" in data:
            from modules.crowdtruth_metrics import load_quality_scores

            gold = gold_from_quality(load_quality_scores(path, inventory), inventory)
    if gold is None:
        gold = read_score_records(path, inventory)
    if restrict_ids is not None:
        keep = set(restrict_ids)
        gold = {sid: row for sid, row in gold.items() if sid in keep}
    return gold


def join_scores(
    predictions: ScoreTable,
    gold: ScoreTable,
    orphan_limit: int = config.EVAL_ORPHAN_LIMIT,
) -> List[ScoredPair]:
    """
    Pair every prediction with its gold srs, sentences in prediction order,
    relations in inventory order.

    Raises:
        JoinError: the two sides do not cover the same sentences
    """
    missing_in_gold = [sid for sid in predictions if sid not in gold]
    missing_in_predictions = [sid for sid in gold if sid not in predictions]
    if missing_in_gold or missing_in_predictions:
        raise JoinError(
            f"join mismatch ({len(predictions)} predicted sentences, {len(gold)} gold sentences)",
            missing_in_gold=missing_in_gold,
            missing_in_predictions=missing_in_predictions,
            limit=orphan_limit,
        )
    pairs = []
    for sentence_id, predicted in predictions.items():
        truth = gold[sentence_id]
        for relation_index, (p, g) in enumerate(zip(predicted, truth)):
            pairs.append(ScoredPair(sentence_id, relation_index, float(p), float(g)))
    return pairs


def pr_curve(pairs: Sequence[ScoredPair], gold_threshold: float = None) -> Tuple[List[PRPoint], float]:
    """
    Micro precision/recall at every distinct predicted score.

    A pair is predicted positive when its score is >= the cut, so tied
    scores enter together. AUC integrates the (recall, precision) points with
    the trapezoid rule, starting from (recall 0, precision 1).

    Returns:
        (curve ordered by ascending threshold, auc)

    Raises:
        ValidationError: empty input, duplicate pairs, or no gold positive
    """
    gold_threshold = config.GOLD_THRESHOLD if gold_threshold is None else gold_threshold
    _check_threshold(gold_threshold)
    if not pairs:
        raise ValidationError("no scored pairs to evaluate")
    keys = {(p.sentence_id, p.relation_index) for p in pairs}
    if len(keys) != len(pairs):
        raise ValidationError(f"{len(pairs) - len(keys)} duplicate (sentence, relation) pairs")

    scores = np.array([p.predicted for p in pairs], dtype=np.float64)
    labels = np.array([p.gold >= gold_threshold for p in pairs], dtype=bool)
    positives = int(labels.sum())
    if positives == 0:
        raise ValidationError(f"no gold positives at threshold {gold_threshold}: AUC undefined")

    order = np.argsort(-scores, kind="stable")
    ranked_scores = scores[order]
    ranked_labels = labels[order]
    true_positives = np.cumsum(ranked_labels)
    cuts = np.r_[np.flatnonzero(np.diff(ranked_scores)), len(ranked_scores) - 1]

    thresholds = ranked_scores[cuts]
    precision = true_positives[cuts] / (cuts + 1.0)
    recall = true_positives[cuts] / float(positives)

    area = float(trapezoid_auc(np.r_[0.0, recall], np.r_[1.0, precision]))
    curve = [
        PRPoint(float(t), float(p), float(r))
        for t, p, r in zip(thresholds[::-1], precision[::-1], recall[::-1])
    ]
    return curve, min(max(area, 0.0), 1.0)


def cosine_eval(pairs: Sequence[ScoredPair], relation_count: int = config.NAMED_RELATION_COUNT) -> Dict[str, float]:
    """
    Per-sentence cosine between predicted and gold score vectors.

    Sentences keep their input order; a zero vector on either side gives 0.

    Raises:
        ValidationError: a sentence lacks some relations
    """
    grouped: Dict[str, Dict[int, ScoredPair]] = {}
    for pair in pairs:
        grouped.setdefault(pair.sentence_id, {})[pair.relation_index] = pair

    out: Dict[str, float] = {}
    for sentence_id, by_relation in grouped.items():
        if len(by_relation) != relation_count or set(by_relation) != set(range(relation_count)):
            missing = sorted(set(range(relation_count)) - set(by_relation))
            raise ValidationError(f"sentence '{sentence_id}' is missing relations {missing}")
        predicted = [by_relation[r].predicted for r in range(relation_count)]
        gold = [by_relation[r].gold for r in range(relation_count)]
        out[sentence_id] = cosine_similarity(predicted, gold)
    return out


def cosine_histogram(values: Iterable[float], bins: int = config.COSINE_HISTOGRAM_BINS) -> List[Tuple[float, float, int]]:
    counts, edges = np.histogram(np.asarray(list(values), dtype=np.float64), bins=bins, range=(0.0, 1.0))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def false_positive_ratio(
    crowd: Iterable[CorpusSentence],
    gold_threshold: float = None,
    inventory: Optional[RelationInventory] = None,
) -> Dict[str, Optional[float]]:
    """
    Share of DS-positive crowd sentences whose srs falls below the threshold.

    Sentences must carry srs as `scores`. Relations without DS positives map
    to None.
    """
    gold_threshold = config.GOLD_THRESHOLD if gold_threshold is None else gold_threshold
    _check_threshold(gold_threshold)
    ds_positive: Optional[np.ndarray] = None
    false_positive: Optional[np.ndarray] = None
    for sentence in crowd:
        if sentence.scores is None:
            raise ValidationError(f"crowd sentence '{sentence.sentence_id}' carries no srs")
        ds = np.asarray(sentence.ds_labels, dtype=bool)
        below = np.asarray(sentence.scores) < gold_threshold
        if ds_positive is None:
            ds_positive = np.zeros(len(ds), dtype=np.int64)
            false_positive = np.zeros(len(ds), dtype=np.int64)
        ds_positive += ds
        false_positive += ds & below

    names = inventory.named if inventory is not None else tuple(str(i) for i in range(config.NAMED_RELATION_COUNT))
    ratios: Dict[str, Optional[float]] = {}
    for i, name in enumerate(names):
        if ds_positive is None or ds_positive[i] == 0:
            ratios[name] = None
        else:
            ratios[name] = float(false_positive[i]) / float(ds_positive[i])
    return ratios


class Evaluator(BaseModule):
    """Joins a prediction file with gold srs and computes all metrics."""

    def __init__(
        self,
        inventory: RelationInventory,
        gold_threshold: float = None,
        orphan_limit: int = None,
        debug: bool = False,
        verbose: bool = True,
    ):
        super().__init__(__name__, debug=debug, verbose=verbose)
        self.inventory = inventory
        self.gold_threshold = config.GOLD_THRESHOLD if gold_threshold is None else gold_threshold
        _check_threshold(self.gold_threshold)
        self.orphan_limit = orphan_limit or config.EVAL_ORPHAN_LIMIT

    def evaluate(self, system: str, predictions: ScoreTable, gold: ScoreTable) -> EvalReport:
        pairs = join_scores(predictions, gold, self.orphan_limit)
        curve, area = pr_curve(pairs, self.gold_threshold)
        cosines = cosine_eval(pairs, len(self.inventory.named))
        report = EvalReport(
            system=system,
            pr_curve=curve,
            auc=area,
            cosine_per_sentence=cosines,
            counts={
                "sentences": len(predictions),
                "pairs": len(pairs),
                "gold_positives": sum(1 for p in pairs if p.gold >= self.gold_threshold),
            },
        )
        log_eval(
            self.logger,
            f"{system}: P/R AUC={area:.3f}, mean cosine={report.mean_cosine:.3f} over {len(predictions)} sentences",
        )
        return report


def _open_csv(path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def report_to_dict(report: EvalReport, gold_threshold: float) -> dict:
    payload = {
        "system": report.system,
        "gold_threshold": gold_threshold,
        "auc": report.auc,
        "mean_cosine": report.mean_cosine,
        "counts": dict(report.counts),
        "pr_curve": [
            {"threshold": p.threshold, "precision": p.precision, "recall": p.recall} for p in report.pr_curve
        ],
        "cosine_per_sentence": dict(report.cosine_per_sentence),
    }
    if report.fp_ratio is not None:
        payload["fp_ratio"] = dict(report.fp_ratio)
    return payload


def write_eval_report(report: EvalReport, out_dir: str, gold_threshold: float, bins: int = None) -> Dict[str, str]:
    """Write <system>.report.json plus the plot-ready CSV files; returns their paths."""
    bins = bins or config.COSINE_HISTOGRAM_BINS
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "report": os.path.join(out_dir, f"{report.system}.report.json"),
        "pr_curve": os.path.join(out_dir, f"{report.system}.pr.csv"),
        "cosine": os.path.join(out_dir, f"{report.system}.cosine.csv"),
        "cosine_histogram": os.path.join(out_dir, f"{report.system}.cosine_hist.csv"),
    }
    with open(paths["report"], "w", encoding="utf-8", newline="\n") as f:
        json.dump(report_to_dict(report, gold_threshold), f, ensure_ascii=False, indent=2)
        f.write("\n")
    with _open_csv(paths["pr_curve"]) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["threshold", "precision", "recall"])
        for point in report.pr_curve:
            writer.writerow([repr(point.threshold), repr(point.precision), repr(point.recall)])
    with _open_csv(paths["cosine"]) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["sentence_id", "cosine"])
        for sentence_id, value in report.cosine_per_sentence.items():
            writer.writerow([sentence_id, repr(value)])
    with _open_csv(paths["cosine_histogram"]) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["bin_low", "bin_high", "count"])
        for low, high, count in cosine_histogram(report.cosine_per_sentence.values(), bins):
            writer.writerow([repr(low), repr(high), count])
    return paths


def write_summary(reports: Sequence[EvalReport], path: str) -> None:
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["system", "auc", "mean_cosine", "sentences", "pairs"])
        for report in reports:
            writer.writerow([
                report.system,
                repr(report.auc),
                repr(report.mean_cosine),
                report.counts.get("sentences", 0),
                report.counts.get("pairs", 0),
            ])


def write_fp_ratio(ratios: Mapping[str, Optional[float]], json_path: str, csv_path: str, gold_threshold: float) -> None:
    directory = os.path.dirname(json_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(json_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump({"gold_threshold": gold_threshold, "fp_ratio": dict(ratios)}, f, ensure_ascii=False, indent=2)
        f.write("\n")
    with _open_csv(csv_path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["relation", "fp_ratio"])
        for name, value in ratios.items():
            writer.writerow([name, "" if value is None else repr(value)])
