"""
Disagreement-aware crowd quality metrics.

Worker, sentence and relation qualities are mutually dependent and computed
as a fixed point of a synchronous (Jacobi) iteration started from all ones:

    sentence_quality(s)  weighted mean over worker pairs on s of cos(v_i, v_j),
                         pair weight wqs(i) * wqs(j)
    worker_quality(w)    weighted mean over w's shared sentences of
                         cos(v_w, sum of the other workers' vectors weighted
                         by their quality), weight sqs(s)
    relation_quality(r)  over pairs where at least one worker picked r, the
                         pair-weighted share where both did

Every update reads only the previous iteration's values, so the result does
not depend on evaluation order. The sentence-relation score (srs) is the
quality-weighted share of workers on a sentence who picked the relation.
"""

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from modules.annotations import AnnotationMatrix
from modules.base_module import BaseModule
from modules.errors import ValidationError
from modules.interfaces import QualityScores
from modules.logging_utils import log_crowd, log_warning
from modules.relation_inventory import RelationInventory


@dataclass(frozen=True)
class FixedPointConfig:
    tolerance: float = config.FIXED_POINT_TOLERANCE
    max_iterations: int = config.FIXED_POINT_MAX_ITERATIONS
    srs_relation_weighting: str = config.SRS_RELATION_WEIGHTING
    include_unweighted: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.srs_relation_weighting not in config.SRS_RELATION_WEIGHTING_MODES:
            raise ValidationError(
                f"srs_relation_weighting must be one of {config.SRS_RELATION_WEIGHTING_MODES}, "
                f"got '{self.srs_relation_weighting}'"
            )


@dataclass
class _SentenceBlock:
    sentence_id: str
    vectors: np.ndarray  # (n_workers, n_relations), rows sorted by worker id
    workers: np.ndarray  # worker positions, same order
    pair_cosines: np.ndarray  # upper-triangle pairwise cosines
    upper: Tuple[np.ndarray, np.ndarray]
    others: np.ndarray  # (n, n) mask, zero diagonal


def _cosine_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cosine; 0 where either row has zero norm.

    Uses dot / sqrt(|a|^2 |b|^2) so identical integer rows give exactly 1.0.
    """
    dots = np.einsum("ij,ij->i", a, b)
    norms = np.einsum("ij,ij->i", a, a) * np.einsum("ij,ij->i", b, b)
    out = np.zeros(len(dots))
    nonzero = norms > 0
    out[nonzero] = dots[nonzero] / np.sqrt(norms[nonzero])
    return np.clip(out, -1.0, 1.0)


def _srs_vector(
    vectors: np.ndarray,
    weights: np.ndarray,
    relation_quality: np.ndarray,
    mode: str,
) -> np.ndarray:
    # numerator and denominator share one column reduction so a relation
    # picked by every worker gives exactly 1.0
    stacked = np.column_stack([weights[:, None] * vectors, weights])
    sums = stacked.sum(axis=0)
    numerator, denominator = sums[:-1], sums[-1]
    if denominator <= 0:
        return np.zeros(vectors.shape[1])
    ratio = np.clip(numerator / denominator, 0.0, 1.0)
    if mode == "per_choice":
        ratio = ratio * relation_quality
    return ratio


class CrowdTruthMetrics(BaseModule):
    """Fixed-point worker/sentence/relation quality over an AnnotationMatrix."""

    def __init__(self, fixed_point: Optional[FixedPointConfig] = None, debug: bool = False, verbose: bool = True):
        super().__init__(__name__, debug=debug, verbose=verbose)
        self.fixed_point = fixed_point or FixedPointConfig()

    def _blocks(self, matrix: AnnotationMatrix, worker_pos: Dict[str, int]) -> List[_SentenceBlock]:
        blocks = []
        for sentence_id in matrix.sentence_ids:
            rows = sorted(matrix.sentence_index[sentence_id], key=lambda r: r.worker_id)
            vectors = np.array([r.choices for r in rows], dtype=np.float64)
            workers = np.array([worker_pos[r.worker_id] for r in rows], dtype=np.int64)
            n = len(rows)
            upper = np.triu_indices(n, k=1)
            pair_cosines = _cosine_rows(vectors[upper[0]], vectors[upper[1]])
            others = 1.0 - np.eye(n)
            blocks.append(_SentenceBlock(sentence_id, vectors, workers, pair_cosines, upper, others))
        return blocks

    def compute(self, matrix: AnnotationMatrix) -> QualityScores:
        if len(matrix) == 0:
            raise ValidationError("annotation matrix is empty")

        fp = self.fixed_point
        inventory = matrix.inventory
        worker_ids = matrix.worker_ids
        worker_pos = {w: i for i, w in enumerate(worker_ids)}
        blocks = self._blocks(matrix, worker_pos)
        n_workers, n_sentences, n_relations = len(worker_ids), len(blocks), inventory.size

        warnings: List[str] = []
        single = [b.sentence_id for b in blocks if len(b.workers) < 2]
        if single:
            warnings.append(f"{len(single)} sentences judged by a single worker (sentence quality fixed at 1)")
        shared_counts = np.zeros(n_workers, dtype=np.int64)
        for block in blocks:
            if len(block.workers) >= 2:
                np.add.at(shared_counts, block.workers, 1)
        isolated = [worker_ids[i] for i in np.flatnonzero(shared_counts == 0)]
        if isolated:
            warnings.append(f"{len(isolated)} workers share no sentence with another worker (quality fixed at 1)")
        for message in warnings:
            log_warning(self.logger, message)

        wqs = np.ones(n_workers)
        sqs = np.ones(n_sentences)
        rqs = np.ones(n_relations)
        converged = False
        iterations = 0

        for iteration in range(1, fp.max_iterations + 1):
            iterations = iteration
            new_sqs = self._sentence_step(blocks, wqs)
            new_wqs = self._worker_step(blocks, wqs, sqs, shared_counts)
            new_rqs = self._relation_step(blocks, wqs, n_relations)

            delta = max(
                float(np.max(np.abs(new_sqs - sqs))) if n_sentences else 0.0,
                float(np.max(np.abs(new_wqs - wqs))) if n_workers else 0.0,
                float(np.max(np.abs(new_rqs - rqs))),
            )
            sqs, wqs, rqs = new_sqs, new_wqs, new_rqs
            self.logger.debug(f"iteration {iteration}: max change {delta:.3e}")
            if delta < fp.tolerance:
                converged = True
                break

        if not converged:
            message = f"fixed point not reached after {iterations} iterations (tolerance {fp.tolerance:g})"
            warnings.append(message)
            log_warning(self.logger, message)

        srs: Dict[str, Tuple[float, ...]] = {}
        unweighted: Optional[Dict[str, Tuple[float, ...]]] = {} if fp.include_unweighted else None
        for block in blocks:
            row = _srs_vector(block.vectors, wqs[block.workers], rqs, fp.srs_relation_weighting)
            srs[block.sentence_id] = tuple(float(v) for v in row)
            if unweighted is not None:
                plain = block.vectors.sum(axis=0) / len(block.workers)
                unweighted[block.sentence_id] = tuple(float(v) for v in plain)

        log_crowd(
            self.logger,
            f"Quality scores: {n_workers} workers, {n_sentences} sentences, "
            f"{iterations} iterations ({'converged' if converged else 'not converged'})",
        )

        return QualityScores(
            relations=inventory.relations,
            worker_quality={w: float(wqs[i]) for i, w in enumerate(worker_ids)},
            sentence_quality={b.sentence_id: float(sqs[k]) for k, b in enumerate(blocks)},
            relation_quality=tuple(float(v) for v in rqs),
            srs=srs,
            iterations=iterations,
            converged=converged,
            srs_relation_weighting=fp.srs_relation_weighting,
            srs_unweighted=unweighted,
            warnings=tuple(warnings),
            tolerance=fp.tolerance,
            max_iterations=fp.max_iterations,
        )

    @staticmethod
    def _sentence_step(blocks: List[_SentenceBlock], wqs: np.ndarray) -> np.ndarray:
        out = np.ones(len(blocks))
        for k, block in enumerate(blocks):
            if len(block.workers) < 2:
                continue
            w = wqs[block.workers]
            pair_weights = w[block.upper[0]] * w[block.upper[1]]
            denominator = pair_weights.sum()
            if denominator > 0:
                value = (pair_weights * block.pair_cosines).sum() / denominator
            else:
                value = block.pair_cosines.mean()
            out[k] = min(max(value, 0.0), 1.0)
        return out

    @staticmethod
    def _worker_step(
        blocks: List[_SentenceBlock],
        wqs: np.ndarray,
        sqs: np.ndarray,
        shared_counts: np.ndarray,
    ) -> np.ndarray:
        numerator = np.zeros(len(wqs))
        denominator = np.zeros(len(wqs))
        plain = np.zeros(len(wqs))
        for k, block in enumerate(blocks):
            if len(block.workers) < 2:
                continue
            w = wqs[block.workers]
            aggregates = (block.others * w[None, :]) @ block.vectors
            cosines = _cosine_rows(block.vectors, aggregates)
            np.add.at(numerator, block.workers, sqs[k] * cosines)
            np.add.at(denominator, block.workers, np.full(len(cosines), sqs[k]))
            np.add.at(plain, block.workers, cosines)

        out = np.ones(len(wqs))
        shared = shared_counts > 0
        weighted = shared & (denominator > 0)
        out[weighted] = numerator[weighted] / denominator[weighted]
        fallback = shared & (denominator <= 0)
        out[fallback] = plain[fallback] / shared_counts[fallback]
        return np.clip(out, 0.0, 1.0)

    @staticmethod
    def _relation_step(blocks: List[_SentenceBlock], wqs: np.ndarray, n_relations: int) -> np.ndarray:
        numerator = np.zeros(n_relations)
        denominator = np.zeros(n_relations)
        plain_num = np.zeros(n_relations)
        plain_den = np.zeros(n_relations)
        for block in blocks:
            if len(block.workers) < 2:
                continue
            w = wqs[block.workers]
            left, right = block.vectors[block.upper[0]], block.vectors[block.upper[1]]
            pair_weights = w[block.upper[0]] * w[block.upper[1]]
            both = left * right
            either = np.maximum(left, right)
            numerator += (pair_weights[:, None] * both).sum(axis=0)
            denominator += (pair_weights[:, None] * either).sum(axis=0)
            plain_num += both.sum(axis=0)
            plain_den += either.sum(axis=0)

        out = np.ones(n_relations)
        weighted = denominator > 0
        out[weighted] = numerator[weighted] / denominator[weighted]
        fallback = ~weighted & (plain_den > 0)
        out[fallback] = plain_num[fallback] / plain_den[fallback]
        return np.clip(out, 0.0, 1.0)


def compute_quality_scores(matrix: AnnotationMatrix, fixed_point: Optional[FixedPointConfig] = None) -> QualityScores:
    return CrowdTruthMetrics(fixed_point=fixed_point, verbose=False).compute(matrix)


def sentence_relation_score(
    matrix: AnnotationMatrix,
    quality: QualityScores,
    sentence_id: str,
    relation_index: int,
    mode: Optional[str] = None,
) -> float:
    """
    srs(s, r): quality-weighted share of the workers on s who picked r.

    Returns 0.0 when every worker on the sentence has quality 0.

    Raises:
        ValidationError: unknown sentence id or relation index
    """
    rows = sorted(matrix.rows_for_sentence(sentence_id), key=lambda r: r.worker_id)
    if not 0 <= relation_index < matrix.inventory.size:
        raise ValidationError(f"relation index {relation_index} out of range")
    vectors = np.array([r.choices for r in rows], dtype=np.float64)
    weights = np.array([quality.worker_quality[r.worker_id] for r in rows])
    row = _srs_vector(
        vectors,
        weights,
        np.asarray(quality.relation_quality),
        mode or quality.srs_relation_weighting,
    )
    return float(row[relation_index])


def quality_to_dict(quality: QualityScores) -> dict:
    relations = list(quality.relations)
    payload = {
        "relations": relations,
        "iterations": quality.iterations,
        "converged": quality.converged,
        "srs_relation_weighting": quality.srs_relation_weighting,
        "tolerance": quality.tolerance,
        "max_iterations": quality.max_iterations,
        "worker_quality": {w: quality.worker_quality[w] for w in sorted(quality.worker_quality)},
        "sentence_quality": {s: quality.sentence_quality[s] for s in sorted(quality.sentence_quality)},
        "relation_quality": dict(zip(relations, quality.relation_quality)),
        "srs": {s: dict(zip(relations, quality.srs[s])) for s in sorted(quality.srs)},
    }
    if quality.srs_unweighted is not None:
        payload["srs_unweighted"] = {
            s: dict(zip(relations, quality.srs_unweighted[s])) for s in sorted(quality.srs_unweighted)
        }
    payload["warnings"] = list(quality.warnings)
    return payload


def write_quality_scores(quality: QualityScores, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(quality_to_dict(quality), f, ensure_ascii=False, indent=2)
        f.write("\n")


def load_quality_scores(path: str, inventory: RelationInventory) -> QualityScores:
    """Read a quality JSON written by write_quality_scores.

    Raises:
        InventoryMismatchError: the file was built against another inventory
        ValidationError: missing keys or malformed srs rows
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"invalid JSON: {e}", path=path) from None
    if not isinstance(data, dict):
        raise ValidationError("quality file must be a JSON object", path=path)
    for key in ("relations", "worker_quality", "sentence_quality", "relation_quality", "srs"):
        if key not in data:
            raise ValidationError(f"missing key '{key}'", path=path)

    inventory.check_same(data["relations"], source=path)
    relations = inventory.relations

    def _row(sentence_id: str, values: dict) -> Tuple[float, ...]:
        unknown = set(values) - set(relations)
        if unknown:
            raise ValidationError(
                f"srs for '{sentence_id}' names unknown relations: {', '.join(sorted(unknown))}", path=path
            )
        # relations absent from a row were picked by no one
        return tuple(float(values.get(name, 0.0)) for name in relations)

    srs = {sid: _row(sid, row) for sid, row in data["srs"].items()}
    unweighted = None
    if "srs_unweighted" in data:
        unweighted = {sid: _row(sid, row) for sid, row in data["srs_unweighted"].items()}

    return QualityScores(
        relations=relations,
        worker_quality={k: float(v) for k, v in data["worker_quality"].items()},
        sentence_quality={k: float(v) for k, v in data["sentence_quality"].items()},
        relation_quality=tuple(float(data["relation_quality"].get(name, 1.0)) for name in relations),
        srs=srs,
        iterations=int(data.get("iterations", 0)),
        converged=bool(data.get("converged", False)),
        srs_relation_weighting=data.get("srs_relation_weighting", "off"),
        srs_unweighted=unweighted,
        warnings=tuple(data.get("warnings", ())),
        tolerance=data.get("tolerance"),
        max_iterations=data.get("max_iterations"),
    )
