"""
Exact nearest labeled sentence search.

Labeled vectors are sorted by sentence id and L2-normalized once, so a block
of queries reduces to one matrix product followed by a row-wise maximum.
Cosines within config.NEIGHBOR_TIE_EPSILON of the row maximum count as tied,
and the lexicographically smallest id among them wins. Collinear labeled
vectors at different scales therefore resolve the same way in both search
modes even when rounding separates their cosines by an ulp or two.
"""

from typing import Iterable, List, Sequence, Tuple

import numpy as np

import config
from modules.errors import ValidationError
from modules.interfaces import SentenceVector
from modules.sentence_encoder import cosine_similarity


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
    out = np.zeros_like(matrix)
    nonzero = norms > 0
    out[nonzero] = matrix[nonzero] / norms[nonzero, None]
    return out


def _first_within(scores: np.ndarray, epsilon: float) -> np.ndarray:
    """Per row, the first column whose score is within epsilon of the row maximum."""
    best = scores.max(axis=1, keepdims=True)
    return np.argmax(scores >= best - epsilon, axis=1)
class LabeledIndex:
    """Blocked brute-force cosine index over non-empty labeled sentence vectors."""

    def __init__(self, labeled: Iterable[SentenceVector], block_size: int = None):
        items = sorted(labeled, key=lambda v: v.sentence_id)
        empties = [v.sentence_id for v in items if v.empty]
        if empties:
            raise ValidationError(f"labeled index cannot hold empty vectors: {', '.join(empties[:10])}")
        ids = [v.sentence_id for v in items]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate labeled sentence ids")
        if not items:
            raise ValidationError("labeled set is empty")

        self.ids: Tuple[str, ...] = tuple(ids)
        self.raw = np.vstack([np.asarray(v.vector, dtype=np.float64) for v in items])
        self.normalized = _normalize_rows(self.raw)
        self.normalized.setflags(write=False)
        self.block_size = block_size or config.PROPAGATION_BATCH_SIZE

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dimension(self) -> int:
        return self.raw.shape[1]

    def _check_queries(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        if queries.shape[1] != self.dimension:
            raise ValidationError(f"dimension mismatch: query {queries.shape[1]} vs index {self.dimension}")
        if not np.all(np.any(queries != 0.0, axis=1)):
            raise ValidationError("empty query vector")
        return queries

    def nearest_batch(self, queries: np.ndarray) -> Tuple[List[str], np.ndarray]:
        queries = _normalize_rows(self._check_queries(queries))
        positions = np.empty(len(queries), dtype=np.int64)
        similarities = np.empty(len(queries), dtype=np.float64)
        for start in range(0, len(queries), self.block_size):
            block = queries[start:start + self.block_size]
            scores = block @ self.normalized.T
            best = _first_within(scores, config.NEIGHBOR_TIE_EPSILON)
            positions[start:start + len(block)] = best
            similarities[start:start + len(block)] = scores[np.arange(len(block)), best]
        np.clip(similarities, -1.0, 1.0, out=similarities)
        return [self.ids[p] for p in positions], similarities

    def nearest(self, query: np.ndarray) -> Tuple[str, float]:
        ids, sims = self.nearest_batch(query)
        return ids[0], float(sims[0])


class ExhaustiveIndex(LabeledIndex):
    """Reference path: a plain double loop over cosine_similarity.

    Slow; used to generate golden files and as the oracle for LabeledIndex.
    """

    def nearest_batch(self, queries: np.ndarray) -> Tuple[List[str], np.ndarray]:
        queries = self._check_queries(queries)
        ids = []
        sims = np.empty(len(queries), dtype=np.float64)
        for q, query in enumerate(queries):
            scores = [cosine_similarity(query, vector) for vector in self.raw]
            best_sim = max(scores)
            for position, sim in enumerate(scores):
                if sim >= best_sim - config.NEIGHBOR_TIE_EPSILON:
                    break
            ids.append(self.ids[position])
            sims[q] = sim
        return ids, sims


def build_index(labeled: Iterable[SentenceVector], search: str = None, block_size: int = None) -> LabeledIndex:
    search = (search or config.NEIGHBOR_SEARCH).lower()
    if search not in config.NEIGHBOR_SEARCH_MODES:
        raise ValidationError(f"unknown neighbor search '{search}', expected one of {config.NEIGHBOR_SEARCH_MODES}")
    cls = ExhaustiveIndex if search == "exhaustive" else LabeledIndex
    return cls(labeled, block_size=block_size)


def nearest_labeled(s: SentenceVector, labeled) -> Tuple[str, float]:
    """
    The labeled sentence with the highest raw cosine to s.

    Args:
        s: Non-empty query vector
        labeled: A LabeledIndex, or any iterable of SentenceVector

    Returns:
        (neighbor_id, raw cosine); near-ties go to the smallest id

    Raises:
        ValidationError: empty labeled set or empty query vector
    """
    if s.empty:
        raise ValidationError(f"empty query vector for sentence '{s.sentence_id}'")
    index = labeled if isinstance(labeled, LabeledIndex) else LabeledIndex(labeled)
    return index.nearest(s.vector)


def nearest_exhaustive(query: np.ndarray, labeled: Sequence[SentenceVector]) -> Tuple[str, float]:
    """Brute-force oracle without the sorted/normalized index."""
    return ExhaustiveIndex(labeled).nearest(query)
