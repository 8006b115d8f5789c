from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np


Span = Tuple[int, int]  # inclusive token index range


@dataclass(frozen=True)
class WorkerVector:
    """One worker's choices on one sentence, indexed by the relation inventory."""
    worker_id: str
    sentence_id: str
    choices: Tuple[int, ...]

    def picked(self, relation_index: int) -> bool:
        return self.choices[relation_index] == 1


@dataclass(frozen=True)
class QualityScores:
    """Converged crowd quality weights.

    relation_quality covers every inventory component (including `none`);
    srs rows are full inventory-length vectors keyed by sentence id.
    """
    relations: Tuple[str, ...]
    worker_quality: Dict[str, float]
    sentence_quality: Dict[str, float]
    relation_quality: Tuple[float, ...]
    srs: Dict[str, Tuple[float, ...]]
    iterations: int
    converged: bool
    srs_relation_weighting: str = "off"
    srs_unweighted: Optional[Dict[str, Tuple[float, ...]]] = None
    warnings: Tuple[str, ...] = ()
    tolerance: Optional[float] = None
    max_iterations: Optional[int] = None

    def srs_for(self, sentence_id: str) -> Optional[Tuple[float, ...]]:
        return self.srs.get(sentence_id)


@dataclass(frozen=True)
class CorpusSentence:
    sentence_id: str
    tokens: Tuple[str, ...]
    term1: Span
    term2: Span
    ds_labels: Tuple[int, ...]  # one 0/1 per named relation
    scores: Optional[Tuple[float, ...]] = None  # one real per named relation

    @property
    def ordered_spans(self) -> Tuple[Span, Span]:
        if self.term1[0] <= self.term2[0]:
            return self.term1, self.term2
        return self.term2, self.term1

    def between_tokens(self) -> Tuple[str, ...]:
        earlier, later = self.ordered_spans
        return self.tokens[earlier[1] + 1:later[0]]


@dataclass(frozen=True)
class SentenceVector:
    sentence_id: str
    vector: np.ndarray = field(repr=False)
    in_vocab_count: int
    empty: bool
    span_policy: str = "between_terms"  # policy that produced the vector (after fallback)
    fell_back: bool = False


@dataclass(frozen=True)
class PropagationResult:
    sentence_id: str
    neighbor_id: Optional[str]
    similarity: Optional[float]
    clamped_similarity: Optional[float]
    scores: Tuple[float, ...]  # DS* per named relation
    propagated: bool


@dataclass(frozen=True)
class ScoredPair:
    sentence_id: str
    relation_index: int
    predicted: float
    gold: float


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass
class EvalReport:
    system: str
    pr_curve: List[PRPoint]
    auc: float
    cosine_per_sentence: Dict[str, float]
    fp_ratio: Optional[Dict[str, Optional[float]]] = None
    counts: Dict[str, int] = field(default_factory=dict)

    @property
    def mean_cosine(self) -> float:
        if not self.cosine_per_sentence:
            return 0.0
        return float(np.mean(list(self.cosine_per_sentence.values())))


@runtime_checkable
class NeighborIndex(Protocol):
    """Exact nearest-labeled-sentence search over a fixed labeled set."""

    def __len__(self) -> int:
        ...

    def nearest(self, query: np.ndarray) -> Tuple[str, float]:
        """Return (neighbor_id, raw cosine) of the best labeled sentence."""
        ...

    def nearest_batch(self, queries: np.ndarray) -> Tuple[List[str], np.ndarray]:
        """Row-wise nearest for a (n, dim) query matrix."""
        ...


class ScoreSource(Protocol):
    """Anything that yields srs rows for crowd sentences."""

    def srs_for(self, sentence_id: str) -> Optional[Sequence[float]]:
        ...
