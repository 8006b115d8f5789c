"""
Semantic label propagation onto a distant-supervision corpus.

Every DS sentence takes the srs row of its most similar crowd-labeled
sentence l' and blends it into its own binary DS labels:

    DS*(s, r) = (DS(s, r) + c * srs(l', r)) / (1 + c)

with c the cosine similarity to l', clamped to [0, 1] by default. The argmax
itself uses the raw cosine. Sentences without a usable vector keep their DS
labels.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from collections import deque
from dataclasses import dataclass, field, fields
from typing import Deque, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

import config
from modules.base_module import BaseModule
from modules.embeddings import EmbeddingTable
from modules.errors import ValidationError
from modules.interfaces import CorpusSentence, NeighborIndex, PropagationResult, ScoreSource
from modules.logging_utils import log_propagate, log_warning
from modules.neighbor_index import build_index
from modules.relation_inventory import RelationInventory
from modules.sentence_encoder import sentence_vector

SrsRow = Union[Sequence[float], Mapping[int, float]]


def propagate_sentence(
    sentence: CorpusSentence,
    neighbor_srs: SrsRow,
    similarity: float,
    neighbor_id: Optional[str] = None,
    raw_similarity: Optional[float] = None,
) -> PropagationResult:
    """
    Apply the DS* blend to one sentence.

    Args:
        sentence: DS sentence (binary ds_labels over the named relations)
        neighbor_srs: srs of the chosen labeled sentence, as a sequence
            indexed by relation or a sparse {relation index: srs} map
            (absent relations count as 0)
        similarity: Weight c, normally already clamped to [0, 1]
        neighbor_id: Recorded on the result
        raw_similarity: Unclamped cosine, recorded on the result

    Returns:
        PropagationResult with a DS* score for every named relation
    """
    n = len(sentence.ds_labels)
    if isinstance(neighbor_srs, Mapping):
        srs = np.zeros(n)
        for index, value in neighbor_srs.items():
            if 0 <= index < n:
                srs[index] = value
    else:
        srs = np.zeros(n)
        values = np.asarray(neighbor_srs, dtype=np.float64)[:n]
        srs[:len(values)] = values

    ds = np.asarray(sentence.ds_labels, dtype=np.float64)
    raw = similarity if raw_similarity is None else raw_similarity
    denominator = 1.0 + similarity
    if denominator <= 0.0:
        # only reachable with the clamp disabled and a cosine of -1
        return PropagationResult(
            sentence_id=sentence.sentence_id,
            neighbor_id=neighbor_id,
            similarity=raw,
            clamped_similarity=similarity,
            scores=tuple(float(v) for v in ds),
            propagated=False,
        )
    scores = (ds + similarity * srs) / denominator
    return PropagationResult(
        sentence_id=sentence.sentence_id,
        neighbor_id=neighbor_id,
        similarity=float(raw),
        clamped_similarity=float(similarity),
        scores=tuple(float(v) for v in scores),
        propagated=True,
    )


def unpropagated(sentence: CorpusSentence) -> PropagationResult:
    return PropagationResult(
        sentence_id=sentence.sentence_id,
        neighbor_id=None,
        similarity=None,
        clamped_similarity=None,
        scores=tuple(float(v) for v in sentence.ds_labels),
        propagated=False,
    )


@dataclass
class PropagationConfig:
    threads: int = config.THREADS
    batch_size: int = config.PROPAGATION_BATCH_SIZE
    span_policy: str = config.SPAN_POLICY
    span_fallback: bool = True
    similarity_clamp: bool = config.SIMILARITY_CLAMP
    search: str = config.NEIGHBOR_SEARCH
    histogram_bins: int = config.SIMILARITY_HISTOGRAM_BINS

    def __post_init__(self):
        if self.threads < 1:
            raise ValidationError(f"thread count must be >= 1, got {self.threads}")
        if self.batch_size < 1:
            raise ValidationError(f"batch size must be >= 1, got {self.batch_size}")
        if self.histogram_bins < 1:
            raise ValidationError(f"histogram bins must be >= 1, got {self.histogram_bins}")


@dataclass
class PropagationReport:
    relations: Tuple[str, ...] = ()
    total: int = 0
    propagated: int = 0
    unpropagatable: int = 0
    fallback_whole_sentence: int = 0
    out_of_range: int = 0  # propagated rows with a score outside [0, 1] (clamp off only)
    labeled: int = 0
    excluded_crowd: List[str] = field(default_factory=list)
    histogram_edges: List[float] = field(default_factory=list)
    histogram: List[int] = field(default_factory=list)
    similarity_sum: float = 0.0
    span_policy: str = config.SPAN_POLICY
    search: str = config.NEIGHBOR_SEARCH
    similarity_clamp: bool = True

    @property
    def mean_similarity(self) -> Optional[float]:
        return self.similarity_sum / self.propagated if self.propagated else None

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "propagated": self.propagated,
            "unpropagatable": self.unpropagatable,
            "fallback_whole_sentence": self.fallback_whole_sentence,
            "out_of_range": self.out_of_range,
            "labeled": self.labeled,
            "excluded_crowd": list(self.excluded_crowd),
            "mean_similarity": self.mean_similarity,
            "similarity_histogram": {
                "edges": list(self.histogram_edges),
                "counts": list(self.histogram),
            },
            "span_policy": self.span_policy,
            "search": self.search,
            "similarity_clamp": self.similarity_clamp,
            "relations": list(self.relations),
        }


@dataclass
class _BatchOutcome:
    results: List[PropagationResult]
    fallbacks: int
    similarities: np.ndarray


class LabelPropagator(BaseModule):
    """Builds the labeled index from crowd sentences and relabels DS sentences."""

    def __init__(
        self,
        inventory: RelationInventory,
        table: EmbeddingTable,
        settings: Optional[PropagationConfig] = None,
        debug: bool = False,
        verbose: bool = True,
        show_progress: bool = False,
    ):
        super().__init__(__name__, debug=debug, verbose=verbose, show_progress=show_progress)
        self.inventory = inventory
        self.table = table
        self.settings = settings or PropagationConfig()
        self.report = self._new_report()
        self._index: Optional[NeighborIndex] = None
        self._fitted = False
        self._srs: Dict[str, np.ndarray] = {}

    def _new_report(self) -> PropagationReport:
        bins = self.settings.histogram_bins
        return PropagationReport(
            relations=self.inventory.named,
            histogram_edges=[float(e) for e in np.linspace(-1.0, 1.0, bins + 1)],
            histogram=[0] * bins,
            span_policy=self.settings.span_policy,
            search=self.settings.search,
            similarity_clamp=self.settings.similarity_clamp,
        )

    def fit(self, crowd: Iterable[CorpusSentence], scores: Optional[ScoreSource] = None) -> "LabelPropagator":
        """
        Index the crowd sentences and remember their srs rows.

        A sentence's srs comes from its own `scores` field, else from
        `scores.srs_for(id)`.

        Raises:
            ValidationError: a crowd sentence has no srs
        """
        named = len(self.inventory.named)
        vectors = []
        excluded = []
        self._srs = {}
        for sentence in crowd:
            row = sentence.scores
            if row is None and scores is not None:
                row = scores.srs_for(sentence.sentence_id)
            if row is None:
                raise ValidationError(f"missing srs for crowd sentence '{sentence.sentence_id}'")
            vec = sentence_vector(sentence, self.table, self.settings.span_policy, self.settings.span_fallback)
            if vec.empty:
                excluded.append(sentence.sentence_id)
                continue
            self._srs[sentence.sentence_id] = np.asarray(row, dtype=np.float64)[:named]
            vectors.append(vec)

        self.report = self._new_report()
        self.report.excluded_crowd = sorted(excluded)
        if excluded:
            log_warning(
                self.logger,
                f"{len(excluded)} crowd sentences have no in-vocabulary token and are left out of the index",
            )
        self._index = build_index(vectors, self.settings.search, self.settings.batch_size) if vectors else None
        self.report.labeled = len(vectors)
        self._fitted = True
        log_propagate(self.logger, f"Labeled index: {self.report.labeled} crowd sentences")
        return self

    def _process_batch(self, batch: Sequence[CorpusSentence]) -> _BatchOutcome:
        clamp = self.settings.similarity_clamp
        vectors = [
            sentence_vector(s, self.table, self.settings.span_policy, self.settings.span_fallback) for s in batch
        ]
        fallbacks = sum(1 for v in vectors if v.fell_back and not v.empty)
        usable = [i for i, v in enumerate(vectors) if not v.empty]
        results: List[PropagationResult] = [unpropagated(s) for s in batch]
        similarities = np.empty(0)
        if usable:
            if self._index is None:
                raise ValidationError("labeled set is empty: no crowd sentence has a usable vector")
            neighbor_ids, similarities = self._index.nearest_batch(np.vstack([vectors[i].vector for i in usable]))
            for i, neighbor_id, raw in zip(usable, neighbor_ids, similarities):
                raw = float(raw)
                weight = max(0.0, raw) if clamp else raw
                results[i] = propagate_sentence(
                    batch[i], self._srs[neighbor_id], weight, neighbor_id=neighbor_id, raw_similarity=raw
                )
                if not results[i].propagated:
                    log_warning(
                        self.logger,
                        f"'{batch[i].sentence_id}' has cosine -1 to '{neighbor_id}' with the clamp off; DS labels kept",
                    )
        return _BatchOutcome(results=results, fallbacks=fallbacks, similarities=similarities)

    def _batches(self, ds: Sequence[CorpusSentence]) -> Iterator[Sequence[CorpusSentence]]:
        size = self.settings.batch_size
        for start in range(0, len(ds), size):
            yield ds[start:start + size]

    def _outcomes(self, ds: Sequence[CorpusSentence]) -> Iterator[_BatchOutcome]:
        threads = self.settings.threads
        if threads == 1:
            for batch in self._batches(ds):
                yield self._process_batch(batch)
            return
        window = threads * 2
        with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="propagate") as pool:
            pending: Deque = deque()
            for batch in self._batches(ds):
                pending.append(pool.submit(self._process_batch, batch))
                if len(pending) >= window:
                    yield pending.popleft().result()
            for future in pending:
                yield future.result()

    def propagate(self, ds: Sequence[CorpusSentence]) -> Iterator[PropagationResult]:
        """Yield one PropagationResult per DS sentence, in input order."""
        if not self._fitted:
            raise RuntimeError("fit() must run before propagate()")
        ds = list(ds)
        report = self.report
        bins = self.settings.histogram_bins
        progress = self.progress(len(ds), "propagate", unit="sent")
        try:
            for outcome in self._outcomes(ds):
                counts, _ = np.histogram(outcome.similarities, bins=bins, range=(-1.0, 1.0))
                report.histogram = [a + int(b) for a, b in zip(report.histogram, counts)]
                report.fallback_whole_sentence += outcome.fallbacks
                for result in outcome.results:
                    report.total += 1
                    if result.propagated:
                        report.propagated += 1
                        report.similarity_sum += result.similarity
                        if any(v < 0.0 or v > 1.0 for v in result.scores):
                            report.out_of_range += 1
                    else:
                        report.unpropagatable += 1
                    yield result
                progress.update(len(outcome.results))
        finally:
            progress.close()

        if report.out_of_range:
            log_warning(
                self.logger,
                f"{report.out_of_range} propagated sentences have scores outside [0, 1] (negative cosine with the "
                "similarity clamp off); evaluate rejects such rows",
            )
        if report.unpropagatable:
            log_warning(
                self.logger,
                f"{report.unpropagatable} of {report.total} DS sentences kept their DS labels (no usable vector)",
            )
        log_propagate(
            self.logger,
            f"Propagated {report.propagated} of {report.total} DS sentences "
            f"({report.fallback_whole_sentence} via whole-sentence fallback)",
        )


def propagate_corpus(
    ds: Sequence[CorpusSentence],
    crowd: Iterable[CorpusSentence],
    table: EmbeddingTable,
    inventory: RelationInventory,
    scores: Optional[ScoreSource] = None,
    settings: Optional[PropagationConfig] = None,
    report: Optional[PropagationReport] = None,
) -> Iterator[PropagationResult]:
    """
    Relabel a DS corpus from a crowd corpus (functional wrapper).

    When `report` is given it is filled in place once the stream is consumed.
    """
    propagator = LabelPropagator(inventory, table, settings, verbose=False).fit(crowd, scores)
    for result in propagator.propagate(ds):
        yield result
    if report is not None:
        for item in fields(report):
            setattr(report, item.name, getattr(propagator.report, item.name))


def result_to_dict(result: PropagationResult, inventory: RelationInventory) -> dict:
    return {
        "id": result.sentence_id,
        "neighbor": result.neighbor_id,
        "sim": result.similarity,
        "sim_clamped": result.clamped_similarity,
        "scores": dict(zip(inventory.named, result.scores)),
        "propagated": result.propagated,
    }


def write_results(results: Iterable[PropagationResult], path: str, inventory: RelationInventory) -> int:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for result in results:
            f.write(json.dumps(result_to_dict(result, inventory), ensure_ascii=False) + "\n")
            count += 1
    return count


def write_report(report: PropagationReport, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(report.to_dict(), f, ensure_ascii=False, indent=2)
        f.write("\n")
