"""
Vocabulary coverage of an embedding table over one or more corpora.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

from modules.embeddings import EmbeddingTable
from modules.interfaces import CorpusSentence


@dataclass
class CorpusCoverage:
    sentences: int = 0
    tokens: int = 0
    exact_hits: int = 0
    lowercase_hits: int = 0
    oov: int = 0
    empty_between_span: int = 0
    empty_vector: int = 0

    def to_dict(self) -> dict:
        return {
            "sentences": self.sentences,
            "tokens": self.tokens,
            "exact_hits": self.exact_hits,
            "lowercase_hits": self.lowercase_hits,
            "oov": self.oov,
            "empty_between_span": self.empty_between_span,
            "empty_vector": self.empty_vector,
        }


@dataclass
class CoverageReport:
    vocabulary: int  # declared in the vector file header
    retained: int  # vectors kept for the corpora
    dimension: int
    corpora: Dict[str, CorpusCoverage] = field(default_factory=dict)
    top_oov: List[Tuple[str, int]] = field(default_factory=list)

    @property
    def totals(self) -> CorpusCoverage:
        total = CorpusCoverage()
        for stats in self.corpora.values():
            for name in total.to_dict():
                setattr(total, name, getattr(total, name) + getattr(stats, name))
        return total

    def to_dict(self) -> dict:
        return {
            "vocabulary": self.vocabulary,
            "retained": self.retained,
            "dimension": self.dimension,
            "totals": self.totals.to_dict(),
            "corpora": {name: stats.to_dict() for name, stats in self.corpora.items()},
            "top_oov": [{"token": token, "count": count} for token, count in self.top_oov],
        }


def corpus_coverage(
    sentences: Sequence[CorpusSentence],
    table: EmbeddingTable,
    oov_counts: Counter = None,
) -> CorpusCoverage:
    stats = CorpusCoverage()
    for sentence in sentences:
        stats.sentences += 1
        in_vocab = 0
        for token in sentence.tokens:
            stats.tokens += 1
            kind = table.lookup_kind(token)
            if kind == "exact":
                stats.exact_hits += 1
                in_vocab += 1
            elif kind == "lowercase":
                stats.lowercase_hits += 1
                in_vocab += 1
            else:
                stats.oov += 1
                if oov_counts is not None:
                    oov_counts[token] += 1
        if not any(table.row_of(t) is not None for t in sentence.between_tokens()):
            stats.empty_between_span += 1
        if in_vocab == 0:
            stats.empty_vector += 1
    return stats


def embedding_coverage(
    table: EmbeddingTable,
    corpora: Mapping[str, Sequence[CorpusSentence]],
    top: int = 20,
) -> CoverageReport:
    """Coverage per corpus plus the most frequent OOV tokens (ties by token)."""
    oov_counts: Counter = Counter()
    report = CoverageReport(
        vocabulary=table.declared_count,
        retained=len(table),
        dimension=table.dimension,
    )
    for name, sentences in corpora.items():
        report.corpora[name] = corpus_coverage(sentences, table, oov_counts)
    report.top_oov = sorted(oov_counts.items(), key=lambda item: (-item[1], item[0]))[:top]
    return report
