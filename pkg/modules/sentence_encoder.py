"""
Sentence representations as averaged word vectors.

The default footprint is the tokens strictly between the two terms; when that
span has no in-vocabulary token the whole sentence is used instead, and a
sentence with no in-vocabulary token at all gets an empty (zero) vector.
Stop words are kept, out-of-vocabulary tokens are skipped.
"""

from typing import Sequence

import numpy as np

import config
from modules.embeddings import EmbeddingTable
from modules.errors import ValidationError
from modules.interfaces import CorpusSentence, SentenceVector

BETWEEN_TERMS = "between_terms"
WHOLE_SENTENCE = "whole_sentence"


def cosine_similarity(a, b) -> float:
    """
    dot(a, b) / (|a| |b|), 0.0 when either norm is zero.

    Raises:
        ValidationError: dimension mismatch
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    squared = float(np.dot(a, a)) * float(np.dot(b, b))
    if squared == 0.0:
        return 0.0
    value = float(np.dot(a, b)) / np.sqrt(squared)
    return float(min(1.0, max(-1.0, value)))


def _mean_vector(tokens: Sequence[str], table: EmbeddingTable):
    rows = [row for row in (table.row_of(t) for t in tokens) if row is not None]
    if not rows:
        return np.zeros(table.dimension, dtype=np.float64), 0
    block = table.vectors[rows].astype(np.float64)
    return block.mean(axis=0), len(rows)


def sentence_vector(
    sentence: CorpusSentence,
    table: EmbeddingTable,
    span_policy: str = None,
    fallback: bool = True,
) -> SentenceVector:
    """
    Average the vectors of a sentence's in-vocabulary tokens.

    Args:
        sentence: Corpus sentence with valid term spans
        table: Embedding table
        span_policy: "between_terms" (default) or "whole_sentence"
        fallback: Retry with the whole sentence when the between-terms span
            yields nothing

    Returns:
        SentenceVector; empty=True with a zero vector when no token contributed
    """
    span_policy = span_policy or config.SPAN_POLICY
    if span_policy not in config.SPAN_POLICIES:
        raise ValidationError(f"unknown span policy '{span_policy}', expected one of {config.SPAN_POLICIES}")

    if span_policy == BETWEEN_TERMS:
        vector, count = _mean_vector(sentence.between_tokens(), table)
        if count or not fallback:
            return SentenceVector(sentence.sentence_id, vector, count, count == 0, BETWEEN_TERMS)
        vector, count = _mean_vector(sentence.tokens, table)
        return SentenceVector(sentence.sentence_id, vector, count, count == 0, WHOLE_SENTENCE, fell_back=True)

    vector, count = _mean_vector(sentence.tokens, table)
    return SentenceVector(sentence.sentence_id, vector, count, count == 0, WHOLE_SENTENCE)
