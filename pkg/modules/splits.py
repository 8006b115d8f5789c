"""
Crowd corpus dev/test split and the non-propagated baseline training sets.
"""

import hashlib
from typing import Iterable, Iterator, List, Sequence, Tuple

import config
from modules.errors import ValidationError
from modules.interfaces import CorpusSentence, PropagationResult


def _id_digest(sentence_id: str) -> str:
    return hashlib.sha256(sentence_id.encode("utf-8")).hexdigest()


def split_crowd(
    sentences: Sequence[CorpusSentence],
    dev_fraction: float = None,
) -> Tuple[List[CorpusSentence], List[CorpusSentence]]:
    """
    Divide crowd sentences into (dev, test) by the SHA-256 of their ids.

    The first round(n * dev_fraction) sentences in digest order go to dev.
    Both halves keep the input order. No RNG is involved, so the split only
    depends on the set of ids.
    """
    dev_fraction = config.SPLIT_DEV_FRACTION if dev_fraction is None else dev_fraction
    if not 0.0 < dev_fraction < 1.0:
        raise ValidationError(f"dev fraction must lie in (0, 1), got {dev_fraction}")
    ranked = sorted(sentences, key=lambda s: (_id_digest(s.sentence_id), s.sentence_id))
    dev_ids = {s.sentence_id for s in ranked[: int(round(len(ranked) * dev_fraction))]}
    dev = [s for s in sentences if s.sentence_id in dev_ids]
    test = [s for s in sentences if s.sentence_id not in dev_ids]
    return dev, test


def ds_baseline(ds: Iterable[CorpusSentence]) -> Iterator[PropagationResult]:
    """DS sentences as unpropagated results: scores are the DS labels."""
    for sentence in ds:
        yield PropagationResult(
            sentence_id=sentence.sentence_id,
            neighbor_id=None,
            similarity=None,
            clamped_similarity=None,
            scores=tuple(float(v) for v in sentence.ds_labels),
            propagated=False,
        )


def crowd_rows(crowd: Iterable[CorpusSentence]) -> Iterator[PropagationResult]:
    """Crowd sentences as their own neighbors at similarity 1, scored by srs."""
    for sentence in crowd:
        if sentence.scores is None:
            raise ValidationError(f"crowd sentence '{sentence.sentence_id}' carries no srs")
        yield PropagationResult(
            sentence_id=sentence.sentence_id,
            neighbor_id=sentence.sentence_id,
            similarity=1.0,
            clamped_similarity=1.0,
            scores=tuple(float(v) for v in sentence.scores),
            propagated=False,
        )


def combine_training_set(
    ds: Iterable[CorpusSentence],
    crowd: Iterable[CorpusSentence] = (),
) -> Iterator[PropagationResult]:
    """
    DS rows in corpus order, then crowd rows.

    Raises:
        ValidationError: a sentence id appears in both corpora
    """
    seen = set()
    for result in ds_baseline(ds):
        seen.add(result.sentence_id)
        yield result
    for result in crowd_rows(crowd):
        if result.sentence_id in seen:
            raise ValidationError(f"sentence id '{result.sentence_id}' is in both the DS and the crowd corpus")
        yield result
