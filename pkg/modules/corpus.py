"""
Corpus JSON Lines I/O.

One sentence per line:
    {"id": ..., "tokens": [...], "term1": [start, end], "term2": [start, end],
     "ds_labels": ["relation", ...], "scores": {"relation": real}}

Token ranges are inclusive. `scores` is optional and covers the 16 named
relations (missing ones read as 0.0).
"""

import json
import os
from dataclasses import replace
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from modules.errors import ValidationError
from modules.interfaces import CorpusSentence, Span
from modules.relation_inventory import RelationInventory


def _span(value, field_name: str, path: str, line: int) -> Span:
    if not isinstance(value, (list, tuple)) or len(value) != 2 or not all(isinstance(v, int) for v in value):
        raise ValidationError(f"'{field_name}' must be an inclusive [start, end] pair", path=path, line=line)
    start, end = value
    if start > end:
        raise ValidationError(f"'{field_name}' start {start} is after end {end}", path=path, line=line)
    return start, end


def validate_spans(tokens: Sequence[str], term1: Span, term2: Span) -> None:
    for name, (start, end) in (("term1", term1), ("term2", term2)):
        if start < 0 or end >= len(tokens):
            raise ValidationError(f"{name} span [{start}, {end}] outside {len(tokens)} tokens")
    if term1[0] <= term2[1] and term2[0] <= term1[1]:
        raise ValidationError(f"term spans overlap: {list(term1)} and {list(term2)}")


def score_vector(
    scores: Dict[str, float], inventory: RelationInventory, where: str = ""
) -> Tuple[float, ...]:
    values = [0.0] * len(inventory.named)
    for name, value in scores.items():
        if name == inventory.none_label:
            continue
        if name not in inventory:
            raise ValidationError(f"unknown relation '{name}' in scores{where}")
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"score for '{name}'{where} outside [0, 1]: {value}")
        values[inventory.index(name)] = value
    return tuple(values)


def parse_sentence(
    record: dict,
    inventory: RelationInventory,
    path: str = "",
    line: int = 0,
    require_ds_positive: bool = False,
) -> CorpusSentence:
    if not isinstance(record, dict):
        raise ValidationError("corpus line must be a JSON object", path=path, line=line)
    for key in ("id", "tokens", "term1", "term2", "ds_labels"):
        if key not in record:
            raise ValidationError(f"missing field '{key}'", path=path, line=line)

    sentence_id = str(record["id"])
    tokens = record["tokens"]
    if isinstance(tokens, str):
        tokens = tokens.split()
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise ValidationError("'tokens' must be a list of strings", path=path, line=line)

    term1 = _span(record["term1"], "term1", path, line)
    term2 = _span(record["term2"], "term2", path, line)
    try:
        validate_spans(tokens, term1, term2)
    except ValidationError as e:
        raise ValidationError(f"sentence '{sentence_id}': {e}", path=path, line=line) from None

    ds = [0] * len(inventory.named)
    for name in record["ds_labels"]:
        if name not in inventory or name == inventory.none_label:
            raise ValidationError(f"unknown DS relation '{name}' in sentence '{sentence_id}'", path=path, line=line)
        ds[inventory.index(name)] = 1
    if require_ds_positive and not any(ds):
        raise ValidationError(f"DS sentence '{sentence_id}' has no positive relation", path=path, line=line)

    scores = None
    if record.get("scores") is not None:
        try:
            scores = score_vector(record["scores"], inventory, where=f" of '{sentence_id}'")
        except ValidationError as e:
            raise ValidationError(str(e), path=path, line=line) from None

    return CorpusSentence(
        sentence_id=sentence_id,
        tokens=tuple(tokens),
        term1=term1,
        term2=term2,
        ds_labels=tuple(ds),
        scores=scores,
    )


def iter_corpus(
    path: str, inventory: RelationInventory, require_ds_positive: bool = False
) -> Iterator[CorpusSentence]:
    seen: Set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"invalid JSON: {e.msg}", path=path, line=line_number) from None
            sentence = parse_sentence(record, inventory, path, line_number, require_ds_positive)
            if sentence.sentence_id in seen:
                raise ValidationError(f"duplicate sentence id '{sentence.sentence_id}'", path=path, line=line_number)
            seen.add(sentence.sentence_id)
            yield sentence


def read_corpus(path: str, inventory: RelationInventory, require_ds_positive: bool = False) -> List[CorpusSentence]:
    return list(iter_corpus(path, inventory, require_ds_positive))


def sentence_to_dict(sentence: CorpusSentence, inventory: RelationInventory) -> dict:
    record = {
        "id": sentence.sentence_id,
        "tokens": list(sentence.tokens),
        "term1": list(sentence.term1),
        "term2": list(sentence.term2),
        "ds_labels": [name for name, bit in zip(inventory.named, sentence.ds_labels) if bit],
    }
    if sentence.scores is not None:
        record["scores"] = dict(zip(inventory.named, sentence.scores))
    return record


def write_corpus(sentences: Iterable[CorpusSentence], path: str, inventory: RelationInventory) -> int:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sentence in sentences:
            f.write(json.dumps(sentence_to_dict(sentence, inventory), ensure_ascii=False) + "\n")
            count += 1
    return count


def corpus_vocabulary(corpora: Iterable[Iterable[CorpusSentence]], lowercase: bool = True) -> Set[str]:
    """Tokens (and their lowercase forms) a table must keep to serve these corpora."""
    vocab: Set[str] = set()
    for corpus in corpora:
        for sentence in corpus:
            vocab.update(sentence.tokens)
            if lowercase:
                vocab.update(t.lower() for t in sentence.tokens)
    return vocab


def attach_scores(
    sentences: Iterable[CorpusSentence],
    srs: Dict[str, Sequence[float]],
    inventory: RelationInventory,
    source: Optional[str] = None,
) -> List[CorpusSentence]:
    """Return copies of crowd sentences carrying their srs (named relations) as `scores`.

    Sentences that already carry scores keep them.

    Raises:
        ValidationError: a sentence has neither scores nor an srs row
    """
    out = []
    named = len(inventory.named)
    for sentence in sentences:
        if sentence.scores is not None:
            out.append(sentence)
            continue
        row = srs.get(sentence.sentence_id)
        if row is None:
            where = f" in {source}" if source else ""
            raise ValidationError(f"missing srs for crowd sentence '{sentence.sentence_id}'{where}")
        out.append(replace(sentence, scores=tuple(float(v) for v in row[:named])))
    return out
