"""
Crowd annotation parsing.

Reads the annotation CSV (header `worker_id,sentence_id,choices`, choices
`|`-separated) into an immutable AnnotationMatrix of 17-component binary
worker vectors.
"""

import csv
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from modules.errors import ValidationError
from modules.interfaces import WorkerVector
from modules.logging_utils import setup_logger
from modules.relation_inventory import RelationInventory

logger = setup_logger(__name__)

ANNOTATION_HEADER = ("worker_id", "sentence_id", "choices")
CHOICE_SEPARATOR = "|"


def worker_vector(
    raw_choices: Sequence[str],
    inventory: RelationInventory,
    worker_id: str = "",
    sentence_id: str = "",
) -> WorkerVector:
    """
    Encode a worker's relation picks as a binary vector over the inventory.

    Repeated picks collapse to a single 1. `none` must stand alone.

    Raises:
        ValidationError: empty choice list, unknown relation, or `none`
            combined with another relation
    """
    names = [name.strip() for name in raw_choices if name and name.strip()]
    if not names:
        raise ValidationError("empty choice list")

    choices = [0] * inventory.size
    for name in names:
        if name not in inventory:
            raise ValidationError(f"unknown relation '{name}'")
        choices[inventory.index(name)] = 1

    if choices[inventory.none_index] == 1 and sum(choices) > 1:
        raise ValidationError(
            f"'{inventory.none_label}' cannot be combined with other relations: {CHOICE_SEPARATOR.join(names)}"
        )

    return WorkerVector(worker_id=worker_id, sentence_id=sentence_id, choices=tuple(choices))


@dataclass(frozen=True)
class AnnotationMatrix:
    """All worker vectors of a run, indexed by sentence and by worker.

    Row order is kept as read; indices list rows in that order.
    """

    rows: Tuple[WorkerVector, ...]
    inventory: RelationInventory
    sentence_index: Mapping[str, Tuple[WorkerVector, ...]] = field(init=False, compare=False, repr=False)
    worker_index: Mapping[str, Tuple[WorkerVector, ...]] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)

        seen = set()
        by_sentence: Dict[str, List[WorkerVector]] = {}
        by_worker: Dict[str, List[WorkerVector]] = {}
        for row in rows:
            key = (row.worker_id, row.sentence_id)
            if key in seen:
                raise ValidationError(
                    f"duplicate annotation for worker '{row.worker_id}' on sentence '{row.sentence_id}'"
                )
            seen.add(key)
            if len(row.choices) != self.inventory.size:
                raise ValidationError(
                    f"worker vector has {len(row.choices)} components, inventory has {self.inventory.size}"
                )
            by_sentence.setdefault(row.sentence_id, []).append(row)
            by_worker.setdefault(row.worker_id, []).append(row)

        object.__setattr__(
            self, "sentence_index", MappingProxyType({k: tuple(v) for k, v in by_sentence.items()})
        )
        object.__setattr__(
            self, "worker_index", MappingProxyType({k: tuple(v) for k, v in by_worker.items()})
        )

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def sentence_ids(self) -> List[str]:
        return sorted(self.sentence_index)

    @property
    def worker_ids(self) -> List[str]:
        return sorted(self.worker_index)

    def rows_for_sentence(self, sentence_id: str) -> Tuple[WorkerVector, ...]:
        try:
            return self.sentence_index[sentence_id]
        except KeyError:
            raise ValidationError(f"unknown sentence '{sentence_id}'") from None


def parse_annotations(path: str, inventory: RelationInventory) -> AnnotationMatrix:
    """
    Parse the annotation CSV into a validated AnnotationMatrix.

    Args:
        path: CSV file with header `worker_id,sentence_id,choices`
        inventory: Relation inventory the choices index against

    Returns:
        AnnotationMatrix with one row per non-header line

    Raises:
        ValidationError: malformed line, unknown relation, duplicate
            (worker, sentence) pair or empty choice vector; messages carry
            the line number
        OSError: file cannot be read
    """
    rows: List[WorkerVector] = []
    seen: Dict[Tuple[str, str], int] = {}

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("empty annotation file (missing header)", path=path, line=1) from None
        if tuple(h.strip() for h in header) != ANNOTATION_HEADER:
            raise ValidationError(
                f"bad header {header!r}, expected {','.join(ANNOTATION_HEADER)}", path=path, line=1
            )

        for record in reader:
            line = reader.line_num
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(ANNOTATION_HEADER):
                raise ValidationError(
                    f"malformed line: expected {len(ANNOTATION_HEADER)} fields, got {len(record)}",
                    path=path,
                    line=line,
                )
            worker_id, sentence_id, raw_choices = (cell.strip() for cell in record)
            if not worker_id or not sentence_id:
                raise ValidationError("malformed line: empty worker_id or sentence_id", path=path, line=line)

            key = (worker_id, sentence_id)
            if key in seen:
                raise ValidationError(
                    f"duplicate annotation for worker '{worker_id}' on sentence '{sentence_id}' "
                    f"(first seen on line {seen[key]})",
                    path=path,
                    line=line,
                )
            seen[key] = line

            try:
                vector = worker_vector(
                    raw_choices.split(CHOICE_SEPARATOR), inventory, worker_id=worker_id, sentence_id=sentence_id
                )
            except ValidationError as e:
                raise ValidationError(str(e), path=path, line=line) from None
            rows.append(vector)

    matrix = AnnotationMatrix(rows=tuple(rows), inventory=inventory)
    logger.debug(
        f"Parsed {len(matrix)} annotations: {len(matrix.sentence_index)} sentences, "
        f"{len(matrix.worker_index)} workers ({os.path.basename(path)})"
    )
    return matrix


def format_choices(vector: WorkerVector, inventory: RelationInventory) -> str:
    return CHOICE_SEPARATOR.join(
        name for name, bit in zip(inventory.relations, vector.choices) if bit == 1
    )


def write_annotations(matrix: AnnotationMatrix, path: str) -> int:
    """Write the matrix back to the annotation CSV format (LF endings, row order kept)."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ANNOTATION_HEADER)
        for row in matrix.rows:
            writer.writerow([row.worker_id, row.sentence_id, format_choices(row, matrix.inventory)])
    return len(matrix.rows)


def matrix_from_records(
    records: Iterable[Tuple[str, str, Sequence[str]]], inventory: RelationInventory
) -> AnnotationMatrix:
    """Build a matrix from (worker_id, sentence_id, choices) tuples."""
    rows = [worker_vector(choices, inventory, worker_id=w, sentence_id=s) for w, s, choices in records]
    return AnnotationMatrix(rows=tuple(rows), inventory=inventory)
