"""
Pre-trained word vector tables.

Reads the common word2vec formats in a single streaming pass:

    text:   "<count> <dim>\\n" then "token v1 ... vdim\\n" per vector
    binary: the same ASCII header, then per vector the token, one space and
            dim little-endian float32 values (an optional newline may follow)

With a vocabulary filter only matching rows are kept, so memory follows the
retained vocabulary rather than the file size.
"""

import io
import os
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, Iterator, Optional, Tuple

import numpy as np
from tqdm import tqdm

import config
from modules.errors import ValidationError
from modules.logging_utils import log_embed, log_warning, setup_logger

logger = setup_logger(__name__)

_FLOAT32_LE = np.dtype("<f4")


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable token -> vector map of a fixed dimension."""

    dimension: int
    tokens: Tuple[str, ...]
    vectors: np.ndarray = field(repr=False)  # (len(tokens), dimension) float32
    declared_count: int = 0
    lowercase_fallback: bool = True
    _rows: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValidationError(f"embedding dimension must be positive, got {self.dimension}")
        vectors = np.asarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape != (len(self.tokens), self.dimension):
            raise ValidationError(
                f"vector block shape {vectors.shape} does not match {len(self.tokens)} tokens x {self.dimension}"
            )
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        rows: Dict[str, int] = {}
        for i, token in enumerate(self.tokens):
            if token in rows:
                raise ValidationError(f"duplicate token '{token}' in embedding table")
            rows[token] = i
        object.__setattr__(self, "_rows", rows)
        if not self.declared_count:
            object.__setattr__(self, "declared_count", len(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return self.row_of(token) is not None

    def row_of(self, token: str) -> Optional[int]:
        """Exact match first, lowercase second."""
        row = self._rows.get(token)
        if row is None and self.lowercase_fallback:
            lowered = token.lower()
            if lowered != token:
                row = self._rows.get(lowered)
        return row

    def lookup_kind(self, token: str) -> Optional[str]:
        if token in self._rows:
            return "exact"
        if self.lowercase_fallback and token.lower() in self._rows:
            return "lowercase"
        return None

    def get(self, token: str) -> Optional[np.ndarray]:
        row = self.row_of(token)
        return None if row is None else self.vectors[row]


def _parse_header(line: bytes, path: str) -> Tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise ValidationError(f"bad header {line[:80]!r}, expected '<count> <dim>'", path=path, line=1)
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"bad header {line[:80]!r}, expected integers", path=path, line=1) from None
    if count < 0 or dim <= 0:
        raise ValidationError(f"bad header counts: {count} vectors of dimension {dim}", path=path, line=1)
    return count, dim


def _iter_text_rows(handle: io.BufferedReader, count: int, dim: int, path: str) -> Iterator[Tuple[str, np.ndarray]]:
    read = 0
    for line_number, raw in enumerate(handle, start=2):
        line = raw.decode("utf-8", errors="strict").rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.rstrip().split(" ")
        if read >= count:
            raise ValidationError(
                f"header declares {count} vectors but the file has more", path=path, line=line_number
            )
        if len(parts) != dim + 1:
            raise ValidationError(
                f"dimension mismatch for '{parts[0]}': expected {dim} values, got {len(parts) - 1}",
                path=path,
                line=line_number,
            )
        try:
            vector = np.array(parts[1:], dtype=np.float32)
        except ValueError:
            raise ValidationError(f"non-numeric value in vector '{parts[0]}'", path=path, line=line_number) from None
        read += 1
        yield parts[0], vector
    if read != count:
        raise ValidationError(f"header declares {count} vectors but the file has {read}", path=path)


def _read_token(handle: io.BufferedReader) -> Optional[bytes]:
    chars = bytearray()
    while True:
        ch = handle.read(1)
        if not ch:
            return bytes(chars) if chars else None
        if ch == b" ":
            return bytes(chars)
        if ch in (b"\n", b"\r") and not chars:
            continue
        chars += ch


def _iter_binary_rows(handle: io.BufferedReader, count: int, dim: int, path: str) -> Iterator[Tuple[str, np.ndarray]]:
    width = dim * _FLOAT32_LE.itemsize
    for index in range(count):
        token = _read_token(handle)
        if token is None:
            raise ValidationError(
                f"truncated file: header declares {count} vectors, found {index}", path=path
            )
        payload = handle.read(width)
        if len(payload) != width:
            raise ValidationError(
                f"truncated file: vector {index + 1} of {count} ('{token.decode('utf-8', 'replace')}') is incomplete",
                path=path,
            )
        try:
            text = token.decode("utf-8")
        except UnicodeDecodeError:
            raise ValidationError(f"vector {index + 1} has a token that is not UTF-8", path=path) from None
        yield text, np.frombuffer(payload, dtype=_FLOAT32_LE)
    trailing = handle.read(64)
    if trailing.strip():
        raise ValidationError(f"header declares {count} vectors but the file has more", path=path)


def load_embeddings(
    path: str,
    format: Optional[str] = None,
    vocabulary: Optional[AbstractSet[str]] = None,
    lowercase_fallback: Optional[bool] = None,
    show_progress: Optional[bool] = None,
) -> EmbeddingTable:
    """
    Stream a word2vec-format file into an EmbeddingTable.

    Args:
        path: Vector file
        format: "binary" or "text" (None for config default)
        vocabulary: Keep only these tokens (None keeps everything)
        lowercase_fallback: Enable lowercase lookups on the table
        show_progress: stderr counter while reading

    Returns:
        EmbeddingTable with the header dimension; declared_count records the
        header vocabulary size

    Raises:
        ValidationError: header/vector count mismatch, truncated file,
            dimension mismatch on any row
        OSError: file cannot be read
    """
    format = (format or config.EMBEDDING_FORMAT).lower()
    if format not in config.EMBEDDING_FORMATS:
        raise ValidationError(f"unknown embedding format '{format}', expected one of {config.EMBEDDING_FORMATS}")
    if lowercase_fallback is None:
        lowercase_fallback = config.EMBEDDING_LOWERCASE_FALLBACK
    if show_progress is None:
        show_progress = config.SHOW_PROGRESS

    tokens = []
    kept = []
    seen = set()
    duplicates = 0

    with open(path, "rb") as handle:
        count, dim = _parse_header(handle.readline(), path)
        rows = (_iter_binary_rows if format == "binary" else _iter_text_rows)(handle, count, dim, path)
        progress = tqdm(
            rows,
            total=count,
            desc=f"vectors {os.path.basename(path)}",
            unit="vec",
            unit_scale=True,
            disable=not show_progress,
            leave=False,
        )
        for token, vector in progress:
            # only retained tokens are remembered, so filtered loads stay small
            if vocabulary is not None and token not in vocabulary:
                continue
            if token in seen:
                duplicates += 1
                if duplicates <= 5:
                    log_warning(logger, f"duplicate token '{token}' in {path}; keeping the first vector")
                continue
            seen.add(token)
            tokens.append(token)
            kept.append(np.array(vector, dtype=np.float32))

    if duplicates > 5:
        log_warning(logger, f"{duplicates} duplicate tokens in {path} in total")

    vectors = np.vstack(kept) if kept else np.zeros((0, dim), dtype=np.float32)
    table = EmbeddingTable(
        dimension=dim,
        tokens=tuple(tokens),
        vectors=vectors,
        declared_count=count,
        lowercase_fallback=lowercase_fallback,
    )
    log_embed(
        logger,
        f"Loaded {len(table)} of {count} vectors (dim={dim}, format={format}"
        f"{', filtered' if vocabulary is not None else ''})",
    )
    return table


def write_embeddings(table: EmbeddingTable, path: str, format: str = "text") -> None:
    """Write a table in either word2vec format (used for fixtures and filtered caches)."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(f"{len(table)} {table.dimension}\n".encode("ascii"))
        for token, vector in zip(table.tokens, table.vectors):
            if format == "binary":
                f.write(token.encode("utf-8") + b" ")
                f.write(np.asarray(vector, dtype=_FLOAT32_LE).tobytes())
                f.write(b"\n")
            else:
                values = " ".join(repr(float(v)) for v in vector)
                f.write(f"{token} {values}\n".encode("utf-8"))
