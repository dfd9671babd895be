"""Per-page embedding matrices, modality fusion, and the exchange format.

Encoders run out of process (see the companion ``grasp-embed`` adapter)
and hand their output over as two files per modality:

* ``<space>.ids.txt``: one decimal page id per line (manifest ids).
* ``<space>.f32``: raw IEEE-754 binary32, little-endian, row-major,
  no header; exactly ``n * dim`` values in ids-file order.

``hash_embed`` is the built-in deterministic stand-in used when no
encoder output is available (tests, smoke runs).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .domscan import scan_html
from .errors import AlignmentError, DataError, GraspError, SchemaError, SizeMismatchError

SPACE_TAGS = ("text", "visual", "fused", "graph")

_F32 = np.dtype("<f4")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """An n-by-d float32 matrix with an explicit id per row."""

    ids: tuple[int, ...]
    data: np.ndarray
    space_tag: str

    def __post_init__(self):
        if self.space_tag not in SPACE_TAGS:
            raise SchemaError(f"unknown space tag {self.space_tag!r}")
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise SchemaError(f"embedding data must be 2-D, got shape {data.shape}")
        if data.dtype != np.float32:
            data = data.astype(np.float32)
        if len(self.ids) != data.shape[0]:
            raise SchemaError(
                f"{len(self.ids)} ids for {data.shape[0]} rows in {self.space_tag} matrix"
            )
        if len(set(self.ids)) != len(self.ids):
            raise SchemaError(f"duplicate ids in {self.space_tag} matrix")
        if data.size and not np.isfinite(data).all():
            raise DataError(f"non-finite value in {self.space_tag} matrix")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def row(self, page_id: int) -> np.ndarray:
        return self.data[self.ids.index(page_id)]

    def take(self, ids: Sequence[int]) -> np.ndarray:
        """Rows for the given ids, in the given order."""
        index = {pid: i for i, pid in enumerate(self.ids)}
        try:
            rows = [index[pid] for pid in ids]
        except KeyError as exc:
            raise AlignmentError(f"id {exc.args[0]} not in {self.space_tag} matrix") from exc
        return self.data[rows]


def load_embedding_files(ids_path: str | Path, matrix_path: str | Path,
                         dim: int, space_tag: str = "text") -> EmbeddingMatrix:
    """Load one modality from its exchange-format file pair."""
    if dim <= 0:
        raise SchemaError(f"dim must be positive, got {dim}")
    ids: list[int] = []
    with open(ids_path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                ids.append(int(line))
            except ValueError:
                raise SchemaError(f"{ids_path}: line {lineno} is not an integer id") from None
    raw = Path(matrix_path).read_bytes()
    expected = 4 * len(ids) * dim
    if len(raw) != expected:
        raise SizeMismatchError(
            f"{matrix_path}: {len(raw)} bytes, expected {expected} "
            f"({len(ids)} rows x {dim} cols x 4)"
        )
    data = np.frombuffer(raw, dtype=_F32).reshape(len(ids), dim)
    return EmbeddingMatrix(ids=tuple(ids), data=data.copy(), space_tag=space_tag)


def save_embedding_files(matrix: EmbeddingMatrix, ids_path: str | Path,
                         matrix_path: str | Path) -> None:
    """Write the exchange-format pair; bit-exact round trip with the loader."""
    with open(ids_path, "w", encoding="ascii") as fh:
        for pid in matrix.ids:
            fh.write(f"{pid}\n")
    Path(matrix_path).write_bytes(np.ascontiguousarray(matrix.data, dtype=_F32).tobytes())


def l2_normalize_rows(data: np.ndarray) -> np.ndarray:
    """Row-wise L2 normalization; zero rows stay zero."""
    data = np.asarray(data, dtype=np.float64)
    norms = np.linalg.norm(data, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return data / norms


def fuse_modalities(h_t: EmbeddingMatrix, h_v: EmbeddingMatrix) -> EmbeddingMatrix:
    """Concatenate text and visual rows after per-modality L2 normalization.

    Rows are aligned by id (the visual matrix is reordered to text order);
    zero rows stay zero, so pages without one modality carry a zero block.
    """
    if set(h_t.ids) != set(h_v.ids):
        raise AlignmentError("text and visual matrices cover different id sets")
    visual_rows = h_v.take(h_t.ids)
    fused = np.hstack([
        l2_normalize_rows(h_t.data),
        l2_normalize_rows(visual_rows),
    ]).astype(np.float32)
    return EmbeddingMatrix(ids=h_t.ids, data=fused, space_tag="fused")


def zero_embedding(ids: Sequence[int], dim: int, space_tag: str) -> EmbeddingMatrix:
    return EmbeddingMatrix(
        ids=tuple(ids), data=np.zeros((len(ids), dim), dtype=np.float32),
        space_tag=space_tag,
    )


def hash_tokens(tokens: Iterable[str], dim: int, seed: int) -> np.ndarray:
    """Signed feature hashing of a token stream into ``dim`` buckets.

    Keyed BLAKE2 keeps the mapping stable across processes and platforms,
    unlike the builtin ``hash``.
    """
    if dim <= 0:
        raise SchemaError(f"dim must be positive, got {dim}")
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    row = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        digest = hashlib.blake2b(token.encode("utf-8"), key=key, digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        sign = 1.0 if value & (1 << 63) else -1.0
        row[value % dim] += sign
    return row


def _page_tokens(html: str) -> list[str]:
    """Hashing token stream: lowercased tag names plus whitespace-split text.

    Tag names are emitted once per occurrence; script/style bodies are not
    page text and are skipped.
    """
    summary = scan_html(html)
    tokens: list[str] = []
    for tag, count in summary.tag_counts.items():
        tokens.extend([tag] * count)
    tokens.extend(summary.text_tokens)
    return tokens


def hash_embed(corpus: Corpus, dim: int, seed: int) -> EmbeddingMatrix:
    """Deterministic text-space embedding via feature hashing of DOM tokens.

    Rows are L2-normalized; an empty DOM yields a zero row. Fully
    determined by (corpus, dim, seed).
    """
    rows = np.zeros((corpus.n, dim), dtype=np.float64)
    for page in corpus.pages:
        dom_path = corpus.dom_file(page.page_id)
        try:
            html = dom_path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            raise GraspError(
                f"cannot read DOM for page {page.page_id} ({dom_path}): {exc}"
            ) from exc
        rows[page.page_id] = hash_tokens(_page_tokens(html), dim, seed)
    return EmbeddingMatrix(
        ids=tuple(range(corpus.n)),
        data=l2_normalize_rows(rows).astype(np.float32),
        space_tag="text",
    )


def align_to_corpus(matrix: EmbeddingMatrix, corpus: Corpus) -> EmbeddingMatrix:
    """Map exchange-file ids (manifest ids) to corpus rows 0..n-1.

    The file must cover exactly the corpus id set.
    """
    try:
        row_ids = [corpus.id_map[pid] if corpus.id_map else pid for pid in matrix.ids]
    except KeyError as exc:
        raise AlignmentError(f"embedding id {exc.args[0]} not in corpus manifest") from exc
    if sorted(row_ids) != list(range(corpus.n)):
        raise AlignmentError(
            f"{matrix.space_tag} matrix covers {len(row_ids)} ids, "
            f"corpus has {corpus.n} pages"
        )
    order = np.argsort(np.asarray(row_ids))
    return EmbeddingMatrix(
        ids=tuple(range(corpus.n)),
        data=matrix.data[order],
        space_tag=matrix.space_tag,
    )
