"""Crawl-snapshot corpus: on-disk format, loading, validation.

A corpus directory holds:

* ``manifest.jsonl``: one JSON object per line with keys ``page_id``,
  ``url``, ``dom_path``, ``screenshot_path`` (nullable) and ``autocheck``
  (nullable array of 131 non-negative ints, violation counts per rule).
* ``edges.tsv``: one directed hyperlink per line, ``src<TAB>dst``,
  decimal manifest page ids.
* DOM files referenced by ``dom_path``, relative to the corpus root.

The loader reindexes page ids to contiguous ``0..n-1`` in manifest order
and keeps the original-to-row mapping, so all in-memory structures use
row indices as page ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import ParseError, ReferentialIntegrityError, SchemaError

AUTOCHECK_RULES = 131

MANIFEST_NAME = "manifest.jsonl"
EDGES_NAME = "edges.tsv"


@dataclass(frozen=True)
class PageRecord:
    """One crawled page."""

    page_id: int
    url: str
    dom_path: str
    screenshot_path: str | None = None
    autocheck: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.page_id < 0:
            raise SchemaError(f"page_id must be non-negative, got {self.page_id}")
        if self.autocheck is not None and len(self.autocheck) != AUTOCHECK_RULES:
            raise SchemaError(
                f"autocheck for page {self.page_id} has {len(self.autocheck)} "
                f"entries, expected {AUTOCHECK_RULES}"
            )


@dataclass(frozen=True)
class LinkGraph:
    """Directed hyperlink edges over page ids 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for src, dst in self.edges:
            if src == dst:
                raise SchemaError(f"self-loop ({src}, {dst}) in link graph")
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise ReferentialIntegrityError(
                    f"edge ({src}, {dst}) outside page range 0..{self.n - 1}"
                )


@dataclass(frozen=True)
class Corpus:
    """A loaded crawl snapshot; immutable and safe to share between runs."""

    pages: tuple[PageRecord, ...]
    graph: LinkGraph
    root: Path
    id_map: dict[int, int] = field(default_factory=dict)  # manifest id -> row

    def __post_init__(self):
        if self.graph.n != len(self.pages):
            raise SchemaError(
                f"graph has {self.graph.n} nodes but corpus has {len(self.pages)} pages"
            )

    @property
    def n(self) -> int:
        return len(self.pages)

    def dom_file(self, page_id: int) -> Path:
        return self.root / self.pages[page_id].dom_path


@dataclass
class ValidationReport:
    """Problems found in a corpus; errors make it unusable, warnings do not."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {"ok": self.ok, "errors": self.errors, "warnings": self.warnings}


def _parse_manifest_line(line: str, lineno: int) -> PageRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"manifest line {lineno}: expected an object")
    try:
        page_id = int(obj["page_id"])
        url = str(obj["url"])
        dom_path = str(obj["dom_path"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"manifest line {lineno}: missing or malformed field ({exc})") from exc
    screenshot = obj.get("screenshot_path")
    if screenshot is not None:
        screenshot = str(screenshot)
    autocheck = obj.get("autocheck")
    if autocheck is not None:
        try:
            autocheck = tuple(int(v) for v in autocheck)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"manifest line {lineno}: malformed autocheck array") from exc
        if any(v < 0 for v in autocheck):
            raise SchemaError(f"manifest line {lineno}: negative autocheck count")
    try:
        return PageRecord(page_id, url, dom_path, screenshot, autocheck)
    except SchemaError as exc:
        raise SchemaError(f"manifest line {lineno}: {exc}") from exc


def load_corpus(manifest_path: str | Path, edges_path: str | Path,
                root: str | Path | None = None) -> Corpus:
    """Load and validate a corpus from its manifest and edge list.

    Page ids are reindexed to 0..n-1 preserving manifest order; the
    original ids are kept in ``Corpus.id_map``. Duplicate edges are
    dropped, as are self-loops.
    """
    manifest_path = Path(manifest_path)
    edges_path = Path(edges_path)
    if root is None:
        root = manifest_path.parent

    records: list[PageRecord] = []
    id_map: dict[int, int] = {}
    with open(manifest_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = _parse_manifest_line(line, lineno)
            if rec.page_id in id_map:
                raise SchemaError(
                    f"manifest line {lineno}: duplicate page_id {rec.page_id}"
                )
            id_map[rec.page_id] = len(records)
            records.append(rec)

    reindexed = tuple(
        PageRecord(i, rec.url, rec.dom_path, rec.screenshot_path, rec.autocheck)
        for i, rec in enumerate(records)
    )

    edges: set[tuple[int, int]] = set()
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ParseError(f"edges line {lineno}: expected 'src<TAB>dst'")
            try:
                src, dst = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"edges line {lineno}: non-integer id") from None
            for endpoint in (src, dst):
                if endpoint not in id_map:
                    raise ReferentialIntegrityError(
                        f"edges line {lineno}: page id {endpoint} not in manifest"
                    )
            src_row, dst_row = id_map[src], id_map[dst]
            if src_row != dst_row:  # self-links carry no structure
                edges.add((src_row, dst_row))

    graph = LinkGraph(n=len(reindexed), edges=frozenset(edges))
    return Corpus(pages=reindexed, graph=graph, root=Path(root), id_map=id_map)


def open_corpus(corpus_dir: str | Path) -> Corpus:
    """Load a corpus directory using the standard file names."""
    corpus_dir = Path(corpus_dir)
    return load_corpus(corpus_dir / MANIFEST_NAME, corpus_dir / EDGES_NAME, corpus_dir)


def build_adjacency(graph: LinkGraph, symmetrize: bool = True) -> sparse.csr_matrix:
    """Binary adjacency matrix of the hyperlink graph.

    With ``symmetrize`` (the default), A[i,j] = A[j,i] = 1 whenever either
    directed edge exists; the diagonal is always zero.
    """
    n = graph.n
    if not graph.edges:
        return sparse.csr_matrix((n, n), dtype=np.float64)
    rows, cols = zip(*sorted(graph.edges))
    a = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, n), dtype=np.float64
    )
    if symmetrize:
        a = a.maximum(a.T)
    a.sum_duplicates()
    return a


def validate_corpus(corpus: Corpus) -> ValidationReport:
    """Check file presence and graph sanity; reports, never raises."""
    report = ValidationReport()
    seen_urls: dict[str, int] = {}
    linked = {v for e in corpus.graph.edges for v in e}
    for page in corpus.pages:
        dom = corpus.root / page.dom_path
        if not dom.is_file():
            report.errors.append(f"page {page.page_id}: missing DOM file {page.dom_path}")
        if page.screenshot_path is not None:
            shot = corpus.root / page.screenshot_path
            if not shot.is_file():
                report.warnings.append(
                    f"page {page.page_id}: missing screenshot {page.screenshot_path}"
                )
        if page.url in seen_urls:
            report.warnings.append(
                f"page {page.page_id}: duplicate URL (also page {seen_urls[page.url]})"
            )
        else:
            seen_urls[page.url] = page.page_id
        if corpus.n > 1 and page.page_id not in linked:
            report.warnings.append(f"page {page.page_id}: isolated node")
    return report


def write_manifest(path: str | Path, pages: list[PageRecord]) -> None:
    """Write manifest.jsonl; one page object per line, key-sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for page in pages:
            fh.write(json.dumps({
                "page_id": page.page_id,
                "url": page.url,
                "dom_path": page.dom_path,
                "screenshot_path": page.screenshot_path,
                "autocheck": list(page.autocheck) if page.autocheck is not None else None,
            }, sort_keys=True) + "\n")


def write_edges(path: str | Path, edges) -> None:
    """Write edges.tsv with edges in sorted order."""
    with open(path, "w", encoding="utf-8") as fh:
        for src, dst in sorted(edges):
            fh.write(f"{src}\t{dst}\n")
