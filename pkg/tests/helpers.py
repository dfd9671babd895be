"""Shared builders for test corpora and embedding matrices."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from grasp.corpus import PageRecord, load_corpus, write_edges, write_manifest
from grasp.embeddings import EmbeddingMatrix


def make_corpus(root: Path, htmls, edges=(), urls=None, autochecks=None,
                screenshots=None):
    """Write a corpus directory from HTML strings and load it back."""
    (root / "dom").mkdir(parents=True, exist_ok=True)
    pages = []
    for i, html in enumerate(htmls):
        rel = f"dom/{i:04d}.html"
        (root / rel).write_text(html, encoding="utf-8")
        pages.append(PageRecord(
            page_id=i,
            url=urls[i] if urls else f"https://site.test/p{i}",
            dom_path=rel,
            screenshot_path=screenshots[i] if screenshots else None,
            autocheck=autochecks[i] if autochecks else None,
        ))
    write_manifest(root / "manifest.jsonl", pages)
    write_edges(root / "edges.tsv", sorted(edges))
    return load_corpus(root / "manifest.jsonl", root / "edges.tsv", root=root)


def emb(data, ids=None, tag="text"):
    data = np.asarray(data, dtype=np.float32)
    if ids is None:
        ids = range(data.shape[0])
    return EmbeddingMatrix(ids=tuple(ids), data=data, space_tag=tag)


PAGE_A = "<html><body><nav><a href='/x'>x</a></nav><p>alpha beta</p></body></html>"
PAGE_B = "<html><body><article><p>gamma delta epsilon</p></article></body></html>"
PAGE_C = "<html><body><form><input></form><p>zeta eta</p></body></html>"
