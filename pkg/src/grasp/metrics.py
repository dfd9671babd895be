"""Representativeness metrics and statistical baseline features.

Two numbers summarize a sample: s_sampled, the mean pairwise cosine
similarity among sampled pages (times 100; lower means more diverse),
and d_intra_inter, the gap between the mean intra-cluster similarity and
s_sampled (larger means the sample spans tighter clusters). Both are
computed in a chosen embedding space, normally the raw text or visual
one rather than the propagated graph space.

The sdc_* feature builders produce shallow statistical page vectors
(token counts, tag histograms, tree shape, tag bigrams) used as
clustering inputs for baseline comparisons, with an optional PCA
reduction.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .domscan import DomSummary, scan_html
from .embeddings import EmbeddingMatrix, l2_normalize_rows
from .errors import ContractError, UndefinedMetricError

SDC_KINDS = ("content", "tags", "tree", "structure", "struc_cont")

CONTENT_VOCAB_SIZE = 1000
STRUCTURE_VOCAB_SIZE = 500
BRANCHING_BUCKETS = 8  # child counts 0..6, last bucket is >= 7


def mean_pairwise_cosine(vectors: np.ndarray) -> float:
    """Mean cosine over all unordered row pairs; zero rows count as 0."""
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise UndefinedMetricError(
            f"need at least 2 vectors, got {data.shape[0] if data.ndim == 2 else 0}"
        )
    unit = l2_normalize_rows(data)
    gram = unit @ unit.T
    n = data.shape[0]
    iu = np.triu_indices(n, k=1)
    return float(gram[iu].mean())


def s_sampled(sample_ids: Sequence[int], emb: EmbeddingMatrix) -> float:
    """100 x mean pairwise cosine among the sampled pages' rows."""
    if len(sample_ids) < 2:
        raise UndefinedMetricError(
            f"sample has {len(sample_ids)} pages; need at least 2"
        )
    rows = emb.take(list(sample_ids))
    return 100.0 * mean_pairwise_cosine(rows)


def intra_cluster_mean(assignments: np.ndarray, emb: EmbeddingMatrix,
                       pooled: bool = False) -> float:
    """Mean intra-cluster cosine (x100) over clusters with >= 2 members.

    Default is the unweighted mean of per-cluster means, so large
    clusters do not dominate; ``pooled`` averages over all intra-cluster
    pairs instead. Assignments are positional, aligned with emb rows.
    """
    assignments = np.asarray(assignments)
    if len(assignments) != emb.n:
        raise ContractError(
            f"{len(assignments)} assignments for {emb.n} embedding rows"
        )
    unit = l2_normalize_rows(emb.data.astype(np.float64))
    per_cluster: list[tuple[float, int]] = []
    for cluster in np.unique(assignments):
        rows = np.flatnonzero(assignments == cluster)
        if len(rows) < 2:
            continue
        gram = unit[rows] @ unit[rows].T
        iu = np.triu_indices(len(rows), k=1)
        per_cluster.append((float(gram[iu].sum()), len(iu[0])))
    if not per_cluster:
        raise UndefinedMetricError("no cluster has 2 or more members")
    if pooled:
        total = sum(s for s, _ in per_cluster)
        pairs = sum(p for _, p in per_cluster)
        return 100.0 * total / pairs
    return 100.0 * float(np.mean([s / p for s, p in per_cluster]))


def d_intra_inter(assignments: np.ndarray, emb: EmbeddingMatrix,
                  sample_ids: Sequence[int], pooled: bool = False) -> float:
    """intra_cluster_mean minus s_sampled, both as percentages."""
    return intra_cluster_mean(assignments, emb, pooled=pooled) - s_sampled(
        sample_ids, emb
    )


def _top_vocab(counts: Counter, size: int) -> list:
    """Most frequent keys, ties broken lexicographically."""
    return [key for key, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]]


def _scan_corpus(corpus: Corpus) -> list[DomSummary]:
    summaries = []
    for page in corpus.pages:
        html = corpus.dom_file(page.page_id).read_text(
            encoding="utf-8", errors="replace"
        )
        summaries.append(scan_html(html))
    return summaries


def _count_rows(per_page: list[Counter], vocab: list) -> np.ndarray:
    index = {key: i for i, key in enumerate(vocab)}
    rows = np.zeros((len(per_page), len(vocab)), dtype=np.float64)
    for r, counts in enumerate(per_page):
        for key, count in counts.items():
            col = index.get(key)
            if col is not None:
                rows[r, col] = count
    return rows


def _tree_rows(summaries: list[DomSummary]) -> np.ndarray:
    rows = np.zeros((len(summaries), 2 + BRANCHING_BUCKETS), dtype=np.float64)
    for r, summary in enumerate(summaries):
        rows[r, 0] = summary.max_depth
        rows[r, 1] = summary.node_count
        for count in summary.child_counts:
            bucket = min(count, BRANCHING_BUCKETS - 1)
            rows[r, 2 + bucket] += 1
    return rows


def sdc_features(corpus: Corpus, kind: str) -> EmbeddingMatrix:
    """Statistical page features for baseline clustering.

    kinds: "content" (term frequency over the top-1000 corpus tokens),
    "tags" (tag-name histogram), "tree" (max depth, node count, and a
    branching-factor histogram), "structure" (parent-to-child tag bigram
    frequency over the top 500 bigrams), "struc_cont" (structure and
    content concatenated). Rows are L2-normalized; the vocabulary is
    fixed by global frequency with lexicographic tie-break, so features
    do not depend on page order.
    """
    if kind not in SDC_KINDS:
        raise ContractError(f"unknown feature kind {kind!r}")
    summaries = _scan_corpus(corpus)

    def content_rows() -> np.ndarray:
        per_page = [Counter(s.text_tokens) for s in summaries]
        vocab = _top_vocab(sum(per_page, Counter()), CONTENT_VOCAB_SIZE)
        return _count_rows(per_page, vocab)

    def structure_rows() -> np.ndarray:
        per_page = [s.bigram_counts for s in summaries]
        vocab = _top_vocab(sum(per_page, Counter()), STRUCTURE_VOCAB_SIZE)
        return _count_rows(per_page, vocab)

    if kind == "content":
        raw = content_rows()
    elif kind == "tags":
        per_page = [s.tag_counts for s in summaries]
        vocab = sorted(sum(per_page, Counter()))
        raw = _count_rows(per_page, vocab)
    elif kind == "tree":
        raw = _tree_rows(summaries)
    elif kind == "structure":
        raw = structure_rows()
    else:
        raw = np.hstack([structure_rows(), content_rows()])

    data = l2_normalize_rows(raw).astype(np.float32)
    ids = tuple(page.page_id for page in corpus.pages)
    return EmbeddingMatrix(ids=ids, data=data, space_tag="text")


def pca_reduce(emb: EmbeddingMatrix, target_dim: int) -> EmbeddingMatrix:
    """Centered PCA projection onto the top components by variance.

    Deterministic: each component's sign is fixed so its
    largest-magnitude loading is positive.
    """
    if target_dim < 1:
        raise ContractError(f"target_dim must be positive, got {target_dim}")
    if target_dim > emb.dim:
        raise ContractError(
            f"target_dim {target_dim} exceeds embedding dim {emb.dim}"
        )
    data = emb.data.astype(np.float64)
    centered = data - data.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:target_dim]
    for i, comp in enumerate(components):
        pivot = np.abs(comp).argmax()
        if comp[pivot] < 0:
            components[i] = -comp
    projected = (centered @ components.T).astype(np.float32)
    return EmbeddingMatrix(ids=emb.ids, data=projected, space_tag=emb.space_tag)
