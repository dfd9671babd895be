"""k-means clustering, centroid-nearest selection, and sample assembly.

The sampler picks, per cluster, the member closest to the cluster
centroid; those pages form the collective part of the audit sample. The
assembler merges them with externally supplied structured/process pages
and tops the set up with the methodology's 10% random draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .embeddings import EmbeddingMatrix
from .errors import ContractError, ReferentialIntegrityError, SamplingError

PROVENANCES = ("structured", "collective", "random", "process")

KMEANS_MAX_ITER = 300
KMEANS_RESTARTS = 10


@dataclass
class ClusteringResult:
    """Assignments plus centroids; centroid i is the mean of cluster i."""

    assignments: np.ndarray  # shape (n,), int cluster ids
    centroids: np.ndarray    # shape (k, d)
    inertia: float
    n_iter: int

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster_id)

    def nonempty_clusters(self) -> list[int]:
        return [c for c in range(self.k) if (self.assignments == c).any()]


def _squared_distances(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (n, k), clipped at 0."""
    cross = data @ centers.T
    sq = (data * data).sum(axis=1)[:, None] + (centers * centers).sum(axis=1)[None, :]
    return np.maximum(sq - 2.0 * cross, 0.0)


def _kmeanspp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]), dtype=np.float64)
    centers[0] = data[rng.integers(n)]
    d2 = _squared_distances(data, centers[:1]).ravel()
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[i] = data[idx]
        d2 = np.minimum(d2, _squared_distances(data, centers[i:i + 1]).ravel())
    return centers


def kmeans(h: EmbeddingMatrix, k: int, seed: int,
           max_iter: int = KMEANS_MAX_ITER,
           n_init: int = KMEANS_RESTARTS) -> ClusteringResult:
    """Best of ``n_init`` Lloyd's runs with seeded k-means++ starts.

    Restart seeds are derived from ``seed``, so the result is
    deterministic; the lowest-inertia run wins, first run on ties.
    """
    n = h.n
    if k > n:
        raise ContractError(f"k={k} exceeds number of points n={n}")
    if k < 1:
        raise ContractError(f"k must be positive, got {k}")
    if n_init < 1:
        raise ContractError(f"n_init must be positive, got {n_init}")
    data = h.data.astype(np.float64)
    best: ClusteringResult | None = None
    for child_seed in np.random.SeedSequence(seed).spawn(n_init):
        result = _lloyd(data, k, np.random.default_rng(child_seed), max_iter)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def _lloyd(data: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int) -> ClusteringResult:
    """One k-means++ seeded Lloyd's run.

    Converges when assignments stop changing (or after ``max_iter``
    sweeps). An emptied cluster is re-seeded with the point farthest from
    its current centroid.
    """
    n = data.shape[0]
    centers = _kmeanspp_init(data, k, rng)
    assignments = np.full(n, -1, dtype=np.int64)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _squared_distances(data, centers)
        new_assign = d2.argmin(axis=1)
        # Re-seed empty clusters from the globally worst-fitting point.
        for cluster in range(k):
            if (new_assign == cluster).any():
                continue
            own = d2[np.arange(n), new_assign]
            farthest = int(own.argmax())
            new_assign[farthest] = cluster
            centers[cluster] = data[farthest]
            d2[:, cluster] = _squared_distances(data, centers[cluster:cluster + 1]).ravel()
        if (new_assign == assignments).all():
            break
        assignments = new_assign
        for cluster in range(k):
            mask = assignments == cluster
            centers[cluster] = data[mask].mean(axis=0)

    # Final means from the converged assignments.
    centroids = np.vstack([
        data[assignments == c].mean(axis=0) if (assignments == c).any()
        else centers[c]
        for c in range(k)
    ])
    inertia = float(
        ((data - centroids[assignments]) ** 2).sum()
    )
    return ClusteringResult(
        assignments=assignments, centroids=centroids, inertia=inertia, n_iter=n_iter
    )


def select_representatives(h: EmbeddingMatrix,
                           result: ClusteringResult) -> dict[int, int]:
    """Pick, per non-empty cluster, the member nearest its centroid.

    Returns {cluster_id: page_id}; ties broken by lowest page id.
    """
    data = h.data.astype(np.float64)
    ids = np.asarray(h.ids)
    chosen: dict[int, int] = {}
    for cluster in result.nonempty_clusters():
        rows = result.members(cluster)
        diffs = data[rows] - result.centroids[cluster]
        d2 = (diffs * diffs).sum(axis=1)
        member_ids = ids[rows]
        order = np.lexsort((member_ids, d2))  # distance first, then page id
        chosen[cluster] = int(member_ids[order[0]])
    return chosen


def random_sample(pool: Iterable[int], size: int, seed: int,
                  exclude: Iterable[int] = ()) -> list[int]:
    """Seeded uniform sample without replacement from pool minus exclude.

    The eligible pool is sorted before drawing, so the result does not
    depend on input ordering.
    """
    if size < 0:
        raise ContractError(f"sample size must be non-negative, got {size}")
    eligible = sorted(set(pool) - set(exclude))
    if size > len(eligible):
        raise SamplingError(
            f"requested {size} pages but only {len(eligible)} eligible "
            f"(short by {size - len(eligible)})"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(eligible), size=size, replace=False)
    return [eligible[i] for i in picked]


@dataclass(frozen=True)
class SampleEntry:
    page_id: int
    provenance: str
    cluster_id: int | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ContractError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "collective" and self.cluster_id is None:
            raise ContractError("collective entries need a cluster_id")


@dataclass
class SampleSet:
    """The assembled audit sample with per-page provenance."""

    entries: list[SampleEntry]
    params_echo: dict = field(default_factory=dict)

    def page_ids(self, provenance: str | None = None) -> list[int]:
        return [e.page_id for e in self.entries
                if provenance is None or e.provenance == provenance]

    def to_dicts(self, corpus: Corpus | None = None) -> list[dict]:
        out = []
        for e in self.entries:
            row = {"page_id": e.page_id, "provenance": e.provenance,
                   "cluster_id": e.cluster_id}
            if corpus is not None:
                row["url"] = corpus.pages[e.page_id].url
            out.append(row)
        return out


RANDOM_RATIO = 0.10  # random draw sized against the structured sample


def assemble_sample(collective: Mapping[int, int],
                    structured: Sequence[int],
                    processes: Sequence[int],
                    corpus: Corpus,
                    seed: int,
                    random_base: str = "structured") -> SampleSet:
    """Merge the sample parts and append the 10% random draw.

    ``collective`` maps cluster id to page id. Pages claimed by several
    parts are kept once with priority structured > process > collective.
    The random draw has size ceil(0.10 * |structured|) (or of the
    collective part when ``random_base`` is "collective"), taken from
    pages not already selected.
    """
    if random_base not in ("structured", "collective"):
        raise ContractError(f"unknown random_base {random_base!r}")
    valid = range(corpus.n)
    for pid in [*structured, *processes, *collective.values()]:
        if pid not in valid:
            raise ReferentialIntegrityError(f"page id {pid} not in corpus")

    entries: list[SampleEntry] = []
    taken: set[int] = set()
    structured_set: set[int] = set()
    for pid in structured:
        if pid not in taken:
            entries.append(SampleEntry(pid, "structured"))
            taken.add(pid)
            structured_set.add(pid)
    for pid in processes:
        if pid not in taken:
            entries.append(SampleEntry(pid, "process"))
            taken.add(pid)
    for cluster_id in sorted(collective):
        pid = collective[cluster_id]
        if pid not in taken:
            entries.append(SampleEntry(pid, "collective", cluster_id))
            taken.add(pid)

    base = len(structured_set) if random_base == "structured" else len(collective)
    random_count = math.ceil(RANDOM_RATIO * base)
    for pid in random_sample(range(corpus.n), random_count, seed, exclude=taken):
        entries.append(SampleEntry(pid, "random"))
        taken.add(pid)

    return SampleSet(entries=entries, params_echo={
        "seed": seed,
        "random_base": random_base,
        "random_count": random_count,
        "n_structured": len(structured_set),
        "n_collective": len(collective),
    })
