"""Cluster-guided edge refinement of the page link graph.

Each iteration re-embeds pages over the current graph, clusters them,
marks weak cross-cluster edges for removal, recovers strong same-cluster
non-edges, and applies both sets to produce the next graph.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .clustering import ClusteringResult, kmeans
from .corpus import Corpus
from .embeddings import EmbeddingMatrix, l2_normalize_rows
from .errors import ContractError
from .graph import PropagationParams, normalize_adjacency, propagate

log = logging.getLogger(__name__)

Edge = tuple[int, int]

THRESHOLD_MODES = ("absolute", "quantile")


@dataclass(frozen=True)
class RefinementParams:
    """Thresholds and loop controls for iterative edge refinement.

    ``gamma`` is the removal ceiling (existing cross-cluster edges with
    cosine below it are dropped), ``beta`` the recovery floor (absent
    same-cluster pairs with cosine above it are added). In "quantile"
    mode both are interpreted as quantiles of the respective candidate
    populations instead of absolute cosine values.
    """

    gamma: float
    beta: float
    iterations: int = 5
    k: int = 20
    seed: int = 0
    threshold_mode: str = "absolute"

    def __post_init__(self):
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ContractError(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.beta < self.gamma:
            raise ContractError(
                f"beta={self.beta} must be >= gamma={self.gamma}"
            )
        if self.threshold_mode == "absolute":
            if not -1.0 <= self.gamma <= 1.0 or not -1.0 <= self.beta <= 1.0:
                raise ContractError("cosine thresholds must lie in [-1, 1]")
        elif not 0.0 <= self.gamma <= 1.0 or not 0.0 <= self.beta <= 1.0:
            raise ContractError("quantile thresholds must lie in [0, 1]")
        if self.iterations < 0:
            raise ContractError(f"iterations must be >= 0, got {self.iterations}")
        if self.k < 1:
            raise ContractError(f"k must be positive, got {self.k}")


def canonical_edges(edges) -> set[Edge]:
    """Undirected edge set as {(u, v) with u < v}; self-loops dropped."""
    out: set[Edge] = set()
    for u, v in edges:
        if u == v:
            continue
        out.add((u, v) if u < v else (v, u))
    return out


def _pair_cosines(h: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    unit = l2_normalize_rows(h)
    return (unit[pairs[:, 0]] * unit[pairs[:, 1]]).sum(axis=1)


def compute_removal_set(assignments: np.ndarray, h_g: EmbeddingMatrix,
                        edges: set[Edge], gamma: float) -> set[Edge]:
    """Existing edges that cross clusters with cosine below gamma."""
    if not edges:
        return set()
    pairs = np.array(sorted(edges), dtype=np.int64)
    cross = assignments[pairs[:, 0]] != assignments[pairs[:, 1]]
    if not cross.any():
        return set()
    cos = _pair_cosines(h_g.data, pairs)
    keep = cross & (cos < gamma)
    return {(int(u), int(v)) for u, v in pairs[keep]}


def compute_recovery_set(assignments: np.ndarray, h_g: EmbeddingMatrix,
                         edges: set[Edge], beta: float) -> set[Edge]:
    """Absent same-cluster pairs with cosine above beta."""
    pairs = _same_cluster_non_edges(assignments, edges)
    if pairs.size == 0:
        return set()
    cos = _pair_cosines(h_g.data, pairs)
    return {(int(u), int(v)) for u, v in pairs[cos > beta]}


def _same_cluster_non_edges(assignments: np.ndarray,
                            edges: set[Edge]) -> np.ndarray:
    """Canonical (u < v) same-cluster pairs not currently connected."""
    rows: list[tuple[int, int]] = []
    for cluster in np.unique(assignments):
        members = np.flatnonzero(assignments == cluster)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                pair = (int(members[i]), int(members[j]))
                if pair not in edges:
                    rows.append(pair)
    if not rows:
        return np.empty((0, 2), dtype=np.int64)
    return np.array(sorted(rows), dtype=np.int64)


def _take_pairs(pairs: np.ndarray, order: np.ndarray, count: int) -> set[Edge]:
    return {(int(pairs[i, 0]), int(pairs[i, 1])) for i in order[:count]}


def _quantile_sets(assignments: np.ndarray, h_g: EmbeddingMatrix,
                   edges: set[Edge],
                   params: RefinementParams) -> tuple[set[Edge], set[Edge]]:
    """Rank-based selection when gamma/beta are tail fractions.

    Removal takes the weakest ceil(gamma * m) cross-cluster edges;
    recovery takes the strongest ceil((1 - beta) * m') same-cluster
    non-edges. Cosine ties resolve by pair order, so the result is
    deterministic.
    """
    e_rm: set[Edge] = set()
    if edges and params.gamma > 0.0:
        pairs = np.array(sorted(edges), dtype=np.int64)
        cross = pairs[assignments[pairs[:, 0]] != assignments[pairs[:, 1]]]
        if len(cross):
            cos = _pair_cosines(h_g.data, cross)
            count = math.ceil(params.gamma * len(cross))
            order = np.lexsort((cross[:, 1], cross[:, 0], cos))
            e_rm = _take_pairs(cross, order, count)
    e_rc: set[Edge] = set()
    if params.beta < 1.0:
        candidates = _same_cluster_non_edges(assignments, edges)
        if candidates.size:
            cos = _pair_cosines(h_g.data, candidates)
            count = math.ceil((1.0 - params.beta) * len(candidates))
            order = np.lexsort((candidates[:, 1], candidates[:, 0], -cos))
            e_rc = _take_pairs(candidates, order, count)
    return e_rm, e_rc


def refine_edges(e_a: set[Edge], e_rc: set[Edge], e_rm: set[Edge],
                 literal_intersection: bool = False) -> set[Edge]:
    """Apply a refinement step: (E ∪ recovered) minus removed.

    ``literal_intersection`` switches the combine rule to
    (E ∩ recovered) minus removed, which collapses the graph to the
    recovered overlap; kept only for comparison runs.
    """
    if not e_rm <= e_a:
        raise ContractError("removal set contains edges not in the graph")
    if not literal_intersection and e_rc & e_a:
        raise ContractError("recovery set overlaps existing edges")
    if literal_intersection:
        return (e_a & e_rc) - e_rm
    return (e_a | e_rc) - e_rm


def _edges_to_adjacency(edges: set[Edge], n: int) -> sparse.csr_matrix:
    if not edges:
        return sparse.csr_matrix((n, n), dtype=np.float64)
    pairs = np.array(sorted(edges), dtype=np.int64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.ones(len(rows), dtype=np.float64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


@dataclass
class GraspResult:
    """Final embedding, clustering, and graph after refinement."""

    h_g: EmbeddingMatrix
    clustering: ClusteringResult
    edges: set[Edge]
    history: list[dict] = field(default_factory=list)
    edgeless: bool = False


def grasp_iterate(corpus: Corpus, x: EmbeddingMatrix,
                  params: RefinementParams,
                  prop: PropagationParams | None = None,
                  norm_mode: str = "row",
                  literal_intersection: bool = False) -> GraspResult:
    """Run the propagate / cluster / refine loop over the corpus graph.

    With ``iterations=0`` this is a single propagate-and-cluster pass on
    the unmodified graph. An edgeless input graph is flagged and left
    unchanged; propagation then sees only self-loops.
    """
    if prop is None:
        prop = PropagationParams()
    if x.n != corpus.n:
        raise ContractError(
            f"embedding rows ({x.n}) do not match corpus size ({corpus.n})"
        )
    edges = canonical_edges(corpus.graph.edges)
    edgeless = not edges
    if edgeless:
        log.warning("input graph has no edges; refinement is a no-op")

    history: list[dict] = []
    h_g, clustering = _embed_and_cluster(x, edges, corpus.n, params, prop, norm_mode)
    for it in range(params.iterations):
        if params.threshold_mode == "quantile":
            e_rm, e_rc = _quantile_sets(
                clustering.assignments, h_g, edges, params
            )
        else:
            e_rm = compute_removal_set(
                clustering.assignments, h_g, edges, params.gamma
            )
            e_rc = compute_recovery_set(
                clustering.assignments, h_g, edges, params.beta
            )
        edges = refine_edges(edges, e_rc, e_rm,
                             literal_intersection=literal_intersection)
        history.append({
            "iteration": it + 1,
            "removed": len(e_rm),
            "recovered": len(e_rc),
            "edges": len(edges),
        })
        h_g, clustering = _embed_and_cluster(
            x, edges, corpus.n, params, prop, norm_mode
        )
    return GraspResult(h_g=h_g, clustering=clustering, edges=edges,
                       history=history, edgeless=edgeless)


def _embed_and_cluster(x: EmbeddingMatrix, edges: set[Edge], n: int,
                       params: RefinementParams, prop: PropagationParams,
                       norm_mode: str) -> tuple[EmbeddingMatrix, ClusteringResult]:
    adj = _edges_to_adjacency(edges, n)
    adj_norm = normalize_adjacency(adj, mode=norm_mode)
    h_g = propagate(x, adj_norm, prop)
    clustering = kmeans(h_g, params.k, params.seed)
    return h_g, clustering
