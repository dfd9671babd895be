"""Independent brute-force checks used by the tests.

Deliberately slow and simple: plain Python loops and exhaustive
enumeration, sharing no code with the package under test.
"""

from __future__ import annotations

import itertools
import math


def cluster_means(data, assignments):
    """{cluster: mean vector} computed with plain loops."""
    dim = len(data[0])
    out = {}
    for cluster in sorted(set(assignments)):
        rows = [i for i, a in enumerate(assignments) if a == cluster]
        out[cluster] = [
            sum(data[r][j] for r in rows) / len(rows) for j in range(dim)
        ]
    return out


def nearest_members(data, assignments, ids, means=None):
    """Per cluster, the id of the member nearest the cluster mean.

    Strictly smaller squared distance wins; exact ties go to the lower
    page id. ``means`` may be supplied ({cluster: vector}) to scan
    against externally computed centroids.
    """
    if means is None:
        means = cluster_means(data, assignments)
    out = {}
    for cluster, mean in means.items():
        best_id = None
        best_d = None
        for i, a in enumerate(assignments):
            if a != cluster:
                continue
            d = sum((data[i][j] - mean[j]) ** 2 for j in range(len(mean)))
            if best_d is None or d < best_d or (d == best_d and ids[i] < best_id):
                best_id, best_d = ids[i], d
        out[cluster] = best_id
    return out


def partition_inertia(data, groups):
    total = 0.0
    for rows in groups:
        dim = len(data[0])
        mean = [sum(data[r][j] for r in rows) / len(rows) for j in range(dim)]
        for r in rows:
            total += sum((data[r][j] - mean[j]) ** 2 for j in range(dim))
    return total


def best_two_partition_inertia(data):
    """Optimal 2-cluster inertia by enumerating every bipartition."""
    n = len(data)
    best = math.inf
    # point 0 pinned to group A so each unordered bipartition appears once
    for mask in range(1, 1 << (n - 1)):
        group_a = [0] + [i for i in range(1, n) if not mask >> (i - 1) & 1]
        group_b = [i for i in range(1, n) if mask >> (i - 1) & 1]
        if not group_b:
            continue
        best = min(best, partition_inertia(data, [group_a, group_b]))
    return best


def cosine(u, v):
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def mean_pairwise_cosine(vectors):
    total = 0.0
    pairs = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            total += cosine(vectors[i], vectors[j])
            pairs += 1
    return total / pairs


def removal_set(assignments, vectors, edges, gamma):
    """Cross-cluster edges with cosine below gamma, by direct loops."""
    out = set()
    for u, v in edges:
        if assignments[u] != assignments[v] and cosine(vectors[u], vectors[v]) < gamma:
            out.add((u, v))
    return out


def recovery_set(assignments, vectors, edges, beta):
    """Same-cluster non-edges with cosine above beta, by direct loops."""
    n = len(assignments)
    out = set()
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) in edges or assignments[u] != assignments[v]:
                continue
            if cosine(vectors[u], vectors[v]) > beta:
                out.add((u, v))
    return out


def best_label_agreement(assignments, truth):
    """Max fraction of agreeing labels over cluster-label permutations."""
    clusters = sorted(set(assignments))
    labels = sorted(set(truth))
    best = 0.0
    for perm in itertools.permutations(labels, len(clusters)):
        mapping = dict(zip(clusters, perm))
        hits = sum(
            1 for a, t in zip(assignments, truth) if mapping[a] == t
        )
        best = max(best, hits / len(truth))
    return best
