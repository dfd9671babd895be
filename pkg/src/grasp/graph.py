"""Adjacency normalization and neighborhood propagation.

Propagation is parameter-free so the whole pipeline stays deterministic:
the homophilic variant averages features over L-hop neighborhoods, the
heterophilic variant keeps each hop as a separate block so that links
across dissimilar pages cannot average page identities away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .embeddings import EmbeddingMatrix
from .errors import ContractError

VARIANTS = ("homophilic", "heterophilic")

MAX_LAYERS = 8  # guard against oversmoothing / feature blowup


@dataclass(frozen=True)
class PropagationParams:
    variant: str = "homophilic"
    layers: int = 2

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ContractError(f"unknown propagation variant {self.variant!r}")
        if not (0 <= self.layers <= MAX_LAYERS):
            raise ContractError(f"layers must be in 0..{MAX_LAYERS}, got {self.layers}")


def normalize_adjacency(adj: sparse.spmatrix, mode: str = "row") -> sparse.csr_matrix:
    """Self-loop augmented degree normalization of a symmetric adjacency.

    ``row`` mode returns D^-1 (A + I), whose rows sum to one; ``symmetric``
    returns D^-1/2 (A + I) D^-1/2.
    """
    adj = sparse.csr_matrix(adj)
    if adj.shape[0] != adj.shape[1]:
        raise ContractError(f"adjacency must be square, got {adj.shape}")
    if (adj != adj.T).nnz != 0:
        raise ContractError("adjacency must be symmetric")
    if adj.diagonal().any():
        raise ContractError("adjacency must have a zero diagonal")
    n = adj.shape[0]
    with_loops = adj + sparse.identity(n, format="csr")
    degrees = np.asarray(with_loops.sum(axis=1)).ravel()
    if mode == "row":
        inv = sparse.diags(1.0 / degrees)
        return sparse.csr_matrix(inv @ with_loops)
    if mode == "symmetric":
        inv_sqrt = sparse.diags(1.0 / np.sqrt(degrees))
        return sparse.csr_matrix(inv_sqrt @ with_loops @ inv_sqrt)
    raise ContractError(f"unknown normalization mode {mode!r}")


def propagate(x: EmbeddingMatrix, adj_norm: sparse.spmatrix,
              params: PropagationParams) -> EmbeddingMatrix:
    """Propagate node features over the normalized adjacency.

    homophilic:   H = A_hat^L X               (dim preserved)
    heterophilic: H = X || A_hat X || ... || A_hat^L X   (dim = (L+1) d)
    """
    if adj_norm.shape[0] != x.n:
        raise ContractError(
            f"adjacency has {adj_norm.shape[0]} rows for {x.n} embedding rows"
        )
    current = x.data.astype(np.float64)
    if params.variant == "homophilic":
        for _ in range(params.layers):
            current = adj_norm @ current
        out = current
    else:
        blocks = [current]
        for _ in range(params.layers):
            current = adj_norm @ current
            blocks.append(current)
        out = np.hstack(blocks)
    return EmbeddingMatrix(ids=x.ids, data=out.astype(np.float32), space_tag="graph")
