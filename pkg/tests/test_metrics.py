"""Sample metrics, statistical baseline features, PCA reduction."""

import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from grasp.errors import ContractError, UndefinedMetricError
from grasp.metrics import (
    d_intra_inter,
    intra_cluster_mean,
    mean_pairwise_cosine,
    pca_reduce,
    s_sampled,
    sdc_features,
)

import oracles
from helpers import emb, make_corpus


def test_cosine_orthogonal_pair():
    assert mean_pairwise_cosine(np.array([[1.0, 0.0], [0.0, 1.0]])) == 0.0


def test_cosine_parallel_rows():
    out = mean_pairwise_cosine(np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]))
    assert out == pytest.approx(1.0, abs=1e-12)


def test_cosine_hand_computed_sqrt2_over_3():
    r = 1.0 / math.sqrt(2.0)
    out = mean_pairwise_cosine(np.array([[1.0, 0.0], [0.0, 1.0], [r, r]]))
    assert out == pytest.approx(math.sqrt(2.0) / 3.0, abs=1e-12)


def test_cosine_needs_two_vectors():
    with pytest.raises(UndefinedMetricError):
        mean_pairwise_cosine(np.array([[1.0, 0.0]]))


def test_cosine_zero_vector_counts_as_zero():
    out = mean_pairwise_cosine(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert out == 0.0


def test_cosine_matches_bruteforce():
    rng = np.random.default_rng(1)
    for _ in range(20):
        data = rng.normal(size=(int(rng.integers(2, 9)), 4))
        got = mean_pairwise_cosine(data)
        want = oracles.mean_pairwise_cosine(data.tolist())
        assert got == pytest.approx(want, abs=1e-12)


def test_s_sampled_orthogonal_and_identical():
    e = emb([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    assert s_sampled([0, 1], e) == pytest.approx(0.0, abs=1e-12)
    assert s_sampled([0, 2], e) == pytest.approx(100.0, abs=1e-9)
    with pytest.raises(UndefinedMetricError):
        s_sampled([0], e)


def test_d_maximal_separation():
    e = emb([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    assignments = np.array([0, 0, 1, 1])
    assert intra_cluster_mean(assignments, e) == pytest.approx(100.0)
    assert d_intra_inter(assignments, e, [0, 2]) == pytest.approx(100.0)


def test_d_degenerate_all_identical():
    e = emb([[1.0, 1.0]] * 4)
    assignments = np.array([0, 0, 1, 1])
    assert d_intra_inter(assignments, e, [0, 2]) == pytest.approx(0.0, abs=1e-9)


def test_intra_needs_a_multi_member_cluster():
    e = emb([[1.0], [2.0]])
    with pytest.raises(UndefinedMetricError):
        intra_cluster_mean(np.array([0, 1]), e)


def test_intra_unweighted_vs_pooled():
    # cluster 0: two identical rows (1 pair at cos 1)
    # cluster 1: three mutually orthogonal rows (3 pairs at cos 0)
    e = emb([
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    assignments = np.array([0, 0, 1, 1, 1])
    assert intra_cluster_mean(assignments, e) == pytest.approx(50.0)
    assert intra_cluster_mean(assignments, e, pooled=True) == pytest.approx(25.0)


def test_identity_and_scale_invariance_fuzz():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(4, 12))
        data = rng.normal(size=(n, 5)).astype(np.float32)
        assignments = rng.integers(3, size=n)
        if np.bincount(assignments).max() < 2:
            assignments[:2] = 0
        sample = rng.choice(n, size=3, replace=False).tolist()
        e = emb(data)
        d = d_intra_inter(assignments, e, sample)
        intra = intra_cluster_mean(assignments, e)
        s = s_sampled(sample, e)
        assert d == pytest.approx(intra - s, abs=1e-9)
        # powers of two rescale rows exactly in float32
        scales = 2.0 ** rng.integers(-3, 4, size=n)
        scaled = emb(data * scales[:, None].astype(np.float32))
        assert s_sampled(sample, scaled) == pytest.approx(s, abs=1e-9)
        assert d_intra_inter(assignments, scaled, sample) == pytest.approx(
            d, abs=1e-9)


TAGS_DOM = "<html><body><p></p><p></p></body></html>"


def test_sdc_tags_histogram(tmp_path):
    corpus = make_corpus(tmp_path, [TAGS_DOM, "<html></html>"])
    feats = sdc_features(corpus, "tags")
    # vocabulary is sorted: body, html, p; row 0 counts are 1, 1, 2
    expected = np.array([1.0, 1.0, 2.0])
    expected /= np.linalg.norm(expected)
    assert np.allclose(feats.data[0], expected, atol=1e-6)


def test_sdc_tree_depth_and_count(tmp_path):
    corpus = make_corpus(tmp_path, [TAGS_DOM, "<html></html>"])
    feats = sdc_features(corpus, "tree")
    row = feats.data[0]
    # raw vector starts (max_depth=3, node_count=4); normalization
    # preserves the 3:4 ratio
    assert row[0] / row[1] == pytest.approx(3.0 / 4.0, abs=1e-6)
    # branching buckets: two leaves, one 1-child node, one 2-child node
    assert row[2] / row[1] == pytest.approx(2.0 / 4.0, abs=1e-6)
    assert row[3] / row[1] == pytest.approx(1.0 / 4.0, abs=1e-6)
    assert row[4] / row[1] == pytest.approx(1.0 / 4.0, abs=1e-6)


def test_sdc_identical_doms_identical_rows(tmp_path):
    page = "<html><body><p>same words here</p></body></html>"
    corpus = make_corpus(tmp_path, [page, page, TAGS_DOM])
    for kind in ("content", "tags", "tree", "structure", "struc_cont"):
        feats = sdc_features(corpus, kind)
        assert np.array_equal(feats.data[0], feats.data[1])


def test_sdc_rows_are_normalized(tmp_path):
    corpus = make_corpus(tmp_path, [TAGS_DOM,
                                    "<html><body><p>words</p></body></html>"])
    for kind in ("content", "tags", "tree", "structure", "struc_cont"):
        feats = sdc_features(corpus, kind)
        norms = np.linalg.norm(feats.data, axis=1)
        nonzero = norms > 0
        assert np.allclose(norms[nonzero], 1.0, atol=1e-6)


def test_sdc_page_order_does_not_change_features(tmp_path):
    pages = [
        "<html><body><p>alpha beta gamma</p></body></html>",
        "<html><body><ul><li>delta</li></ul></body></html>",
        "<html><body><table><tr><td>eps</td></tr></table></body></html>",
    ]
    a = make_corpus(tmp_path / "fwd", pages)
    b = make_corpus(tmp_path / "rev", pages[::-1])
    for kind in ("content", "structure", "struc_cont"):
        fa = sdc_features(a, kind)
        fb = sdc_features(b, kind)
        assert np.array_equal(fa.data, fb.data[::-1])


def test_sdc_struc_cont_concatenates(tmp_path):
    corpus = make_corpus(tmp_path, [TAGS_DOM, "<html><body>x y</body></html>"])
    structure = sdc_features(corpus, "structure")
    content = sdc_features(corpus, "content")
    combined = sdc_features(corpus, "struc_cont")
    assert combined.dim == structure.dim + content.dim


def test_sdc_unknown_kind(tmp_path):
    corpus = make_corpus(tmp_path, [TAGS_DOM])
    with pytest.raises(ContractError):
        sdc_features(corpus, "layout")


def test_pca_rank_one_line():
    rng = np.random.default_rng(3)
    t = rng.normal(size=40)
    data = np.stack([t, t], axis=1) + rng.normal(scale=1e-4, size=(40, 2))
    e = emb(data)
    reduced = pca_reduce(e, 1)
    total = ((data - data.mean(axis=0)) ** 2).sum()
    explained = (reduced.data.astype(np.float64) ** 2).sum()
    assert explained / total >= 0.999


def test_pca_full_dim_is_isometric():
    rng = np.random.default_rng(4)
    data = rng.normal(size=(12, 5)).astype(np.float32)
    e = emb(data)
    reduced = pca_reduce(e, 5)
    centered = data.astype(np.float64) - data.astype(np.float64).mean(axis=0)
    assert np.allclose(pdist(reduced.data.astype(np.float64)), pdist(centered),
                       atol=1e-5)
    assert np.allclose(np.linalg.norm(reduced.data, axis=1),
                       np.linalg.norm(centered, axis=1), atol=1e-5)


def test_pca_duplicate_column_preserves_distances():
    rng = np.random.default_rng(5)
    base = rng.normal(size=(15, 3))
    with_dup = np.hstack([base, base[:, 2:3]])
    e = emb(with_dup)
    reduced = pca_reduce(e, 4)
    centered = with_dup - with_dup.mean(axis=0)
    assert np.allclose(pdist(reduced.data.astype(np.float64)), pdist(centered),
                       atol=1e-5)
    again = pca_reduce(e, 4)
    assert np.array_equal(reduced.data, again.data)


def test_pca_target_dim_checked():
    e = emb(np.zeros((3, 2), np.float32))
    with pytest.raises(ContractError):
        pca_reduce(e, 3)
    with pytest.raises(ContractError):
        pca_reduce(e, 0)
