import json

import numpy as np
import pytest

from oracles import dendrogram_leaf_sets, naive_agglomerate
from vlmd.analysis import (
    channel_distances,
    cluster_coefficients,
    cluster_distances,
    cluster_modes,
    coefficient_distances,
    correlation_distances,
)
from vlmd.exceptions import InvalidInput


def _assert_matches_oracle(dendro, D, method="average"):
    got = dendrogram_leaf_sets(dendro)
    want = naive_agglomerate(D, method)
    assert len(got) == len(want) == D.shape[0] - 1
    for (ga, gb, gh), (wa, wb, wh) in zip(got, want):
        assert {ga, gb} == {wa, wb}
        assert gh == pytest.approx(wh, rel=0, abs=1e-12)


def test_identical_profiles_merge_first_at_zero():
    A = np.array([[1.0, 1.0, 0.0], [0.5, 0.5, -1.0]])
    d = cluster_coefficients(A, labels=["x", "y", "z"])
    a, b, h, size = d.merges[0]
    assert {a, b} == {0, 1} and h == 0.0 and size == 2


def test_near_origin_pair_first():
    A = np.array([[0.0, 0.0, 10.0], [0.0, 1.0, 10.0]])
    d = cluster_coefficients(A)
    assert {d.merges[0][0], d.merges[0][1]} == {0, 1}
    assert d.merges[0][2] == 1.0


@pytest.mark.parametrize("method", ["average", "single", "complete"])
def test_coefficients_match_naive_oracle(method):
    A = np.random.default_rng(0).uniform(-1, 1, (4, 6))
    d = cluster_coefficients(A, method=method)
    _assert_matches_oracle(d, coefficient_distances(A), method)


def test_modes_match_naive_oracle():
    U = np.random.default_rng(1).standard_normal((5, 50))
    D, _ = correlation_distances(U)
    _assert_matches_oracle(cluster_modes(U), D)


def test_euclidean_distances_direct():
    A = np.random.default_rng(2).standard_normal((3, 4))
    D = coefficient_distances(A)
    for i in range(4):
        for j in range(4):
            assert D[i, j] == pytest.approx(np.linalg.norm(A[:, i] - A[:, j]), abs=1e-14)


def test_mode_clustering_identical_and_antiphase():
    t = np.arange(200)
    s = np.sin(2 * np.pi * 0.05 * t)
    U = np.vstack([s, s, -s])
    d = cluster_modes(U)
    assert {d.merges[0][0], d.merges[0][1]} == {0, 1} and d.merges[0][2] == pytest.approx(0.0, abs=1e-12)
    assert d.merges[1][2] == pytest.approx(2.0)


def test_zero_variance_channel_flagged():
    rng = np.random.default_rng(3)
    U = np.vstack([rng.standard_normal(30), np.full(30, 2.0), rng.standard_normal(30)])
    D, flat = correlation_distances(U)
    assert flat == [1]
    assert D[1, 0] == 1.0 and D[0, 1] == 1.0 and D[1, 1] == 0.0
    d = cluster_modes(U, labels=["a", "b", "c"])
    assert d.flagged == ["b"]


def test_distance_bounds():
    U = np.random.default_rng(4).standard_normal((6, 20))
    D, _ = correlation_distances(U)
    assert np.all(D >= 0) and np.all(D <= 2)


def test_invariants_n_minus_one_monotone():
    A = np.random.default_rng(5).standard_normal((3, 9))
    d = cluster_coefficients(A)
    assert len(d.merges) == 8
    assert np.all(np.diff(d.heights) >= 0)
    assert d.merges[-1][3] == 9


def test_permutation_equivariance():
    A = np.random.default_rng(6).standard_normal((3, 7))
    perm = np.random.default_rng(7).permutation(7)
    a = cluster_coefficients(A)
    b = cluster_coefficients(A[:, perm])
    np.testing.assert_allclose(np.sort(a.heights), np.sort(b.heights), atol=1e-12)


def test_json_export_and_truncation():
    A = np.random.default_rng(8).standard_normal((2, 6))
    d = cluster_coefficients(A, labels=list("abcdef"))
    full = json.loads(d.to_json())
    assert full["leaf_labels"] == list("abcdef") and len(full["merges"]) == 5
    top = d.to_dict(max_leaves=3)
    assert len(top["merges"]) == 2 and top["truncated_to"] == 3
    assert top["merges"] == full["merges"][-2:]


def test_newick_export():
    A = np.array([[0.0, 0.0, 10.0], [0.0, 1.0, 10.0]])
    nwk = cluster_coefficients(A, labels=["p", "q", "r s"]).to_newick()
    assert nwk.endswith(";")
    assert nwk.count("(") == nwk.count(")") == 2
    for name in ("p", "q", "'r s'"):
        assert name in nwk
    # two-leaf tree is a single merge
    two = cluster_coefficients(np.array([[0.0, 2.0]]), labels=["u", "v"])
    assert len(two.merges) == 1 and two.to_newick() == "(u:2,v:2);"


def test_errors():
    with pytest.raises(InvalidInput):
        cluster_coefficients(np.ones((3, 1)))
    with pytest.raises(InvalidInput):
        cluster_modes(np.ones((2, 2)))
    with pytest.raises(InvalidInput):
        cluster_distances(np.zeros((3, 3)), method="ward")
    with pytest.raises(InvalidInput):
        cluster_coefficients(np.ones((2, 3)), labels=["a"])
    with pytest.raises(InvalidInput):
        channel_distances(np.ones((3, 3)), metric="cosine")
