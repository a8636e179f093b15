import numpy as np
import pytest
from hypothesis import given, strategies as st

from shardsim.core import ShardAssignment, new_rng
from shardsim.txmatrix import TransactionMatrix, batch_cst_ratio, cst_stats, generate


def test_degenerate_generator():
    phi = generate(6, np.zeros(6, bool), new_rng(0, "tx"), base_mean=5, base_sd=0,
                   collusion_boost=0).phi
    off = ~np.eye(6, dtype=bool)
    assert np.all(phi[off] == 5) and np.all(np.diag(phi) == 0)


def test_collusion_raises_dishonest_pair_mean():
    bad = np.array([True, True, False, False, False])
    pair, honest = [], []
    for seed in range(1000):
        phi = generate(5, bad, new_rng(seed, "tx"), 10, 3, 10).phi
        pair.append(phi[0, 1])
        honest.append(phi[2:, 2:][np.triu_indices(3, 1)].mean())
    assert np.mean(pair) > np.mean(honest) + 5


def test_generator_is_deterministic():
    bad = np.array([True, False, True, False])
    a = generate(4, bad, new_rng(3, "tx"), 10, 3, 10)
    b = generate(4, bad, new_rng(3, "tx"), 10, 3, 10)
    assert np.array_equal(a.phi, b.phi)


def test_honest_part_independent_of_h():
    a = generate(8, np.zeros(8, bool), new_rng(1, "tx"), 10, 3, 10).phi
    bad = np.zeros(8, bool)
    bad[:3] = True
    b = generate(8, bad, new_rng(1, "tx"), 10, 3, 10).phi
    assert np.array_equal(a[3:, 3:], b[3:, 3:])
    assert np.array_equal(a[:3, 3:], b[:3, 3:])


def test_matrix_invariants_enforced():
    with pytest.raises(ValueError):
        TransactionMatrix([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        TransactionMatrix([[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        TransactionMatrix([[0, -1], [-1, 0]])


def test_cst_ratio_hand_example():
    # 4 nodes, split {0,1} | {2,3}; intra weights 3 + 4, cross 1+1+3+2
    phi = np.array([[0, 3, 1, 1],
                    [3, 0, 3, 2],
                    [1, 3, 0, 4],
                    [1, 2, 4, 0]])
    s = cst_stats(TransactionMatrix(phi), ShardAssignment([0, 0, 1, 1], 2))
    assert (s.phi_in, s.phi_cr) == (7, 7)
    assert s.ratio == pytest.approx(0.5)


def test_cst_ratio_five_fourteenths():
    phi = np.array([[0, 4, 1, 0],
                    [4, 0, 2, 2],
                    [1, 2, 0, 5],
                    [0, 2, 5, 0]])
    s = cst_stats(TransactionMatrix(phi), ShardAssignment([0, 0, 1, 1], 2))
    assert (s.phi_in, s.phi_cr) == (9, 5)
    assert s.ratio == pytest.approx(5 / 14)


def test_csv_round_trip(tmp_path):
    tx = generate(5, np.zeros(5, bool), new_rng(0, "tx"))
    tx.to_csv(tmp_path / "tx.csv")
    assert np.array_equal(TransactionMatrix.from_csv(tmp_path / "tx.csv").phi, tx.phi)


@given(st.integers(2, 12), st.integers(1, 4), st.integers(0, 2**31))
def test_batch_matches_scalar(n, d, seed):
    rng = np.random.default_rng(seed)
    tx = generate(n, rng.random(n) < 0.3, rng)
    vecs = rng.integers(0, d, size=(5, n))
    batch = batch_cst_ratio(tx.phi, vecs)
    for v, r in zip(vecs, batch):
        assert r == pytest.approx(cst_stats(tx, ShardAssignment(v, d)).ratio, abs=1e-12)
