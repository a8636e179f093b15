import numpy as np
import pytest
from hypothesis import given, strategies as st

from shardsim.config import RiskConfig, TrustConfig
from shardsim.core import ShardAssignment
from shardsim.risk import evaluate, f_intra, f_total
from shardsim.txmatrix import TxStats

T, R = TrustConfig(), RiskConfig()


def test_tolerance_arithmetic():
    assert f_intra(8) == 2 and f_intra(4) == 1 and f_intra(1) == 0
    assert f_total(16, 2) == 4 and f_total(12, 3) == 3 and f_total(4, 1) == 1


@given(st.integers(1, 200), st.integers(1, 10))
def test_total_bounded_by_per_shard(n, d):
    if n >= d:
        assert f_total(n, d) <= d * f_intra(n // d)
        if n % d == 0:
            assert f_total(n, d) == d * f_intra(n // d)


def _stats(ratio):
    return TxStats(0, 0, ratio)


A16 = ShardAssignment(np.repeat([0, 1], 8), 2)


def test_quiet_network():
    r = evaluate(np.ones(16), A16, _stats(0.0), T, R)
    assert not r.trigger and r.reason == "none"
    assert r.high_risk == ((), ())


def test_corrupted_shard_trigger():
    g = np.ones(16)
    g[[0, 1, 2]] = 0.5
    r = evaluate(g, A16, _stats(0.0), T, R)
    assert r.trigger and r.reason == "shard_corrupted:0"
    assert r.corrupted == (True, False) and r.high_risk[0] == (0, 1, 2)


def test_cst_trigger():
    r = evaluate(np.ones(16), A16, _stats(0.5), T, R)
    assert r.trigger and r.reason == "cst_exceeded"


def test_threshold_is_strict():
    g = np.ones(16)
    g[:3] = T.rho_t
    assert not evaluate(g, A16, _stats(0.0), T, R).trigger


@given(st.lists(st.floats(0, 1), min_size=16, max_size=16), st.floats(0, 1),
       st.integers(0, 15), st.floats(0, 1))
def test_monotonicity(g, ratio, node, drop):
    g = np.array(g)
    before = evaluate(g, A16, _stats(ratio), T, R)
    lowered = g.copy()
    lowered[node] = min(g[node], drop)
    after = evaluate(lowered, A16, _stats(ratio), T, R)
    assert all(set(a) <= set(b) for a, b in zip(before.high_risk, after.high_risk))
    if before.trigger:
        assert evaluate(g, A16, _stats(min(1.0, ratio + 0.1)), T, R).trigger
    if not before.trigger:
        assert before.cst_ratio <= R.rho_cr
        assert all(len(h) <= f_intra(8) for h in before.high_risk)


def test_report_fully_populated():
    g = np.linspace(0.3, 1, 16)
    r = evaluate(g, A16, _stats(0.9), T, R)
    assert len(r.shard_means) == 2
    assert r.grand_mean == pytest.approx(np.mean(r.shard_means))
