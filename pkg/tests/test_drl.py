import numpy as np
import pytest
from hypothesis import given, strategies as st

from shardsim.config import DqnConfig, PpoConfig, SimConfig
from shardsim.core import DimensionMismatch, ShardAssignment, make_profiles, new_rng
from shardsim.consensus import normalize_trust
from shardsim.drl import DqnLearner, DrlStrategy, Mlp, PpoLearner, propose_from, repair
from shardsim.drl.ppo import clipped_surrogate, log_softmax, softmax
from shardsim.baselines import RandomStrategy
from shardsim.environment import initial_state, step_episode
from shardsim.harness import brute_force_oracle
from shardsim.reward import Snapshot, batch_rewards
from shardsim.txmatrix import TransactionMatrix


def _fd_check(net, x, up, step=1e-5):
    out, cache = net.forward(x)
    grads = net.backward(cache, up)
    worst = 0.0
    for p, g in zip(net.params, grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            keep = flat[k]
            flat[k] = keep + step
            hi = float((net(x) * up).sum())
            flat[k] = keep - step
            lo = float((net(x) * up).sum())
            flat[k] = keep
            num = (hi - lo) / (2 * step)
            worst = max(worst, abs(num - gflat[k]) / max(1.0, abs(num), abs(gflat[k])))
    return worst


def test_gradients_match_finite_differences():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        sizes = [int(rng.integers(2, 6)) for _ in range(int(rng.integers(2, 5)))]
        net = Mlp(sizes, rng)
        x = rng.normal(size=(3, sizes[0]))
        up = rng.normal(size=(3, sizes[-1]))
        assert _fd_check(net, x, up) < 1e-4


def test_mlp_trivia():
    assert np.all(Mlp([3, 4, 2])(np.ones(3)) == 0)
    rng = np.random.default_rng(0)
    lin = Mlp([3, 2], rng)
    x = rng.normal(size=3)
    assert np.allclose(lin(x), x @ lin.weights[0] + lin.biases[0])
    net = Mlp([5, 7, 3], rng)
    assert net.n_params == 6 * 7 + 8 * 3
    assert np.array_equal(net(np.ones(5)), net(np.ones(5)))
    with pytest.raises(DimensionMismatch):
        net(np.ones(4))
    out, cache = net.forward(np.ones(5))
    assert all(np.all(g == 0) for g in net.backward(cache, np.zeros(3)))
    g1 = net.backward(cache, np.arange(3.0))
    g2 = net.backward(cache, 2 * np.arange(3.0))
    assert all(np.allclose(2 * a, b) for a, b in zip(g1, g2))
    assert np.array_equal(Mlp.from_json(net.to_json())(np.ones(5)), net(np.ones(5)))


def test_clip_identities():
    adv = np.array([1.0, -2.0, 0.5])
    val, _ = clipped_surrogate(np.ones(3), adv, 0.2)
    assert np.array_equal(val, adv)
    _, grad = clipped_surrogate(np.array([1.5]), np.array([1.0]), 0.2)
    assert grad[0] == 0


@given(st.integers(0, 2**31))
def test_softmax_rows_sum_to_one(seed):
    logits = np.random.default_rng(seed).normal(0, 20, size=(6, 3))
    assert np.allclose(softmax(logits).sum(axis=1), 1, atol=1e-9)
    assert np.allclose(np.exp(log_softmax(logits)), softmax(logits))


def test_dqn_regresses_constant_reward():
    learner = DqnLearner(4, 2, DqnConfig(), new_rng(0, "t"))
    state = np.linspace(0, 1, 4 * 5)
    learner.train(state, lambda a: np.full(len(a), 0.7), new_rng(1, "t"), epochs=600)
    assert np.all(np.abs(learner.q_values(state) - 0.7) < 0.05)


def test_eps_zero_deterministic():
    learner = DqnLearner(4, 2, DqnConfig(), new_rng(0, "t"))
    state = np.linspace(0, 1, 20)
    a = learner.act(state, 0.0, new_rng(1, "a"), 5)
    b = learner.act(state, 0.0, new_rng(2, "b"), 5)
    assert np.array_equal(a, b)


def test_repair_cases():
    scores = np.tile([1.0, 0.0], (6, 1))
    vec, moved = repair(np.zeros(6, int), scores, 2)
    assert moved and np.bincount(vec, minlength=2).min() >= 2
    ok = np.array([0, 0, 0, 1, 1, 1])
    out, moved = repair(ok, scores, 2)
    assert not moved and np.array_equal(out, ok)


@given(st.integers(4, 12), st.integers(2, 3), st.integers(0, 2**31))
def test_repair_moves_only_weakest_margins(n, d, seed):
    rng = np.random.default_rng(seed)
    n_min = max(1, n // (2 * d))
    scores = rng.normal(size=(n, d))
    raw = np.argmax(scores, axis=1)
    vec, moved = repair(raw, scores, n_min)
    assert np.bincount(vec, minlength=d).min() >= n_min
    changed = np.flatnonzero(vec != raw)
    assert moved == bool(len(changed))
    for i in changed:
        src, dst = raw[i], vec[i]
        cutoff = scores[i, src] - scores[i, dst]
        # any node kept in src must have had a margin at least as strong toward dst
        kept = np.flatnonzero((vec == src) & (raw == src))
        assert np.all(scores[kept, src] - scores[kept, dst] >= cutoff - 1e-12)


def _toy_snapshot(seed):
    rng = np.random.default_rng(seed)
    g = rng.uniform(0.3, 1.0, 4)
    phi = rng.integers(0, 6, (4, 4))
    phi = np.triu(phi, 1) + np.triu(phi, 1).T
    return Snapshot(normalize_trust(g), g, TransactionMatrix(phi),
                    ShardAssignment([0, 1, 0, 1], 2), make_profiles(4, []))


def _toy_cfg():
    return SimConfig().replace(network={"n_total": 4, "d_shards": 2, "n_min": 1})


TOY_EPOCHS = 300  # the toy optimum is reached reliably only well past the default budget


@pytest.mark.parametrize("kind", ["dqn", "ppo"])
def test_toy_oracle(kind):
    cfg = _toy_cfg()
    hits = 0
    for seed in range(10):
        snap = _toy_snapshot(seed)
        _, best = brute_force_oracle(snap, cfg)
        strat = DrlStrategy(kind, cfg, seed=seed, use_best_seen=False)
        vec, _ = propose_from(strat.train(snap, new_rng(seed, "toy"), TOY_EPOCHS), cfg)
        r = batch_rewards(snap, vec[None, :], cfg)[0]
        hits += r >= best - 0.05 * abs(best)
    assert hits >= 8


@pytest.mark.parametrize("kind", ["dqn", "ppo"])
def test_training_curve_improves(kind):
    cfg = SimConfig()
    ok = 0
    for seed in range(10):
        state = initial_state(cfg.replace(network={"seed": seed}))
        snap = step_episode(state, RandomStrategy(), cfg).last_snapshot
        strat = DrlStrategy(kind, cfg, seed=seed)
        hist = strat.train(snap, new_rng(seed, "curve")).history
        first = np.mean([h["mean_reward"] for h in hist[:10]])
        last = np.mean([h["mean_reward"] for h in hist[-10:]])
        ok += last >= first
    assert ok >= 9


@pytest.mark.parametrize("kind", ["dqn", "ppo"])
def test_training_deterministic(kind):
    cfg = _toy_cfg()
    snap = _toy_snapshot(3)
    a = DrlStrategy(kind, cfg, seed=1)
    b = DrlStrategy(kind, cfg, seed=1)
    a.train(snap, new_rng(5, "x"), epochs=5)
    b.train(snap, new_rng(5, "x"), epochs=5)
    assert a.policy_params() == b.policy_params()
