import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from couplab.coupling import (IDENTICAL, INF, BlockData, ConsistencyError, L0State, SchedulerConfig,
                              SchedulerConfigError, block_probabilities, estimate_block_probabilities, l0_update,
                              run_block_coupled, shifted_coupling_block_torus, simulate_pair)
from couplab.dynamics import LowHighToyModel, TorusModel, ZeroDrift, simulate
from couplab.estimators import torus_block_oracle
from couplab.rng import stream

TOY = LowHighToyModel(dt=1e-2, T=0.5)
TORUS = TorusModel(ZeroDrift(), dt=1e-2, T=1.0)


def block(n, **kw):
    f = np.zeros(n, bool)
    base = dict(stayed_equal=f, x_equal_end=f, H_end=np.zeros(n), energy_ok=~f, fresh_ok=~f)
    base.update({k: np.asarray(v) for k, v in kw.items()})
    return BlockData(**base)


# ---------------------------------------------------------------- l0 bookkeeping

def test_l0_transitions():
    s = L0State(3, np.array([1, 1, INF, INF, 2]), np.zeros((5, 2)))
    b = block(5, stayed_equal=[True, False, False, False, True], x_equal_end=[True, True, True, False, True],
              H_end=[0, 0, 0, 0, 0], energy_ok=[True, True, True, True, False])
    out = l0_update(s, b, d0=1.0)
    # persistence, restart, fresh start, stays inf, budget failure restarts
    assert out.k == 4
    assert out.l0.tolist() == [1, 4, 4, INF, 4]


def test_l0_fresh_needs_d0_and_energy():
    s = L0State(0, np.array([INF, INF, INF]), np.zeros((3, 2)))
    b = block(3, x_equal_end=[True, True, True], H_end=[0.5, 2.0, 0.5], fresh_ok=[True, True, False])
    assert l0_update(s, b, d0=1.0).l0.tolist() == [1, INF, INF]


def test_l0_consistency_error():
    s = L0State(0, np.array([0]), np.zeros((1, 2)))
    with pytest.raises(ConsistencyError):
        l0_update(s, block(1, stayed_equal=[True], x_differs=[True]), d0=1.0)
    with pytest.raises(ConsistencyError):
        l0_update(s, block(1, x_equal_end=[True], x_differs=[True]), d0=1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.booleans(), st.booleans(), st.booleans(), st.floats(0, 2)),
                min_size=1, max_size=30))
def test_l0_invariants_on_random_block_sequences(seq):
    s = L0State(0, np.array([INF]), np.zeros((1, 2)))
    for stayed, xeq, eok, fok, H in seq:
        stayed = stayed and xeq
        prev = s
        s = l0_update(s, block(1, stayed_equal=[stayed], x_equal_end=[xeq], energy_ok=[eok], fresh_ok=[fok],
                               H_end=[H], x_differs=[not xeq]), d0=1.0)
        l0 = s.l0[0]
        assert l0 == INF or 0 <= l0 <= s.k
        if l0 != INF and l0 <= prev.k:
            assert l0 == prev.l0[0]
        if l0 == s.k:
            assert xeq and H <= 1.0 and fok


def test_scheduler_validation():
    with pytest.raises(SchedulerConfigError):
        SchedulerConfig(T=0)
    with pytest.raises(SchedulerConfigError):
        SchedulerConfig(d0=2.0, R0=1.0)
    with pytest.raises(SchedulerConfigError):
        SchedulerConfig(attempt_length=2.0, T=1.0)
    cfg = SchedulerConfig(aleph=1.0, B=0.5, C_N=2.0, alpha=1.0)
    assert cfg.budget(0.5, False) == pytest.approx(1.25)
    assert cfg.budget(0.5, True) == pytest.approx(1.25 + 2.0 * 1.5)
    assert cfg.budget(2.0, False) == pytest.approx(1.0)


# ---------------------------------------------------------------- episodes

def test_identical_pair_always_coupled():
    cfg = SchedulerConfig(T=0.5, max_blocks=4)
    res = simulate_pair(TOY, [0.3, -0.2], [0.3, -0.2], cfg, 50, seed=1)
    assert np.all(res.branch == IDENTICAL)
    assert np.all(res.l0 == 0)
    assert np.all(res.dist == 0)


def test_episode_invariants_and_marginals():
    cfg = SchedulerConfig(T=0.5, max_blocks=3)
    n = 3000
    u1, u2 = np.array([1.0, 1.0]), np.array([-1.0, -1.0])
    res = simulate_pair(TOY, u1, u2, cfg, n, seed=2)
    ks = np.arange(cfg.max_blocks + 1)
    l0 = res.l0
    assert np.all((l0 == INF) | ((l0 >= 0) & (l0 <= ks)))
    coupled = l0 != INF
    assert np.all(res.x_equal[coupled])
    keep = coupled[:, 1:] & (l0[:, 1:] <= ks[:-1])
    assert np.all(l0[:, 1:][keep] == l0[:, :-1][keep])
    # each component on its own is a sample of the discretized model
    g = stream(77, 0)
    for u0, got in ((u1, res.u1[:, -1]), (u2, res.u2[:, -1])):
        db, de = TOY.draw_noise(g, n, TOY.steps_for(cfg.T * cfg.max_blocks))
        X, Y, _ = simulate(TOY, np.tile(u0, (n, 1)), db, de)
        direct = TOY.join(X, Y)[:, -1]
        for j in range(2):
            assert stats.ks_2samp(got[:, j], direct[:, j]).pvalue > 1e-3


def test_coupled_branch_requires_equal_low_modes():
    with pytest.raises(ConsistencyError):
        run_block_coupled(TOY, np.array([[0.0, 1.0]]), np.array([[0.5, 1.0]]), stream(0), 10)


def test_decoupling_rate_small_far_from_restart():
    cfg = SchedulerConfig(T=0.5, max_blocks=6)
    res = simulate_pair(TOY, [0.5, 2.0], [0.5, -2.0], cfg, 2000, seed=3)
    probs = block_probabilities(res, K=4)
    for e in probs["decoupling"][2:]:
        if e["rate"] is not None:
            assert e["ci"][0] <= np.exp(-e["k_minus_l"] * cfg.T)


def test_block_probabilities_schema_and_zero_budget():
    cfg = SchedulerConfig(T=0.5, max_blocks=3, aleph=0.0)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        out, _ = estimate_block_probabilities(TOY, cfg, 40, 5, [1.0, 0.0], [-1.0, 0.0])
    assert any(issubclass(x.category, RuntimeWarning) for x in w)
    assert out["p_minus1"]["estimate"] == 0.0
    lo, hi = out["p_minus1"]["ci"]
    assert 0.0 <= lo <= hi <= 1.0
    for e in out["p"]:
        assert len(e["ci"]) == 2


def test_episodes_independent_of_workers_and_units():
    cfg = SchedulerConfig(T=0.5, max_blocks=2)
    a = simulate_pair(TOY, [1.0, 1.0], [-1.0, -1.0], cfg, 60, seed=9, workers=1, unit_size=16)
    b = simulate_pair(TOY, [1.0, 1.0], [-1.0, -1.0], cfg, 60, seed=9, workers=3, unit_size=16)
    for k in ("u1", "u2", "l0", "branch", "dist"):
        np.testing.assert_array_equal(getattr(a, k), getattr(b, k))
    assert a.to_csv() == b.to_csv()


def test_episode_csv_columns():
    res = simulate_pair(TORUS, [0.1], [0.3], SchedulerConfig(max_blocks=2), 3, seed=0)
    lines = res.to_csv().strip().split("\n")
    assert lines[0] == "episode,k,l0,H_k,x_equal,energy_ok,dist"
    assert len(lines) == 1 + 3 * 3


# ---------------------------------------------------------------- torus shifted coupling

def test_torus_equal_points_always_couple():
    _, _, met = shifted_coupling_block_torus(TORUS, 0.4, 0.4, 1.0, stream(1), size=200)
    assert met.all()


def test_torus_success_nondecreasing_in_T():
    n = 4000
    ps = []
    for T in (0.25, 0.5, 1.0):
        _, _, met = shifted_coupling_block_torus(TORUS, 0.0, 0.45, T, stream(2, int(T * 100)), size=n)
        ps.append(met.mean())
        oracle = torus_block_oracle(0.45, T)
        assert abs(met.mean() - oracle) <= 3 * np.sqrt(oracle * (1 - oracle) / n)
    se = np.sqrt(0.25 / n)
    assert all(a <= b + 3 * se for a, b in zip(ps, ps[1:]))


def test_torus_not_coupled_probability_geometric():
    cfg = SchedulerConfig(T=1.0, max_blocks=6)
    n = 3000
    res = simulate_pair(TORUS, [0.0], [0.5], cfg, n, seed=4)
    p_min = torus_block_oracle(0.5, 1.0)
    apart = (res.dist > 1e-9).sum(axis=0)
    for k in range(1, cfg.max_blocks + 1):
        lo, _ = stats.beta.ppf([0.001, 0.999], apart[k] + 0.5, n - apart[k] + 0.5)
        assert lo <= (1 - p_min) ** k
    # once coupled, the torus pair stays equal
    eq = res.dist <= 1e-9
    assert np.all(eq[:, 1:] >= eq[:, :-1])
