import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from polecart.env import CartPoleEnv, CartState
from polecart.records import null_clock
from polecart.schedules import Schedule
from polecart.tabular import Discretizer, discretize, new_table, q_update, train_tabular

# deterministic 3-state, 2-action chain: (next_state, reward, terminal)
CHAIN = {
    (0, 0): (0, 0.0, False),
    (0, 1): (1, 0.0, False),
    (1, 0): (0, 0.0, False),
    (1, 1): (2, 0.5, False),
    (2, 0): (1, 0.0, False),
    (2, 1): (2, 1.0, False),
}


def value_iteration(mdp, gamma, n_states=3, n_actions=2, tol=1e-14):
    v = np.zeros(n_states)
    while True:
        q = np.zeros((n_states, n_actions))
        for (s, a), (s2, r, term) in mdp.items():
            q[s, a] = r + (0.0 if term else gamma * v[s2])
        v_new = q.max(axis=1)
        if np.max(np.abs(v_new - v)) < tol:
            return q
        v = v_new


def q_sweeps(mdp, gamma, sweeps, alpha=1.0):
    table = new_table(3)
    for _ in range(sweeps):
        for (s, a), (s2, r, term) in mdp.items():
            q_update(table, s, a, r, s2, term, alpha, gamma)
    return table


class TestDiscretize:
    def test_lower_bounds_map_to_zero(self):
        d = Discretizer()
        assert discretize(d, [lo for lo, _ in d.ranges]) == 0

    def test_upper_bounds_map_to_last_index(self):
        d = Discretizer()
        assert discretize(d, [hi for _, hi in d.ranges]) == d.n_states - 1

    def test_center_cell_default_config(self):
        # cells (4, 4, 6, 6) in radix (8, 8, 12, 12): ((4*8 + 4)*12 + 6)*12 + 6
        assert discretize(Discretizer(), CartState(0.0, 0.0, 0.0, 0.0)) == 5262

    def test_out_of_range_is_clipped(self):
        d = Discretizer()
        assert d.index([100, -100, 5, -5]) == d.index([2.4, -3.0, 0.2095, -3.5])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=4))
    def test_index_in_range(self, s):
        d = Discretizer()
        assert 0 <= d.index(s) < d.n_states

    def test_invalid_bins_rejected(self):
        with pytest.raises(ValueError):
            Discretizer(bins=(0, 1, 1, 1))


class TestUpdate:
    def test_alpha_one_gamma_zero_collapses_to_reward(self):
        t = new_table(4)
        q_update(t, 0, 1, 1.0, 2, False, 1.0, 0.0)
        assert t[0, 1] == 1.0

    def test_worked_example(self):
        t = new_table(4)
        t[2] = [2.0, -1.0]
        q_update(t, 0, 0, 1.0, 2, False, 0.5, 0.9)
        assert t[0, 0] == pytest.approx(1.4, abs=1e-15)

    def test_terminal_masks_bootstrap(self):
        t = new_table(4)
        t[2] = [7.0, 9.0]
        t[0, 1] = 3.0
        q_update(t, 0, 1, 0.0, 2, True, 1.0, 0.9)
        assert t[0, 1] == 0.0

    def test_only_target_cell_changes(self, rng):
        t = rng.normal(size=(10, 2))
        before = t.copy()
        q_update(t, 3, 1, 1.0, 7, False, 0.3, 0.9)
        changed = np.argwhere(t != before)
        assert changed.tolist() == [[3, 1]]

    def test_fresh_table_is_zero(self):
        assert not new_table(Discretizer().n_states).any()


class TestChainOracle:
    def test_sweeps_converge_to_value_iteration(self):
        q_star = value_iteration(CHAIN, 0.9)
        q = q_sweeps(CHAIN, 0.9, 400)
        assert np.max(np.abs(q - q_star)) < 1e-9

    def test_oracle_hand_value(self):
        # state 2 loops on reward 1: Q*(2,1) = 1 / (1 - 0.9)
        assert value_iteration(CHAIN, 0.9)[2, 1] == pytest.approx(10.0, abs=1e-12)

    def test_terminal_chain(self):
        mdp = dict(CHAIN)
        mdp[(2, 1)] = (2, 1.0, True)
        q = q_sweeps(mdp, 0.9, 400)
        assert np.max(np.abs(q - value_iteration(mdp, 0.9))) < 1e-9


@settings(max_examples=50)
@given(
    st.lists(
        st.tuples(
            st.integers(0, 4),
            st.integers(0, 1),
            st.sampled_from([0.0, 1.0]),
            st.integers(0, 4),
            st.booleans(),
        ),
        max_size=300,
    ),
    st.floats(0.01, 1.0),
    st.floats(0.0, 0.99),
)
def test_values_stay_bounded(updates, alpha, gamma):
    t = new_table(5)
    for s, a, r, s2, term in updates:
        q_update(t, s, a, r, s2, term, alpha, gamma)
    assert np.all(np.isfinite(t))
    assert t.min() >= 0.0 and t.max() <= 1.0 / (1.0 - gamma) + 1e-9


class TestTrain:
    def _run(self, seed, episodes):
        env = CartPoleEnv(np.random.default_rng(seed))
        return train_tabular(env, Schedule(), episodes, rng=np.random.default_rng(seed + 100), clock=null_clock)

    def test_single_episode_deterministic(self):
        (ta, ra), (tb, rb) = self._run(5, 1), self._run(5, 1)
        assert ra == rb
        np.testing.assert_array_equal(ta, tb)

    def test_records(self):
        table, records = self._run(1, 30)
        assert [r.episode for r in records] == list(range(30))
        assert all(r.ret in (r.length - 1, r.length) for r in records)
        steps = [r.global_step for r in records]
        assert steps == list(np.cumsum([r.length for r in records]))
        assert records[-1].epsilon == pytest.approx(0.9999 ** steps[-1])
        assert table.any()

    def test_rejects_zero_episodes(self):
        with pytest.raises(ValueError):
            self._run(1, 0)
