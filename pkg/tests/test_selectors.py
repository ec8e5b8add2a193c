"""Track-selection policies: balancing moves, revert logic, regret matching."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackgame.errors import MuViolationError
from trackgame.game import (
    GainTable,
    GameContext,
    InterestMatrix,
    TopologySpec,
    utility,
)
from trackgame.selectors import (
    CentralizedPlanner,
    CentralizedSelector,
    LcbrdSelector,
    RandomKSelector,
    RegretMatchingSelector,
    SelectorContext,
    StandaloneSelector,
    build_selectors,
    counterfactual_utilities,
    greedy_row,
    lcbrd_step,
    random_distinct_row,
    regret_probabilities,
    regret_update,
)


def make_ctx(n=2, t=3, m=1, levels=(1.0, 0.4), k=1, weights=None):
    topology = TopologySpec.full(n, t)
    gains = GainTable.case_a(levels, t)
    weights = weights or InterestMatrix.ones(n, t)
    game_ctx = GameContext(
        n_radars=n, n_targets=t, m=m, topology=topology, weights=weights,
        gains=gains,
    )
    return SelectorContext(
        k=k, n_radars=n, n_targets=t, m=m, topology=topology, weights=weights,
        b=np.ones((n, t)), gains=gains,
        ceil_level=math.ceil(n * m / t), game_ctx=game_ctx,
    )


class TestRows:
    def test_greedy_row_prefers_small_b(self):
        b = np.array([[3.0, 1.0, 2.0, 5.0, 4.0]])
        row = greedy_row(0, b, range(5), 2, 5)
        assert list(row) == [0, 1, 1, 0, 0]

    def test_greedy_row_tie_breaks_by_index(self):
        b = np.ones((1, 4))
        row = greedy_row(0, b, range(4), 2, 4)
        assert list(row) == [1, 1, 0, 0]

    def test_random_row_properties(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            row = random_distinct_row(rng, {1, 2, 4}, 2, 5)
            assert row.sum() == 2
            assert row.max() == 1
            assert row[0] == 0 and row[3] == 0


class TestLcbrdStep:
    def test_s1_splits_duplicates_to_min_count(self):
        row = lcbrd_step(
            np.array([2, 0, 0]), np.array([2, 1, 0]), np.ones(3), range(3),
            ceil_level=2, alpha=0.0, rng=np.random.default_rng(0),
        )
        assert list(row) == [1, 0, 1]

    def test_s2_moves_off_overfull_target(self):
        row = lcbrd_step(
            np.array([1, 0, 0]), np.array([3, 1, 0]), np.ones(3), range(3),
            ceil_level=1, alpha=1.0, rng=np.random.default_rng(0),
        )
        assert list(row) == [0, 0, 1]

    def test_s2_large_gap_always_moves(self):
        row = lcbrd_step(
            np.array([1, 0, 0]), np.array([3, 0, 1]), np.ones(3), range(3),
            ceil_level=3, alpha=1.0, rng=np.random.default_rng(0),
        )
        assert list(row) == [0, 1, 0]

    def test_s2_unit_gap_needs_better_accuracy(self):
        args = dict(ceil_level=2, alpha=1.0, rng=np.random.default_rng(0))
        stay = lcbrd_step(
            np.array([1, 0, 0]), np.array([2, 1, 1]), np.array([1.0, 3.0, 2.0]),
            range(3), **args,
        )
        assert list(stay) == [1, 0, 0]
        move = lcbrd_step(
            np.array([1, 0, 0]), np.array([2, 1, 1]), np.array([3.0, 1.0, 2.0]),
            range(3), **args,
        )
        assert list(move) == [0, 1, 0]

    def test_alpha_zero_skips_s2(self):
        row = lcbrd_step(
            np.array([1, 0, 0]), np.array([3, 0, 0]), np.ones(3), range(3),
            ceil_level=1, alpha=0.0, rng=np.random.default_rng(0),
        )
        assert list(row) == [1, 0, 0]

    def test_respects_observability(self):
        row = lcbrd_step(
            np.array([2, 0, 0]), np.array([2, 0, 0]), np.ones(3), [0, 1],
            ceil_level=2, alpha=0.0, rng=np.random.default_rng(0),
        )
        assert list(row) == [1, 1, 0]


class TestLcbrdSelector:
    def _reset(self, sel, ctx, seed=0, init="greedy"):
        return sel.reset(
            np.random.default_rng(seed), ctx.b,
            ctx.topology.observable[sel.radar_id], ctx.m, ctx.n_targets,
            init=init,
        )

    def test_oracle_step_takes_improving_exchange(self):
        ctx = make_ctx()
        sel = LcbrdSelector(0, alpha=1.0)
        self._reset(sel, ctx)
        sel.current = np.array([1, 0, 0])
        clash = np.array([[1, 0, 0], [1, 0, 0]])
        row = sel.select(ctx, clash.sum(axis=0), clash)
        assert list(row) == [0, 1, 0]

    def test_oracle_step_keeps_equilibrium_row(self):
        ctx = make_ctx()
        sel = LcbrdSelector(0, alpha=1.0)
        self._reset(sel, ctx)
        sel.current = np.array([0, 1, 0])
        split = np.array([[0, 1, 0], [1, 0, 0]])
        row = sel.select(ctx, split.sum(axis=0), split)
        assert list(row) == [0, 1, 0]

    def test_revert_restores_previous_row(self):
        ctx = make_ctx()
        sel = LcbrdSelector(0, alpha=1.0)
        self._reset(sel, ctx)
        # committed row: alone on target 1 (utility 2.0 against opponent on 0)
        sel.prev_row = np.array([0, 1, 0])
        sel.prev_utility = 2.0
        sel.current = np.array([1, 0, 0])
        clash = np.array([[1, 0, 0], [1, 0, 0]])
        u = utility(clash, 0, ctx.gains, ctx.topology, ctx.weights)
        sel.record_outcome(ctx, u, clash)
        assert sel.reverted
        assert list(sel.current) == [0, 1, 0]
        assert sel.skip_next
        # the post-revert scan replays the restored row without stepping
        row = sel.select(ctx, clash.sum(axis=0), clash)
        assert list(row) == [0, 1, 0]
        assert not sel.skip_next

    def test_commit_updates_memory(self):
        ctx = make_ctx()
        sel = LcbrdSelector(0)
        self._reset(sel, ctx)
        sel.current = np.array([0, 1, 0])
        split = np.array([[0, 1, 0], [1, 0, 0]])
        u = utility(split, 0, ctx.gains, ctx.topology, ctx.weights)
        sel.record_outcome(ctx, u, split)
        assert not sel.reverted
        assert list(sel.prev_row) == [0, 1, 0]
        assert sel.prev_utility == pytest.approx(u)

    def test_reinitialization_clears_memory(self):
        ctx = make_ctx(k=6)
        sel = LcbrdSelector(0, k_reinit=5)
        self._reset(sel, ctx)
        sel.prev_row = np.array([0, 1, 0])
        sel.prev_utility = 1.0
        profile = np.array([[0, 1, 0], [1, 0, 0]])
        row = sel.select(ctx, profile.sum(axis=0), profile)
        assert row.sum() == 1
        assert sel.prev_row is None and sel.prev_utility is None

    def test_epsilon_one_always_randomizes(self):
        ctx = make_ctx()
        sel = LcbrdSelector(0, alpha=0.0, epsilon=1.0 - 1e-12)
        self._reset(sel, ctx)
        rows = set()
        profile = np.array([[1, 0, 0], [0, 1, 0]])
        for _ in range(30):
            rows.add(tuple(sel.select(ctx, profile.sum(axis=0), profile)))
        assert len(rows) == 3  # visits every single-beam row


class TestStandalone:
    def test_block_cycling(self):
        ctx = make_ctx(n=1, t=5, m=2)
        sel = StandaloneSelector(0)
        sel.reset(np.random.default_rng(0), ctx.b, range(5), 2, 5)
        seen = [tuple(sel.select(ctx, np.zeros(5, dtype=int))) for _ in range(4)]
        assert seen[0] == (1, 1, 0, 0, 0)
        assert seen[1] == (0, 0, 1, 1, 0)
        assert seen[2] == (1, 0, 0, 0, 1)
        assert seen[3] == (0, 1, 1, 0, 0)

    def test_does_not_share_measurements(self):
        assert StandaloneSelector(0).shares_measurements is False


class TestRandomK:
    def test_redraw_cadence(self):
        ctx1 = make_ctx(n=1, t=5, m=2)
        sel = RandomKSelector(0, K=3)
        sel.reset(np.random.default_rng(1), ctx1.b, range(5), 2, 5)
        counts = np.zeros(5, dtype=int)
        rows = []
        for k in range(1, 8):
            ctx = make_ctx(n=1, t=5, m=2, k=k)
            rows.append(tuple(sel.select(ctx, counts)))
        assert rows[0] == rows[1] == rows[2]  # scans 1-3 share one draw
        assert rows[3] == rows[4] == rows[5]  # scans 4-6 share the next
        for row in rows:
            assert sum(row) == 2 and max(row) == 1


class TestCentralized:
    def test_plays_welfare_optimum(self):
        ctx = make_ctx()
        planner = CentralizedPlanner(K=1)
        sels = [CentralizedSelector(i, planner) for i in range(2)]
        for sel in sels:
            sel.reset(np.random.default_rng(0), ctx.b, range(3), 1, 3)
        profile = np.array([sel.select(ctx, np.zeros(3, dtype=int)) for sel in sels])
        # welfare optimum spreads the two beams over distinct targets
        assert profile.sum() == 2
        assert profile.sum(axis=0).max() == 1

    def test_replan_cadence(self, monkeypatch):
        ctx = make_ctx()
        planner = CentralizedPlanner(K=10)
        calls = {"n": 0}
        import trackgame.selectors as mod

        orig = mod.best_profile_exhaustive

        def counting(game_ctx):
            calls["n"] += 1
            return orig(game_ctx)

        monkeypatch.setattr(mod, "best_profile_exhaustive", counting)
        for k in range(1, 22):
            planner.assignment(make_ctx(k=k))
        assert calls["n"] == 3  # scans 1, 11 and 21


class TestRegretMatching:
    def test_update_discounts_all_rows(self):
        D = np.array([[0.0, 1.0], [0.5, 0.0]])
        out = regret_update(D.copy(), played=0, counterfactuals=np.array([1.0, 3.0]),
                            theta_k=0.5)
        assert np.allclose(out[1], [0.25, 0.0])
        assert out[0, 1] == pytest.approx(0.5 * 1.0 + 0.5 * 2.0)

    @given(seed=st.integers(0, 5000), n_rows=st.integers(2, 5))
    @settings(max_examples=40, deadline=None)
    def test_one_over_k_matches_batch_average(self, seed, n_rows):
        g = np.random.default_rng(seed)
        steps = 50
        payoffs = g.uniform(0.0, 1.0, size=(steps, n_rows))
        played = g.integers(0, n_rows, size=steps)
        D = np.zeros((n_rows, n_rows))
        for k in range(1, steps + 1):
            D = regret_update(D, int(played[k - 1]), payoffs[k - 1], 1.0 / k)
        batch = np.zeros((n_rows, n_rows))
        for k in range(steps):
            cf = payoffs[k]
            batch[played[k]] += cf - cf[played[k]]
        batch /= steps
        assert np.allclose(D, batch, atol=1e-12)

    def test_probabilities_hand_values(self):
        D = np.zeros((2, 2))
        D[0] = [0.0, 0.5]
        pi = regret_probabilities(D, played=0, mu=2.0)
        assert np.allclose(pi, [0.75, 0.25])
        D3 = np.zeros((3, 3))
        D3[0] = [0.0, 0.5, 0.5]
        pi = regret_probabilities(D3, played=0, mu=2.0)
        assert np.allclose(pi, [0.5, 0.25, 0.25])

    def test_negative_regrets_ignored(self):
        D = np.zeros((2, 2))
        D[1] = [-3.0, 0.0]
        pi = regret_probabilities(D, played=1, mu=2.0)
        assert np.allclose(pi, [0.0, 1.0])

    def test_mu_violation(self):
        D = np.zeros((2, 2))
        D[0] = [0.0, 2.5]
        with pytest.raises(MuViolationError):
            regret_probabilities(D, played=0, mu=2.0)

    def test_selector_round_trip(self):
        ctx = make_ctx(n=2, t=3, m=1)
        sel = RegretMatchingSelector(0, theta=0.5)
        sel.reset(np.random.default_rng(0), ctx.b, range(3), 1, 3)
        opponent = np.array([1, 0, 0])
        for k in range(1, 30):
            step_ctx = make_ctx(n=2, t=3, m=1, k=k)
            row = sel.select(step_ctx, opponent + np.asarray(sel.current))
            profile = np.vstack([row, opponent])
            u = utility(profile, 0, ctx.gains, ctx.topology, ctx.weights)
            sel.record_outcome(step_ctx, u, profile)
        assert sel.mu is None  # adaptive normalization stays adaptive
        assert sel.max_average_regret() < 0.5
        # against a fixed opponent on target 0 the regret-matching play
        # concentrates on the two free targets
        assert tuple(sel.current) in {(0, 1, 0), (0, 0, 1)}

    def test_adaptive_normalization(self):
        from trackgame.selectors import RM_MIN_STAY, regret_probabilities

        sel = RegretMatchingSelector(0)
        sel.rows = [(1, 0), (0, 1)]
        sel.current_idx = 0
        sel.D = np.array([[0.0, 0.3], [0.0, 0.0]])
        mu = sel._normalization()
        pi = regret_probabilities(sel.D, 0, mu)
        # switch mass proportional to positive regrets, stay floor kept
        assert pi[0] == pytest.approx(RM_MIN_STAY)
        assert pi[1] == pytest.approx(1.0 - RM_MIN_STAY)
        # no positive regrets: the play repeats
        sel.D = np.array([[0.0, -1.0], [0.0, 0.0]])
        pi = regret_probabilities(sel.D, 0, sel._normalization())
        assert np.allclose(pi, [1.0, 0.0])
        # an explicit normalization is used verbatim
        assert RegretMatchingSelector(0, mu=6.0)._normalization() == 6.0

    def test_theta_schedule(self):
        sel = RegretMatchingSelector(0, theta="1/k")
        assert sel.theta_at(4) == pytest.approx(0.25)
        assert RegretMatchingSelector(0, theta=0.5).theta_at(9) == 0.5


class TestCounterfactuals:
    def test_matches_direct_substitution(self):
        ctx = make_ctx(n=2, t=3, m=1)
        rows = ctx.game_ctx.rows_for(0)
        profile = np.array([[1, 0, 0], [0, 1, 0]])
        cf = counterfactual_utilities(
            profile, 0, rows, ctx.gains, ctx.topology, ctx.weights
        )
        for idx, row in enumerate(rows):
            q = profile.copy()
            q[0] = row
            assert cf[idx] == pytest.approx(
                utility(q, 0, ctx.gains, ctx.topology, ctx.weights)
            )
        assert not np.array_equal(profile[0], rows[np.argmax(cf)]) or cf.max() == cf[0]


class TestFactory:
    def test_builds_each_kind(self):
        from trackgame.scenario import SelectorSpec

        for kind, cls in [
            ("lcbrd", LcbrdSelector),
            ("rm", RegretMatchingSelector),
            ("standalone", StandaloneSelector),
            ("random", RandomKSelector),
            ("centralized", CentralizedSelector),
        ]:
            sels = build_selectors(SelectorSpec(kind=kind), 3)
            assert len(sels) == 3
            assert all(isinstance(s, cls) for s in sels)
            assert [s.radar_id for s in sels] == [0, 1, 2]

    def test_centralized_shares_one_planner(self):
        from trackgame.scenario import SelectorSpec

        sels = build_selectors(SelectorSpec(kind="centralized", K=5), 3)
        assert len({id(s.planner) for s in sels}) == 1
