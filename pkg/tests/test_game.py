import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fsigsim import game
from fsigsim.channel import ChannelGains, PowerProfile
from fsigsim.game import UtilitySpec, Weights

from helpers import make_gains, random_gains


def loop_interference(power, p, alloc, n, k):
    return sum(p[m] * power[m, n, k] for m in range(len(alloc)) if m != n and alloc[m] == k)


def loop_utility(power, p, noise, alloc, n, k, m_best=None):
    direct = power[n, n]
    num = p[n] * direct[k]
    if m_best is not None:
        ranked = sorted(range(len(direct)), key=lambda j: (-direct[j], j))
        if k not in ranked[:m_best]:
            return 0.0
        num = p[n] * direct[ranked[m_best - 1]]
    return math.log2(1 + num / (noise + loop_interference(power, p, alloc, n, k)))


def loop_is_pne(power, p, noise, alloc, m_best=None):
    n_users, _, k = power.shape
    for n in range(n_users):
        cur = loop_utility(power, p, noise, alloc, n, alloc[n], m_best)
        for j in range(k):
            trial = list(alloc)
            trial[n] = j
            if loop_utility(power, p, noise, trial, n, j, m_best) > cur + 1e-12 * max(1, cur):
                return False
    return True


game_shapes = st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))


class TestInterferenceAndRates:
    def test_two_user_hand_case(self):
        power = np.array([[[4.0, 1.0], [0.5, 0.5]], [[0.25, 0.25], [1.0, 2.0]]])
        gains = ChannelGains.from_power(power)
        pw = PowerProfile(np.array([1.0, 2.0]), 1.0)
        inter = game.interference_matrix(gains, pw, [0, 0])
        np.testing.assert_allclose(inter, [[0.5, 0.0], [0.5, 0.0]])
        # user 0: 4 / (1 + 0.5); user 1: 2 / (1 + 0.5)
        np.testing.assert_allclose(game.rates(gains, pw, [0, 0]),
                                   [math.log2(1 + 4 / 1.5), math.log2(1 + 2 / 1.5)])
        np.testing.assert_allclose(game.rates(gains, pw, [0, 1]), [math.log2(5), math.log2(5)])

    @settings(max_examples=40, deadline=None)
    @given(game_shapes)
    def test_matches_loop_oracle(self, shape):
        n, k, seed = shape
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        p = rng.uniform(0.5, 5.0, n)
        pw = PowerProfile(p, 0.7)
        alloc = rng.integers(0, k, n)
        inter = game.interference_matrix(gains, pw, alloc)
        for u in range(n):
            for j in range(k):
                assert inter[u, j] == pytest.approx(loop_interference(gains.power, p, alloc, u, j))
                assert game.interference(gains, pw, alloc, u, j) == pytest.approx(inter[u, j])
        r = game.rates(gains, pw, alloc)
        for u in range(n):
            assert r[u] == pytest.approx(loop_utility(gains.power, p, 0.7, alloc, u, alloc[u]))

    @settings(max_examples=30, deadline=None)
    @given(game_shapes)
    def test_rates_nonnegative_and_orthogonal_upper_bound(self, shape):
        n, k, seed = shape
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        pw = PowerProfile(np.ones(n), 1.0)
        alloc = rng.integers(0, k, n)
        r = game.rates(gains, pw, alloc)
        solo = np.log2(1 + gains.direct()[np.arange(n), alloc])
        assert np.all(r >= 0)
        assert np.all(r <= solo + 1e-12)

    def test_weighted_sum_rate(self, unit_powers):
        gains = make_gains([[1.0, 3.0], [3.0, 1.0]])
        a = [1, 0]
        assert game.weighted_sum_rate(gains, unit_powers(2), a) == pytest.approx(4.0)
        w = Weights.of([1.0, 0.5])
        assert game.weighted_sum_rate(gains, unit_powers(2), a, w) == pytest.approx(3.0)

    def test_invalid_allocation(self, unit_powers):
        gains = make_gains([[1.0, 2.0]])
        with pytest.raises(ValueError):
            game.rates(gains, unit_powers(1), [2])
        with pytest.raises(ValueError):
            game.rates(gains, unit_powers(1), [-1])

    def test_weights_validation(self):
        with pytest.raises(ValueError):
            Weights(np.array([1.0]), 0.0, 1.0)
        with pytest.raises(ValueError):
            Weights(np.array([2.0]), 0.5, 1.0)


class TestMBest:
    def test_three_re_example(self):
        gains = ChannelGains.from_power(np.array([[[0.09, 0.81, 0.25]]]))
        assert game.m_best_set(gains, 0, 2) == {1, 2}
        assert game.mth_best_power(gains, 2)[0] == pytest.approx(0.25)

    def test_ties_broken_by_index(self):
        gains = make_gains([[1.0, 2.0, 2.0, 0.5]])
        assert game.m_best_set(gains, 0, 1) == {1}
        assert game.m_best_set(gains, 0, 2) == {1, 2}

    def test_m_bounds(self):
        gains = make_gains([[1.0, 2.0]])
        with pytest.raises(ValueError):
            game.m_best_mask(gains, 0)
        with pytest.raises(ValueError):
            game.m_best_mask(gains, 3)
        with pytest.raises(ValueError):
            UtilitySpec.mfsig(0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_set_properties(self, n, k, seed):
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        for m in range(1, k + 1):
            mask = game.m_best_mask(gains, m)
            assert np.all(mask.sum(axis=1) == m)
            direct = gains.direct()
            for u in range(n):
                inside = direct[u, mask[u]]
                outside = direct[u, ~mask[u]]
                if outside.size:
                    assert inside.min() >= outside.max()
                assert game.mth_best_power(gains, m)[u] == pytest.approx(inside.min())


class TestUtilities:
    @settings(max_examples=40, deadline=None)
    @given(game_shapes, st.integers(1, 4))
    def test_utility_matrix_matches_oracle(self, shape, m_raw):
        n, k, seed = shape
        m = min(m_raw, k)
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        p = rng.uniform(0.5, 5.0, n)
        pw = PowerProfile(p, 1.0)
        alloc = rng.integers(0, k, n)
        u_naive = game.utility_matrix(gains, pw, alloc, UtilitySpec.naive())
        u_m = game.utility_matrix(gains, pw, alloc, UtilitySpec.mfsig(m))
        for u in range(n):
            for j in range(k):
                assert u_naive[u, j] == pytest.approx(loop_utility(gains.power, p, 1.0, alloc, u, j))
                assert u_m[u, j] == pytest.approx(loop_utility(gains.power, p, 1.0, alloc, u, j, m))
                assert game.naive_utility(gains, pw, alloc, u, j) == pytest.approx(u_naive[u, j])
                assert game.mfsig_utility(gains, pw, alloc, u, j, m) == pytest.approx(u_m[u, j])

    @settings(max_examples=40, deadline=None)
    @given(game_shapes, st.integers(1, 4))
    def test_mfsig_best_response_minimises_interference(self, shape, m_raw):
        n, k, seed = shape
        m = min(m_raw, k)
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        pw = PowerProfile(rng.uniform(0.5, 5.0, n), 1.0)
        alloc = rng.integers(0, k, n)
        u = game.utility_matrix(gains, pw, alloc, UtilitySpec.mfsig(m))
        inter = game.interference_matrix(gains, pw, alloc)
        mask = game.m_best_mask(gains, m)
        for user in range(n):
            best = u[user].max()
            least = inter[user][mask[user]].min()
            chosen = np.flatnonzero(np.isclose(u[user], best, rtol=1e-12, atol=0))
            assert all(mask[user, c] for c in chosen)
            assert all(inter[user, c] == pytest.approx(least) for c in chosen)
            assert np.all(u[user, ~mask[user]] == 0.0)


class TestPne:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31 - 1), st.booleans())
    def test_enumeration_matches_loop(self, n, k, seed, use_m):
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        p = rng.uniform(0.5, 5.0, n)
        pw = PowerProfile(p, 1.0)
        m = min(2, k) if use_m else None
        spec = UtilitySpec.mfsig(m) if use_m else UtilitySpec.naive()
        found = {tuple(a) for a in game.enumerate_pne(gains, pw, spec)}
        expect = {a for a in itertools.product(range(k), repeat=n)
                  if loop_is_pne(gains.power, p, 1.0, a, m)}
        assert found == expect
        for a in itertools.product(range(k), repeat=n):
            assert bool(game.is_pne(gains, pw, a, spec)) == (a in expect)

    def test_deviation_reported(self, unit_powers):
        gains = make_gains([[5.0, 1.0], [5.0, 1.0]], cross=1.0)
        check = game.is_pne(gains, unit_powers(2), [1, 1], UtilitySpec.naive())
        assert not check
        assert check.user == 0 and check.better_re == 0

    def test_mfsig_pne_always_exists_small(self):
        # a potential game: every sampled instance has at least one PNE
        rng = np.random.default_rng(3)
        for _ in range(20):
            gains = random_gains(rng, 3, 3)
            pw = PowerProfile(rng.uniform(0.5, 5.0, 3), 1.0)
            assert len(game.enumerate_pne(gains, pw, UtilitySpec.mfsig(2))) > 0


class TestStrongInterference:
    def hand_gains(self):
        power = np.empty((2, 2, 2))
        power[0, 0] = [1.0, 4.0]
        power[1, 1] = [2.0, 1.0]
        power[0, 1] = 0.5
        power[1, 0] = 0.25
        return ChannelGains.from_power(power)

    def test_rhs_hand_values(self):
        np.testing.assert_allclose(game.strong_interference_rhs(self.hand_gains()),
                                   [[2.0, 0.75], [0.5, 12.0]])

    def test_condition(self):
        gains = self.hand_gains()
        assert not game.strong_interference_holds(gains, PowerProfile(np.array([3.0, 10.0]), 1.0))
        assert game.strong_interference_holds(gains, PowerProfile(np.array([3.0, 13.0]), 1.0))

    def test_uniform_scaling(self):
        pw = game.scale_powers_to_strong_interference(self.hand_gains(), noise=1.0, margin=1.0)
        np.testing.assert_allclose(pw.powers, [12.0, 12.0])
        assert game.strong_interference_holds(self.hand_gains(), pw)
        with pytest.raises(ValueError):
            game.scale_powers_to_strong_interference(self.hand_gains(), margin=0.5)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 3), st.integers(0, 2**31 - 1))
    def test_pne_are_exactly_permutations(self, n, seed):
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, n)
        pw = game.scale_powers_to_strong_interference(gains, 1.0, margin=2.0)
        found = {tuple(a) for a in game.enumerate_pne(gains, pw, UtilitySpec.naive())}
        assert found == set(itertools.permutations(range(n)))


class TestWorkedExamples:
    def test_interference_two_interferers(self, unit_powers):
        power = np.ones((3, 3, 2))
        power[1, 0, 0], power[2, 0, 0] = 0.5, 1.5
        gains = ChannelGains.from_power(power)
        assert game.interference(gains, unit_powers(3), [1, 0, 0], 0, 0) == pytest.approx(2.0)
        assert game.interference(gains, unit_powers(3), [1, 0, 0], 0, 1) == 0.0

    @settings(max_examples=30, deadline=None)
    @given(game_shapes)
    def test_interference_ignores_own_choice(self, shape):
        n, k, seed = shape
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        pw = PowerProfile(np.ones(n), 1.0)
        alloc = rng.integers(0, k, n)
        moved = alloc.copy()
        moved[0] = (alloc[0] + 1) % k
        np.testing.assert_allclose(game.interference_matrix(gains, pw, alloc)[0],
                                   game.interference_matrix(gains, pw, moved)[0])

    @pytest.mark.parametrize("signal,inter,expect", [(1.0, 0.0, 1.0), (3.0, 0.0, 2.0), (3.0, 2.0, 1.0)])
    def test_achievable_rate_values(self, signal, inter, expect, unit_powers):
        power = np.full((2, 2, 2), inter)
        power[0, 0] = signal
        power[1, 1] = 1.0
        gains = ChannelGains.from_power(power + 1e-300)
        alloc = [0, 0] if inter else [0, 1]
        assert game.achievable_rate(gains, unit_powers(2), alloc, 0) == pytest.approx(expect)

    def test_weighted_sum_rate_examples(self, unit_powers):
        gains = make_gains([[3.0]])
        assert game.weighted_sum_rate(gains, unit_powers(1), [0], Weights.of([2.5])) == pytest.approx(5.0)
        rng = np.random.default_rng(1)
        g = random_gains(rng, 4, 4)
        w = Weights.of([1.0, 2.0, 0.5, 1.5])
        w2 = Weights.of(2 * w.values)
        a = [0, 0, 1, 3]
        assert game.weighted_sum_rate(g, unit_powers(4), a, w2) == pytest.approx(
            2 * game.weighted_sum_rate(g, unit_powers(4), a, w))

    def test_naive_utility_at_own_re_is_rate(self, rng, unit_powers):
        gains = random_gains(rng, 4, 3)
        a = [0, 2, 2, 1]
        for n in range(4):
            assert game.naive_utility(gains, unit_powers(4), a, n, a[n]) == pytest.approx(
                game.achievable_rate(gains, unit_powers(4), a, n))

    def test_empty_best_re_maximises_naive_utility(self, unit_powers):
        power = np.full((3, 3, 3), 50.0)
        power[0, 0] = [4.0, 3.0, 3.5]
        power[1, 1] = [1.0, 1.0, 1.0]
        power[2, 2] = [1.0, 1.0, 1.0]
        gains = ChannelGains.from_power(power)
        u = [game.naive_utility(gains, unit_powers(3), [1, 1, 2], 0, k) for k in range(3)]
        # RE 0 is free and best: log2(5); the others carry interference 50
        assert u[0] == pytest.approx(math.log2(5))
        assert int(np.argmax(u)) == 0

    @settings(max_examples=30, deadline=None)
    @given(game_shapes)
    def test_adding_interferer_never_helps(self, shape):
        n, k, seed = shape
        if n < 2:
            return
        rng = np.random.default_rng(seed)
        gains = random_gains(rng, n, k)
        pw = PowerProfile(np.ones(n), 1.0)
        alloc = rng.integers(0, k, n)
        target = int(alloc[0])
        moved = alloc.copy()
        moved[1] = target
        before = game.utility_matrix(gains, pw, alloc, UtilitySpec.naive())[0, target]
        after = game.utility_matrix(gains, pw, moved, UtilitySpec.naive())[0, target]
        assert after <= before + 1e-12

    def test_m_best_extremes(self):
        gains = make_gains([[0.3, 0.9, 0.5, 0.1]])
        assert game.m_best_set(gains, 0, 4) == {0, 1, 2, 3}
        assert game.m_best_set(gains, 0, 1) == {1}

    def test_mfsig_equal_interference_equal_utility(self, unit_powers):
        gains = make_gains([[5.0, 2.0, 0.1], [1.0, 1.0, 1.0]], cross=0.5)
        alloc = [2, 2]
        u0 = game.mfsig_utility(gains, unit_powers(2), alloc, 0, 0, 2)
        u1 = game.mfsig_utility(gains, unit_powers(2), alloc, 0, 1, 2)
        assert u0 == pytest.approx(u1) == pytest.approx(math.log2(3))
        assert game.mfsig_utility(gains, unit_powers(2), alloc, 0, 2, 2) == 0.0

    def test_single_user(self, unit_powers):
        gains = make_gains([[1.0, 3.0, 2.0]])
        # flat utility when every RE is in the M-best set: nothing to gain by moving
        assert all(game.is_pne(gains, unit_powers(1), [k], UtilitySpec.mfsig(3)) for k in range(3))
        # the naive utility still prefers the best RE even without rivals
        assert [bool(game.is_pne(gains, unit_powers(1), [k], UtilitySpec.naive()))
                for k in range(3)] == [False, True, False]

    def test_strong_interference_collision_witness(self):
        rng = np.random.default_rng(2)
        gains = random_gains(rng, 3, 3)
        pw = game.scale_powers_to_strong_interference(gains, 1.0, margin=2.0)
        for perm in itertools.permutations(range(3)):
            assert game.is_pne(gains, pw, perm, UtilitySpec.naive())
        check = game.is_pne(gains, pw, [0, 0, 1], UtilitySpec.naive())
        assert not check and check.user in (0, 1) and check.better_re == 2

    def test_flat_direct_gains_always_strong(self):
        gains = make_gains(np.ones((3, 3)) * 2.0, cross=0.1)
        assert game.strong_interference_holds(gains, PowerProfile(np.full(3, 1e-9), 1.0))

    def test_margin_one_binding_and_margin_two_strict(self):
        rng = np.random.default_rng(3)
        gains = random_gains(rng, 4, 4)
        rhs = game.strong_interference_rhs(gains)
        tight = game.scale_powers_to_strong_interference(gains, 1.0, margin=1.0)
        assert tight.powers[0] == pytest.approx(rhs.max())
        assert game.strong_interference_holds(gains, tight)
        loose = game.scale_powers_to_strong_interference(gains, 1.0, margin=2.0)
        assert np.all(loose.powers[:, None] > rhs)
        for perm in itertools.permutations(range(4)):
            assert game.is_pne(gains, loose, perm, UtilitySpec.naive())
