import numpy as np
import pytest

from ximax import (
    BlockTooLarge,
    DegenerateVariance,
    EmptySubset,
    ModelSpec,
    SampleTooSmall,
    block_sums,
    bootstrap_statistics,
    bootstrap_variance_mean,
    build_block_scheme,
    concomitant_ranks,
    critical_value,
    draw_multipliers,
    gen_model1,
    influence_terms,
    subset_max,
)


class TestInfluenceTerms:
    def test_boundary_rank(self):
        w = influence_terms(np.array([[1.0], [1.0]]))
        assert w[0, 0] == 2.0

    def test_midpoint(self):
        w = influence_terms(np.array([[0.5], [0.5]]))
        assert w[0, 0] == 0.5

    def test_top_to_bottom_n4(self):
        w = influence_terms(np.array([[1.0], [0.25]]))
        assert w[0, 0] == pytest.approx(2 - 3 * 0.75, abs=1e-15)

    def test_magnitude_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(3, 40))
            u = rng.permutation(np.arange(1, n + 1))[:, None] / n
            assert np.all(np.abs(influence_terms(u)) <= 2.0)


class TestBlockScheme:
    def test_n10_q2(self):
        s = build_block_scheme(10, 2)
        assert (s.m, s.r) == (3, 0)
        assert s.big_blocks == [range(0, 2), range(3, 5), range(6, 8)]
        assert np.array_equal(s.separator_indices, [2, 5, 8])
        assert list(s.remainder_indices) == []

    def test_n500_q3(self):
        s = build_block_scheme(500, 3)
        assert (s.m, s.r) == (124, 3)
        assert list(s.remainder_indices) == [496, 497, 498]

    def test_boundary_n4_q2(self):
        s = build_block_scheme(4, 2)
        assert (s.m, s.r) == (1, 0)

    def test_block_geometry(self):
        s = build_block_scheme(47, 4)
        lengths = {len(b) for b in s.big_blocks}
        assert lengths == {4}
        # consecutive big blocks separated by exactly one index
        for left, right in zip(s.big_blocks, s.big_blocks[1:]):
            assert right.start - left.stop == 1

    def test_errors(self):
        with pytest.raises(BlockTooLarge):
            build_block_scheme(4, 3)
        with pytest.raises(ValueError):
            build_block_scheme(10, 0)
        with pytest.raises(SampleTooSmall):
            build_block_scheme(2, 1)


class TestBlockSums:
    def test_q1_takes_every_other_term(self):
        rng = np.random.default_rng(1)
        w = rng.normal(size=(8, 2))
        s = build_block_scheme(9, 1)
        a = block_sums(w, s)
        assert a.shape == (4, 2)
        assert np.array_equal(a, w[[0, 2, 4, 6]])

    def test_constant_terms(self):
        s = build_block_scheme(10, 2)
        w = np.full((9, 3), 1.5)
        assert np.allclose(block_sums(w, s), 3.0)

    def test_matches_index_oracle(self):
        rng = np.random.default_rng(2)
        w = rng.normal(size=(9, 2))
        s = build_block_scheme(10, 2)
        a = block_sums(w, s)
        for k in range(s.m):
            start = k * (s.q + 1)
            for j in range(2):
                assert a[k, j] == pytest.approx(
                    sum(w[l, j] for l in range(start, start + s.q)), abs=1e-12
                )

    def test_remainder_discarded(self):
        s = build_block_scheme(12, 3)  # m=2, r=3
        w = np.zeros((11, 1))
        w[8:] = 100.0  # remainder rows only
        assert np.array_equal(block_sums(w, s), np.zeros((2, 1)))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            block_sums(np.zeros((5, 1)), build_block_scheme(10, 2))

    def test_magnitude_bound(self):
        spec = ModelSpec(model="model1", n=80, p=3, seed=4)
        u = concomitant_ranks(gen_model1(spec, 0))
        s = build_block_scheme(80, 5)
        assert np.all(np.abs(block_sums(influence_terms(u), s)) <= 2 * s.q)


class TestDrawMultipliers:
    def test_deterministic(self):
        a = draw_multipliers(8, 5, seed=42)
        b = draw_multipliers(8, 5, seed=42)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, draw_multipliers(8, 5, seed=43))

    def test_rows_stable_under_b_reps(self):
        small = draw_multipliers(10, 6, seed=9)
        large = draw_multipliers(20, 6, seed=9)
        assert np.array_equal(small, large[:10])

    def test_moments(self):
        eps = draw_multipliers(1000, 1000, seed=11)
        assert abs(eps.mean()) <= 0.004
        assert abs(eps.var() - 1.0) <= 0.005

    def test_validation(self):
        with pytest.raises(ValueError):
            draw_multipliers(0, 5, seed=0)
        with pytest.raises(ValueError):
            draw_multipliers(5, 0, seed=0)


class TestBootstrapStatistics:
    def test_zero_multipliers_all_modes(self):
        s = build_block_scheme(10, 2)
        totals = np.arange(6.0).reshape(3, 2) + 1
        eps = np.zeros((4, 3))
        for mode in ("none", "fixed", "empirical"):
            d = bootstrap_statistics(totals, s, eps, mode).statistics()
            assert np.array_equal(d, np.zeros((4, 2)))

    def test_none_mode_hand_case(self):
        s = build_block_scheme(5, 1)  # m=2
        totals = np.array([[1.0], [-1.0]])
        eps = np.array([[1.0, -1.0]])
        d = bootstrap_statistics(totals, s, eps, "none").statistics()
        assert d[0, 0] == pytest.approx(np.sqrt(2), abs=1e-15)

    def test_fixed_equals_scaled_none(self):
        rng = np.random.default_rng(3)
        for q in (1, 2, 5):
            s = build_block_scheme(61, q)
            totals = rng.normal(size=(s.m, 4))
            eps = rng.normal(size=(7, s.m))
            none = bootstrap_statistics(totals, s, eps, "none").statistics()
            fixed = bootstrap_statistics(totals, s, eps, "fixed").statistics()
            assert np.allclose(fixed, none * np.sqrt(q / (0.4 * q + 0.1)), atol=1e-12)

    def test_empirical_hand_case(self):
        s = build_block_scheme(5, 1)  # m=2
        totals = np.array([[1.0], [3.0]])
        eps = np.array([[1.0, 0.0], [0.0, 1.0]])
        d = bootstrap_statistics(totals, s, eps, "empirical").statistics()
        denom = np.sqrt(2) * np.sqrt((1 + 9) / 2)
        assert d[:, 0] == pytest.approx([-1 / denom, 1 / denom], abs=1e-15)

    def test_empirical_degenerate(self):
        s = build_block_scheme(10, 2)
        totals = np.zeros((3, 2))
        totals[:, 1] = 1.0
        with pytest.raises(DegenerateVariance, match="column 0"):
            bootstrap_statistics(totals, s, np.ones((2, 3)), "empirical")

    def test_unknown_mode(self):
        s = build_block_scheme(10, 2)
        with pytest.raises(ValueError):
            bootstrap_statistics(np.zeros((3, 1)), s, np.ones((2, 3)), "centered")

    def test_multiplier_rows_shared_across_hypotheses(self):
        # column 2 = 2x column 1 propagates exactly through shared rows
        s = build_block_scheme(21, 1)
        rng = np.random.default_rng(6)
        col = rng.normal(size=s.m)
        totals = np.column_stack([col, 2.0 * col])
        eps = rng.normal(size=(30, s.m))
        d = bootstrap_statistics(totals, s, eps, "none").statistics()
        assert np.array_equal(d[:, 1], 2.0 * d[:, 0])

    def test_dense_vs_streaming_bitwise(self):
        rng = np.random.default_rng(8)
        s = build_block_scheme(101, 3)
        totals = rng.normal(size=(s.m, 300))
        eps = rng.normal(size=(50, s.m))
        for mode in ("none", "fixed", "empirical"):
            dense = bootstrap_statistics(totals, s, eps, mode, storage="dense")
            stream = bootstrap_statistics(totals, s, eps, mode, storage="streaming")
            assert dense.dense is not None and stream.dense is None
            assert np.array_equal(dense.statistics(), stream.statistics())
            subset = np.array([5, 17, 200, 299])
            assert np.array_equal(subset_max(dense, subset), subset_max(stream, subset))
            full = np.arange(300)
            assert np.array_equal(subset_max(dense, full), subset_max(stream, full))

    def test_auto_storage_cap(self):
        s = build_block_scheme(31, 2)
        totals = np.ones((s.m, 12))
        eps = np.ones((10, s.m))
        big = bootstrap_statistics(totals, s, eps, "none", storage="auto",
                                   memory_cap_bytes=1 << 20)
        tiny = bootstrap_statistics(totals, s, eps, "none", storage="auto",
                                    memory_cap_bytes=64)
        assert big.dense is not None
        assert tiny.dense is None

    def test_threads_bitwise_equal(self):
        rng = np.random.default_rng(10)
        s = build_block_scheme(101, 3)
        totals = rng.normal(size=(s.m, 200))
        eps = rng.normal(size=(40, s.m))
        one = bootstrap_statistics(totals, s, eps, "fixed", threads=1)
        four = bootstrap_statistics(totals, s, eps, "fixed", threads=4)
        assert np.array_equal(one.statistics(), four.statistics())


class TestSubsetMax:
    @pytest.fixture()
    def draws(self):
        rng = np.random.default_rng(12)
        s = build_block_scheme(41, 3)
        totals = rng.normal(size=(s.m, 6))
        eps = rng.normal(size=(25, s.m))
        return bootstrap_statistics(totals, s, eps, "fixed")

    def test_singleton(self, draws):
        assert np.array_equal(subset_max(draws, [2]), draws.statistics()[:, 2])

    def test_full_set(self, draws):
        got = subset_max(draws, np.arange(6))
        assert np.array_equal(got, draws.statistics().max(axis=1))

    def test_monotone_in_subset(self, draws):
        inner = subset_max(draws, [1, 3])
        outer = subset_max(draws, [0, 1, 3, 5])
        assert np.all(inner <= outer)

    def test_empty_subset(self, draws):
        with pytest.raises(EmptySubset):
            subset_max(draws, [])

    def test_out_of_range(self, draws):
        with pytest.raises(IndexError):
            subset_max(draws, [6])


class TestCriticalValue:
    def test_b19_alpha05_is_max(self):
        draws = np.arange(19.0)
        assert critical_value(draws, 0.05) == 18.0

    def test_b999_alpha05_is_950th(self):
        rng = np.random.default_rng(20)
        draws = rng.normal(size=999)
        assert critical_value(draws, 0.05) == np.sort(draws)[949]

    def test_constant_draws(self):
        assert critical_value(np.full(37, 3.25), 0.1) == 3.25

    def test_float_alpha_snap(self):
        # (1-0.3)*1000 = 700.0000000000001 in floats; exact k is 700
        draws = np.arange(1.0, 1000.0)
        assert critical_value(draws, 0.3) == 700.0

    def test_validation(self):
        with pytest.raises(ValueError):
            critical_value(np.array([]), 0.05)
        with pytest.raises(ValueError):
            critical_value(np.ones(5), 1.5)


class TestEstimatedRankBias:
    def test_proxy_bias_shrinks_with_n(self):
        # with ranks estimated from data the proxy mean drifts from its
        # population value by a vanishing amount as n grows
        q = 2
        target = bootstrap_variance_mean(q)

        def mean_proxy(n, reps, seed):
            spec = ModelSpec(model="model1", n=n, p=1, rho=0.0, seed=seed)
            scheme = build_block_scheme(n, q)
            values = np.empty(reps)
            for rep in range(reps):
                u = concomitant_ranks(gen_model1(spec, rep))
                totals = block_sums(influence_terms(u), scheme)
                values[rep] = float((totals ** 2).sum() / (scheme.m * scheme.q))
            return values.mean()

        bias_small = abs(mean_proxy(60, 3000, seed=21) - target)
        bias_large = abs(mean_proxy(600, 3000, seed=22) - target)
        assert bias_large < bias_small
