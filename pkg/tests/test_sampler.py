import numpy as np
import pytest

from problife.exact import run_exact
from problife.grid import BoundaryPolicy, GridState, load_bundled_pattern
from problife.meanfield import run, step
from problife.rules import Ruleset, classic_life, parse_ruleset, random_ruleset
from problife.sampler import (SplitMixStream, alive_counts, estimate_all_generations,
                              estimate_marginals, mix64, sample_step, sample_trajectory,
                              stream_keys)

from conftest import FIG1_STATES, SAMPLER_RULES, blinker_3x3, cells_of, life_step_reference


def _splitmix_reference(state, count):
    """Textbook SplitMix64 generator in pure Python."""
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & (2**64 - 1)
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & (2**64 - 1)
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & (2**64 - 1)
        out.append(z ^ (z >> 31))
    return out


class TestStreams:
    def test_matches_textbook_splitmix(self):
        key = int(stream_keys(7, [3])[0])
        raw = _splitmix_reference(key, 5)
        draws = SplitMixStream(7, 3).random(5)
        assert draws.tolist() == [(z >> 11) * 2.0**-53 for z in raw]

    def test_counter_advances(self):
        a = SplitMixStream(1, 0)
        first, second = a.random(3), a.random(2)
        assert np.array_equal(np.concatenate([first, second]), SplitMixStream(1, 0).random(5))

    def test_keys_distinct(self):
        keys = stream_keys(0, np.arange(10000))
        assert len(set(keys.tolist())) == 10000
        assert int(stream_keys(0, [0])[0]) != int(stream_keys(1, [0])[0])

    def test_avalanche(self):
        # flipping one input bit flips about half the output bits
        x = np.arange(1, 2001, dtype=np.uint64) * np.uint64(0x2545F4914F6CDD1D)
        flips = []
        for bit in range(64):
            d = mix64(x) ^ mix64(x ^ np.uint64(1 << bit))
            flips.append(np.mean([bin(int(v)).count("1") for v in d]))
        assert 31 < min(flips) and max(flips) < 33

    def test_uniform_range(self):
        u = SplitMixStream(3, 9).random(100000)
        assert u.min() >= 0 and u.max() < 1
        assert abs(u.mean() - 0.5) < 0.005

    def test_negative_and_huge_seeds(self):
        assert SplitMixStream(-1, 0).random(2).shape == (2,)
        assert np.array_equal(SplitMixStream(-1, 0).random(2), SplitMixStream(2**64 - 1, 0).random(2))


class TestSampleStep:
    def test_classic_is_deterministic(self, rng):
        for seed in range(20):
            mask = rng.random((5, 6)) < 0.4
            s = GridState(mask.astype(float))
            nxt = sample_step(s, classic_life(), BoundaryPolicy.DEAD, SplitMixStream(seed))
            assert cells_of(nxt) == life_step_reference(cells_of(s), 6, 5)

    def test_all_dead_stays_dead(self, standard):
        s = GridState.zeros(4, 4)
        assert sample_step(s, standard, BoundaryPolicy.DEAD, SplitMixStream()) == s.with_generation(1)

    def test_zero_ruleset_kills(self, rng):
        r = Ruleset.from_dicts()
        for seed in range(10):
            s = GridState((rng.random((4, 4)) < 0.7).astype(float))
            assert not sample_step(s, r, BoundaryPolicy.TOROIDAL, SplitMixStream(seed)).values.any()

    def test_fig1_state2_is_possible(self, fig2_start, standard):
        mf = step(fig2_start, standard)
        target = FIG1_STATES[1]
        # product of firing probabilities of the five live cells; all others fire with prob 0
        prob = np.prod([mf[x, y] for x, y in target])
        assert prob == pytest.approx(0.8 * 0.8 * 0.9 * 0.9 * 0.9, abs=1e-15)
        outcomes = [cells_of(sample_step(fig2_start, standard, BoundaryPolicy.DEAD,
                                         SplitMixStream(0, i))) for i in range(4000)]
        assert all(o <= target for o in outcomes)
        hit = np.mean([o == target for o in outcomes])
        assert abs(hit - prob) < 4 * np.sqrt(prob * (1 - prob) / 4000)

    def test_rejects_float_grid(self, standard):
        with pytest.raises(ValueError):
            sample_step(GridState(np.full((2, 2), 0.5)), standard, BoundaryPolicy.DEAD,
                        SplitMixStream())

    def test_accepts_numpy_generator(self, standard, fig2_start, rng):
        out = sample_step(fig2_start, standard, BoundaryPolicy.DEAD, rng)
        assert out.is_binary()


class TestTrajectory:
    def test_zero_steps(self, fig2_start, standard):
        assert sample_trajectory(fig2_start, standard, 0) == [fig2_start]

    def test_reproducible(self, fig2_start, standard):
        a = sample_trajectory(fig2_start, standard, 5, seed=7, index=2)
        b = sample_trajectory(fig2_start, standard, 5, seed=7, index=2)
        assert a == b
        c = [sample_trajectory(fig2_start, standard, 5, seed=7, index=i) for i in range(5)]
        assert any(t != a for t in c)

    def test_fig1_classic(self):
        states = sample_trajectory(load_bundled_pattern("fig1"), classic_life(), 2, seed=3)
        assert [cells_of(s) for s in states] == FIG1_STATES

    def test_float_start_is_realised(self):
        s0 = GridState(np.full((3, 3), 0.5))
        first = sample_trajectory(s0, classic_life(), 1, seed=1)[0]
        assert first.is_binary()
        fracs = np.mean([sample_trajectory(s0, classic_life(), 0, seed=1, index=i)[0].values
                         for i in range(2000)], axis=0)
        assert np.all(np.abs(fracs - 0.5) < 4 * np.sqrt(0.25 / 2000))


class TestEstimates:
    def test_classic_exact(self, fig2_start):
        est = estimate_marginals(fig2_start, classic_life(), 2, 50)
        assert np.array_equal(est.means, run(fig2_start, classic_life(), 2)[-1].values)
        assert not est.stderr.any()
        assert est.samples == 50 and est.generation == 2

    def test_strobing_bernoulli(self):
        est = estimate_marginals(GridState.zeros(2, 2), Ruleset.from_dicts(birth={0: 0.8}), 1,
                                 100000, seed=11)
        assert np.all(np.abs(est.means - 0.8) < 0.01)
        np.testing.assert_allclose(est.stderr, np.sqrt(est.means * (1 - est.means) / 100000))

    def test_equals_mean_of_trajectories(self):
        s, r = blinker_3x3(), parse_ruleset(SAMPLER_RULES)
        n = 300
        final = sum(sample_trajectory(s, r, 3, seed=9, index=i)[-1].values for i in range(n))
        assert np.array_equal(estimate_marginals(s, r, 3, n, seed=9).means, final / n)

    def test_float_start_matches_trajectories(self):
        s, r = GridState(np.full((2, 3), 0.6)), parse_ruleset(SAMPLER_RULES)
        final = sum(sample_trajectory(s, r, 2, seed=4, index=i)[-1].values for i in range(200))
        assert np.array_equal(estimate_marginals(s, r, 2, 200, seed=4).means, final / 200)

    def test_parallelism_and_chunking_invariant(self):
        s, r = blinker_3x3(), parse_ruleset(SAMPLER_RULES)
        base = alive_counts(s, r, 3, 20000, seed=2)
        for workers, chunk in [(4, 1000), (3, 7777), (1, 20000)]:
            assert np.array_equal(alive_counts(s, r, 3, 20000, seed=2, workers=workers,
                                               chunk=chunk), base)

    def test_all_generations(self):
        s, r = blinker_3x3(), parse_ruleset(SAMPLER_RULES)
        all_gens = estimate_all_generations(s, r, 3, 500, seed=1)
        assert [e.generation for e in all_gens] == [0, 1, 2, 3]
        assert np.array_equal(all_gens[-1].means, estimate_marginals(s, r, 3, 500, seed=1).means)
        assert np.array_equal(all_gens[0].means, s.values)

    def test_invalid(self, standard):
        with pytest.raises(ValueError):
            estimate_marginals(blinker_3x3(), standard, 1, 0)


def test_statistical_consistency_over_seeds():
    # 20 seeds x 9 cells, one 4-sigma miss tolerated: P(fail) ~ 6e-5
    s, r = blinker_3x3(), parse_ruleset(SAMPLER_RULES)
    exact = run_exact(s, r, 3)[-1].values
    misses = 0
    for seed in range(100, 120):
        est = estimate_marginals(s, r, 3, 20000, seed=seed)
        misses += int(np.sum(np.abs(est.means - exact) > 4 * est.stderr))
    assert misses <= 1


def test_sgl_variant_is_a_ruleset():
    # stochastic birth on two neighbours, certain birth on three
    pb = 0.3
    r = Ruleset.from_dicts(birth={2: pb, 3: 1.0}, survive={2: 1.0, 3: 1.0})
    s = GridState.from_cells(4, 3, [(1, 1), (2, 1)])
    est = estimate_marginals(s, r, 1, 40000, seed=5)
    exact = run_exact(s, r, 1)[-1].values
    assert np.all(np.abs(est.means - exact) <= 4 * est.stderr + 1e-12)
    assert exact[0, 1] == pytest.approx(pb)


def test_random_rulesets_against_exact(rng):
    for _ in range(5):
        r = random_ruleset(rng, 0.8)
        s = GridState((rng.random((3, 3)) < 0.5).astype(float))
        exact = run_exact(s, r, 2)[-1].values
        est = estimate_marginals(s, r, 2, 40000, seed=int(rng.integers(1 << 30)))
        assert np.all(np.abs(est.means - exact) <= 5 * est.stderr + 5e-4)
