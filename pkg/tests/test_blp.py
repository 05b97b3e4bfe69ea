import numpy as np
import pytest

from backflow import blp, spinchain
from backflow.blp import (
    bloch_pair_grid,
    distance_profile,
    increasing_intervals,
    nm_measure_fixed_pair,
    nm_measure_maximized,
)
from backflow.dephasing import (
    DoubleLorentzian,
    SingleLorentzian,
    dephasing_function,
    discretize,
    full_model,
)
from backflow.spinchain import SpinChainSpec

SPLIT_CENTERS = DoubleLorentzian(omega0_1=1.0, delta1=1.0, omega0_2=9.0, delta2=1.0, r=1.0)


class TestIncreasingIntervals:
    def test_monotone_decreasing_has_none(self):
        times = np.arange(5.0)
        profile = increasing_intervals(times, [1.0, 0.8, 0.5, 0.3, 0.1])
        assert profile.intervals == ()
        assert profile.total_increase() == 0.0
        assert not profile.flags().any()

    def test_two_rises(self):
        times = np.arange(5.0)
        profile = increasing_intervals(times, [1.0, 0.4, 0.6, 0.5, 0.7])
        assert profile.intervals == ((1, 2), (3, 4))
        assert profile.total_increase() == pytest.approx(0.4, abs=1e-15)
        np.testing.assert_array_equal(profile.flags(), [False, True, True, True, True])

    def test_merges_consecutive_rises(self):
        profile = increasing_intervals(np.arange(6.0), [0.5, 0.1, 0.2, 0.3, 0.4, 0.2])
        assert profile.intervals == ((1, 4),)
        assert profile.total_increase() == pytest.approx(0.3, abs=1e-15)

    def test_rise_at_the_end(self):
        profile = increasing_intervals(np.arange(3.0), [0.5, 0.2, 0.9])
        assert profile.intervals == ((1, 2),)

    def test_rise_tolerance_filters_jitter(self):
        values = [0.5, 0.5 + 1e-12, 0.5, 0.5 + 1e-12]
        profile = increasing_intervals(np.arange(4.0), values, rise_tol=1e-10)
        assert profile.intervals == ()

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="match"):
            increasing_intervals([0.0, 1.0], [1.0, 2.0, 3.0])

    def test_non_ascending_times(self):
        with pytest.raises(ValueError, match="ascending"):
            increasing_intervals([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])

    def test_split_centers_coherence_revives(self):
        ts = np.linspace(0.0, 3.0, 100)
        profile = increasing_intervals(ts, np.abs(dephasing_function(SPLIT_CENTERS, ts)))
        assert len(profile.intervals) >= 1


class TestFixedPairMeasure:
    def test_single_lorentzian_is_markovian(self):
        env = discretize(SingleLorentzian(1.0, 1.0), modes=64, window=20.0)
        sc = full_model(env)
        assert nm_measure_fixed_pair(sc, np.linspace(0.0, 3.0, 40)) == 0.0

    def test_equal_centers_is_markovian(self):
        # the mode comb must be dense enough to push its recurrence past the
        # grid, else aliasing fabricates revivals the continuum does not have
        dist = DoubleLorentzian(1.0, 1.0, 1.0, 10.0, 1.0)
        env = discretize(dist, modes=512, window=20.0)
        sc = full_model(env)
        assert nm_measure_fixed_pair(sc, np.linspace(0.0, 3.0, 40)) == 0.0

    def test_pipeline_matches_closed_form(self):
        # the discrete environment makes both routes share the same k exactly
        env = discretize(SPLIT_CENTERS, modes=96, window=20.0)
        sc = full_model(env)
        ts = np.linspace(0.0, 3.0, 60)
        from_pipeline = nm_measure_fixed_pair(sc, ts)
        closed = increasing_intervals(ts, np.abs(dephasing_function(env, ts))).total_increase()
        assert from_pipeline == pytest.approx(closed, abs=1e-9)
        assert from_pipeline > 0

    def test_profile_flags_mark_growth(self):
        env = discretize(SPLIT_CENTERS, modes=96, window=20.0)
        sc = full_model(env)
        ts = np.linspace(0.0, 2.0, 40)
        profile = distance_profile(sc, ts)
        assert profile.flags().sum() > 0

    def test_refinement_never_loses_more_than_tolerance(self):
        ts_coarse = np.linspace(0.0, 3.0, 31)
        ts_fine = np.linspace(0.0, 3.0, 61)  # nested: every coarse point included
        vals = lambda ts: np.abs(dephasing_function(SPLIT_CENTERS, ts))
        coarse = increasing_intervals(ts_coarse, vals(ts_coarse)).total_increase()
        fine = increasing_intervals(ts_fine, vals(ts_fine)).total_increase()
        assert fine >= coarse - len(ts_fine) * blp.DEFAULT_RISE_TOL


class TestPairGrid:
    def test_antipodal_structure(self):
        pairs = bloch_pair_grid(3, 4)
        assert len(pairs) == 12
        for (th1, ph1), (th2, ph2) in pairs:
            assert th2 == pytest.approx(np.pi - th1, abs=1e-12)
            assert (ph2 - ph1) % (2 * np.pi) == pytest.approx(np.pi, abs=1e-12)

    def test_full_grid_behind_flag(self):
        pairs = bloch_pair_grid(2, 2, antipodal=False)
        assert len(pairs) == 16

    def test_bad_resolution(self):
        with pytest.raises(ValueError):
            bloch_pair_grid(0, 4)


class TestMaximizedMeasure:
    def test_identical_pairs_give_zero(self):
        env = discretize(SPLIT_CENTERS, modes=48, window=15.0)
        make = lambda r1, r2: full_model(env, pair=(r1, r2))
        pairs = [((0.7, 0.3), (0.7, 0.3)), ((1.2, 2.0), (1.2, 2.0))]
        value, _ = nm_measure_maximized(make, np.linspace(0.0, 2.0, 20), pairs)
        assert value == 0.0

    def test_dephasing_maximum_on_the_equator(self):
        env = discretize(SPLIT_CENTERS, modes=48, window=15.0)
        make = lambda r1, r2: full_model(env, pair=(r1, r2))
        ts = np.linspace(0.0, 2.0, 30)
        value, best = nm_measure_maximized(make, ts, bloch_pair_grid(5, 4))
        assert best[0][0] == pytest.approx(np.pi / 2, abs=1e-12)
        # the +/- pair attains the same maximum: D(t) = |k(t)| for every
        # equatorial antipodal pair
        closed = increasing_intervals(ts, np.abs(dephasing_function(env, ts))).total_increase()
        assert value == pytest.approx(closed, abs=1e-9)
        plus_minus_value = nm_measure_fixed_pair(
            full_model(env), ts
        )
        assert value == pytest.approx(plus_minus_value, abs=1e-12)

    def test_spin_chain_equator_dominates_poles(self):
        spec = SpinChainSpec(sites=3, exchange=1.0, probe_exchange=1.0, field=0.01)
        make = lambda r1, r2: spinchain.scenario(spec, pair=(r1, r2))
        ts = np.linspace(0.0, 2.0, 25)
        equatorial = [((np.pi / 2, 0.0), (np.pi / 2, np.pi))]
        polar = [((0.0, 0.0), (np.pi, np.pi))]
        eq_value, _ = nm_measure_maximized(make, ts, equatorial)
        polar_value, _ = nm_measure_maximized(make, ts, polar)
        assert eq_value >= polar_value - 1e-12

    def test_empty_pairs_rejected(self):
        with pytest.raises(ValueError):
            nm_measure_maximized(lambda a, b: None, [0.0, 1.0], [])
