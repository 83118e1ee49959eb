"""Tests for exact transition sampling and the Wright-Fisher path engine."""

import numpy as np
import pytest
from scipy import integrate, stats

from kimura.errors import DomainError, StepSizeError
from kimura.kernels import kernel_log_1d, transition_measure_1d
from kimura.operators import KimuraOp1D, neutral_wf_op, wright_fisher_op
from kimura.sampling import (
    McEstimate,
    RngStream,
    estimate_absorption_time,
    estimate_fixation,
    sample_path_model,
    sample_path_wf,
    sample_transition,
)
from oracles import transition_cdf_mixture


def ks_statistic(samples, cdf):
    """One-sample KS distance of sorted draws against a vectorized CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    f = cdf(s)
    grid = np.arange(n, dtype=float)
    return max(np.max(np.abs(f - grid / n)), np.max(np.abs(f - (grid + 1) / n)))


def ks_two_sample(a, b):
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    allv = np.concatenate([a, b])
    fa = np.searchsorted(a, allv, side="right") / a.size
    fb = np.searchsorted(b, allv, side="right") / b.size
    return np.max(np.abs(fa - fb))


class TestTransitionSampler:
    def test_x_zero_is_gamma(self):
        # from the origin the law is exactly Gamma(b, scale t)
        b, t = 1.7, 0.4
        y = sample_transition(b, t, 0.0, RngStream(101), size=100_000)
        d = ks_statistic(y, lambda s: stats.gamma.cdf(s, a=b, scale=t))
        assert d <= 0.01

    def test_atom_frequency_b0(self):
        n = 100_000
        y = sample_transition(0.0, 1.0, 1.0, RngStream(7), size=n)
        freq = np.mean(y == 0.0)
        p = np.exp(-1.0)
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(freq - p) <= 3 * sigma

    def test_mixture_cdf_matches_kernel_quadrature(self):
        # ties the sampling law to the transition density: the Poisson-Gamma
        # mixture CDF must agree with direct quadrature of the kernel
        b, t, x = 0.5, 0.3, 2.0
        # substitute u = sqrt(y): the y^{b-1} edge singularity becomes
        # 2 u^{2b-1}, smooth for b = 1/2, so trapezoid converges at h^2
        us = np.linspace(0.0, np.sqrt(12.0), 24001)
        ys = us ** 2
        integrand = np.zeros_like(us)
        logmag, _ = kernel_log_1d(b, t, x, ys[1:])
        integrand[1:] = np.exp(logmag) * 2.0 * us[1:]
        quad_cdf = integrate.cumulative_trapezoid(integrand, us, initial=0.0)
        mix_cdf = transition_cdf_mixture(b, t, x, ys)
        assert np.max(np.abs(quad_cdf - mix_cdf)) <= 5e-6

    def test_ks_against_mixture_cdf(self):
        b, t, x = 0.5, 0.3, 2.0
        n = 100_000
        y = sample_transition(b, t, x, RngStream(12), size=n)
        d = ks_statistic(y, lambda s: transition_cdf_mixture(b, t, x, s))
        assert d <= 0.01

    def test_ks_positive_drift_free_cases(self):
        for seed, (b, t, x) in enumerate([(1.0, 1.0, 0.5), (2.5, 0.2, 1.0)]):
            y = sample_transition(b, t, x, RngStream(40 + seed), size=50_000)
            d = ks_statistic(y, lambda s: transition_cdf_mixture(b, t, x, s))
            assert d <= 0.012

    def test_first_moment(self):
        # E[Y] = x + b t for the model transition
        b, t, x = 0.8, 0.6, 1.1
        n = 200_000
        y = sample_transition(b, t, x, RngStream(3), size=n)
        expect = x + b * t
        sigma = np.std(y, ddof=1) / np.sqrt(n)
        assert abs(np.mean(y) - expect) <= 3 * sigma

    def test_scalar_and_shape(self):
        y = sample_transition(1.0, 0.5, 2.0, RngStream(0))
        assert np.isscalar(y) or np.ndim(y) == 0
        y = sample_transition(1.0, 0.5, 2.0, RngStream(0), size=(3, 4))
        assert y.shape == (3, 4)
        assert np.all(y >= 0.0)

    def test_generator_accepted(self):
        g = np.random.default_rng(5)
        y = sample_transition(0.5, 1.0, 1.0, g, size=10)
        assert y.shape == (10,)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            sample_transition(0.5, 0.0, 1.0, RngStream(0))
        with pytest.raises(DomainError):
            sample_transition(0.5, -1.0, 1.0, RngStream(0))
        with pytest.raises(DomainError):
            sample_transition(-0.5, 1.0, 1.0, RngStream(0))
        with pytest.raises(DomainError):
            sample_transition(0.5, 1.0, -1.0, RngStream(0))
        with pytest.raises(DomainError):
            sample_transition(0.5, 1.0, 1.0, "not a generator")

    def test_determinism(self):
        a = sample_transition(0.5, 0.3, 2.0, RngStream(99, stream=2), size=1000)
        b = sample_transition(0.5, 0.3, 2.0, RngStream(99, stream=2), size=1000)
        assert np.array_equal(a, b)
        c = sample_transition(0.5, 0.3, 2.0, RngStream(99, stream=3), size=1000)
        assert not np.array_equal(a, c)


class TestModelPath:
    def test_absorbed_at_zero_stays(self):
        # b = 0 starting at the origin: the path is identically zero
        path = sample_path_model(0.0, [0.1, 0.4, 1.0], 0.0, RngStream(1))
        assert np.array_equal(path, np.zeros(3))

    def test_marginal_matches_direct(self):
        # the time-t marginal of the path must be the one-step law
        b, x0 = 0.7, 1.1
        times = [0.2, 0.5, 0.9]
        n = 50_000
        rng = RngStream(23).generator()
        finals = np.empty(n)
        for i in range(n):
            finals[i] = sample_path_model(b, times, x0, rng)[-1]
        direct = sample_transition(b, times[-1], x0, RngStream(24), size=n)
        assert ks_two_sample(finals, direct) <= 0.015

    def test_path_mean(self):
        b, x0, t = 0.5, 0.3, 0.8
        n = 50_000
        rng = RngStream(33).generator()
        finals = np.empty(n)
        for i in range(n):
            finals[i] = sample_path_model(b, [0.4, t], x0, rng)[-1]
        sigma = np.std(finals, ddof=1) / np.sqrt(n)
        assert abs(np.mean(finals) - (x0 + b * t)) <= 3 * sigma

    def test_times_validated(self):
        with pytest.raises(DomainError):
            sample_path_model(0.5, [0.5, 0.2], 1.0, RngStream(0))
        with pytest.raises(DomainError):
            sample_path_model(0.5, [-0.1, 0.2], 1.0, RngStream(0))
        with pytest.raises(DomainError):
            sample_path_model(0.5, [0.1, 0.1], 1.0, RngStream(0))

    def test_determinism(self):
        p1 = sample_path_model(0.5, [0.1, 0.3, 0.7], 2.0, RngStream(8, stream=1))
        p2 = sample_path_model(0.5, [0.1, 0.3, 0.7], 2.0, RngStream(8, stream=1))
        assert np.array_equal(p1, p2)


class TestWfPath:
    def test_start_at_absorbing_endpoint(self):
        op = neutral_wf_op()
        path = sample_path_wf(op, 1e-3, 1.0, 0.0, RngStream(2))
        assert path.absorbed
        assert path.endpoint == 0.0
        assert path.time_absorbed == 0.0
        assert np.all(path.states == 0.0)

    def test_states_stay_in_unit_interval(self):
        op = neutral_wf_op()
        path = sample_path_wf(op, 1e-3, 2.0, 0.5, RngStream(4))
        assert np.all(path.states >= 0.0) and np.all(path.states <= 1.0)
        assert path.times[0] == 0.0 and path.states[0] == 0.5

    def test_neutral_absorbs_by_long_horizon(self):
        # slowest neutral mode decays like e^{-2t}, so horizon 10 leaves
        # only ~e^{-20} unabsorbed mass; demand >= 99% over 300 paths
        op = neutral_wf_op()
        n = 300
        absorbed = 0
        for i in range(n):
            path = sample_path_wf(op, 1e-3, 10.0, 0.5, RngStream(60, stream=i))
            absorbed += bool(path.absorbed)
            if path.absorbed:
                assert path.endpoint in (0.0, 1.0)
                assert 0.0 < path.time_absorbed <= 10.0
        assert absorbed >= 0.99 * n

    def test_balanced_mutation_never_absorbs(self):
        # both boundary weights equal 1, so the boundary is inaccessible
        op = wright_fisher_op(1.0, 1.0)
        for i in range(60):
            path = sample_path_wf(op, 1e-3, 3.0, 0.5, RngStream(77, stream=i))
            assert not path.absorbed
            assert np.all((path.states > 0.0) & (path.states < 1.0))

    def test_large_step_raises(self):
        op = neutral_wf_op()
        with pytest.raises(StepSizeError):
            for i in range(50):
                sample_path_wf(op, 0.5, 5.0, 0.05, RngStream(5, stream=i))

    def test_determinism(self):
        op = neutral_wf_op()
        p1 = sample_path_wf(op, 1e-3, 1.0, 0.3, RngStream(11, stream=4))
        p2 = sample_path_wf(op, 1e-3, 1.0, 0.3, RngStream(11, stream=4))
        assert np.array_equal(p1.states, p2.states)
        assert p1.absorbed == p2.absorbed
        assert p1.time_absorbed == p2.time_absorbed

    def test_invalid_inputs(self):
        op = neutral_wf_op()
        with pytest.raises(DomainError):
            sample_path_wf(op, 0.0, 1.0, 0.5, RngStream(0))
        with pytest.raises(DomainError):
            sample_path_wf(op, 1e-3, 1.0, 1.5, RngStream(0))


class TestEstimators:
    def test_fixation_trivial_endpoints(self):
        op = neutral_wf_op()
        est0 = estimate_fixation(op, 0.0, 200, RngStream(1))
        est1 = estimate_fixation(op, 1.0, 200, RngStream(1))
        assert est0.mean == 0.0
        assert est1.mean == 1.0

    def test_fixation_matches_martingale(self):
        # neutral fixation probability equals the starting frequency
        op = neutral_wf_op()
        x0 = 0.3
        est = estimate_fixation(op, x0, 20_000, RngStream(42))
        assert isinstance(est, McEstimate)
        assert est.n == 20_000
        assert abs(est.mean - x0) <= 3 * est.std_error
        assert not est.flagged

    def test_absorption_time_center(self):
        # expected absorption time -[x ln x + (1-x) ln(1-x)] at x = 1/2 is ln 2
        op = neutral_wf_op()
        est = estimate_absorption_time(op, 0.5, 20_000, RngStream(13))
        assert abs(est.mean - np.log(2.0)) <= 3 * est.std_error

    def test_absorption_time_offcenter(self):
        op = neutral_wf_op()
        expect = -(0.1 * np.log(0.1) + 0.9 * np.log(0.9))
        est = estimate_absorption_time(op, 0.1, 20_000, RngStream(14))
        assert abs(est.mean - expect) <= 3 * est.std_error

    def test_absorption_time_at_endpoint(self):
        op = neutral_wf_op()
        est = estimate_absorption_time(op, 0.0, 500, RngStream(15))
        assert est.mean == 0.0
        assert est.std_error == 0.0

    def test_estimators_reject_nonneutral(self):
        op = wright_fisher_op(1.0, 1.0)
        with pytest.raises(DomainError):
            estimate_fixation(op, 0.3, 100, RngStream(0))
        with pytest.raises(DomainError):
            estimate_absorption_time(op, 0.3, 100, RngStream(0))

    def test_absorption_time_rejects_varying_coefficient(self):
        op = KimuraOp1D(a=lambda x: 1.0 + 0.5 * x, drift=lambda x: 0.0 * x)
        with pytest.raises(DomainError):
            estimate_absorption_time(op, 0.3, 100, RngStream(0))

    def test_determinism(self):
        op = neutral_wf_op()
        e1 = estimate_fixation(op, 0.4, 2000, RngStream(9, stream=1))
        e2 = estimate_fixation(op, 0.4, 2000, RngStream(9, stream=1))
        assert e1.mean == e2.mean and e1.std_error == e2.std_error

    def test_measure_consistency(self):
        # sampler frequencies must agree with quadrature of the kernel:
        # P(Y <= c) from the transition measure vs the empirical fraction
        b, t, x, c = 0.5, 0.3, 2.0, 1.0
        meas = transition_measure_1d(b, t, x, level=2)
        rule = meas.rule
        mass_below = meas.atom_weight + float(
            np.sum(rule.weights[rule.nodes <= c]))
        n = 100_000
        y = sample_transition(b, t, x, RngStream(55), size=n)
        freq = np.mean(y <= c)
        sigma = np.sqrt(mass_below * (1 - mass_below) / n)
        assert abs(freq - mass_below) <= 3 * sigma + 1e-3
