"""Solution operators: Cauchy, Duhamel, commutation, resolvent, contour, stepper."""

import math

import numpy as np
from scipy.interpolate import CubicSpline
import pytest

from kimura.errors import DomainError, SectorError, StepSizeError
from kimura.grids import GridFunction
from kimura.kernels import ModelSpec, SectorTime
from kimura.operators import neutral_wf_op, wright_fisher_op
from kimura.solve_ops import (
    Contour,
    ModelResolventProvider,
    apply_cauchy,
    apply_duhamel,
    derivative_commute,
    resolvent_apply,
    semigroup_via_contour,
    solve_wf_parametrix,
)

XS = np.linspace(0.0, 8.0, 41)


def smooth_bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x - 1.5) < 1.0
    s = x[m] - 1.5
    out[m] = np.exp(-1.0 / (1.0 - s * s))
    return out


class TestApplyCauchy:
    def test_constant_preserved(self):
        for b in (0.0, 0.5, 2.5):
            v = apply_cauchy(ModelSpec((b,)), 0.5, lambda x: np.ones_like(x),
                             x_out=XS)
            assert np.max(np.abs(v.values - 1.0)) <= 1e-8

    def test_first_moment(self):
        # E[y] = x + b t for the degenerate factor
        for b, t in ((0.7, 0.5), (1.3, 0.02), (0.0, 1.0)):
            v = apply_cauchy(ModelSpec((b,)), t, lambda x: x, x_out=XS)
            assert np.max(np.abs(v.values - (XS + b * t))) < 1e-9 * (1 + XS.max())

    def test_short_time_convergence_holder_data(self):
        f = lambda x: np.minimum(np.sqrt(x), 1.5)
        sups = []
        for t in (1e-3, 1e-4):
            v = apply_cauchy(ModelSpec((0.5,)), t, f, x_out=XS)
            sups.append(np.max(np.abs(v.values - f(XS))))
        assert sups[1] < sups[0] < 0.05

    def test_gridfunction_data_defaults_to_own_nodes(self):
        g = GridFunction(XS, np.cos(XS))
        v = apply_cauchy(ModelSpec((1.0,)), 0.1, g)
        assert np.array_equal(v.nodes, XS)
        assert np.all(np.abs(v.values) <= 1.0 + 1e-12)

    def test_max_principle_real_time(self):
        f = smooth_bump
        hi = float(np.max(f(np.linspace(0, 8, 2001))))
        for b in (0.0, 0.5):
            for t in (0.05, 0.5, 3.0):
                v = apply_cauchy(ModelSpec((b,)), t, f, x_out=XS)
                assert v.values.max() <= hi + 1e-8
                assert v.values.min() >= -1e-8

    def test_semigroup_property(self):
        spec = ModelSpec((0.8,))
        f = smooth_bump
        fine = np.linspace(0.0, 8.0, 321)  # intermediate interpolant grid
        v_st = apply_cauchy(spec, 0.7, f, x_out=XS)
        v_s = apply_cauchy(spec, 0.3, f, x_out=fine)
        v_t_of_s = apply_cauchy(spec, 0.4, v_s, x_out=XS)
        # composed quadrature + interpolation tolerance
        assert np.max(np.abs(v_t_of_s.values - v_st.values)) < 5e-5

    def test_product_tensor_and_euclidean(self):
        ax = np.linspace(0.0, 4.0, 9)
        ay = np.linspace(-2.0, 2.0, 7)
        t = 0.3
        spec = ModelSpec((0.0, 0.5), 1)
        ones = apply_cauchy(
            spec, t, lambda x1, x2, y: np.ones(np.broadcast(x1, x2, y).shape),
            x_out=(ax, ax), y_out=(ay,))
        assert np.max(np.abs(ones.values - 1.0)) <= 1e-8
        mom = apply_cauchy(spec, t, lambda x1, x2, y: x1 * x2 + y,
                           x_out=(ax, ax), y_out=(ay,))
        exact = (ax[:, None, None] * (ax[None, :, None] + 0.5 * t)
                 + ay[None, None, :])
        assert np.max(np.abs(mom.values - exact)) < 1e-10 * (1 + exact.max())

    def test_sector_time_output_complex(self):
        v = apply_cauchy(ModelSpec((0.5,)), SectorTime(0.5, 0.7), smooth_bump,
                        x_out=XS)
        assert np.iscomplexobj(v.values)
        assert np.all(np.isfinite(v.values))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DomainError):
            apply_cauchy(ModelSpec((0.5, 0.5)), 0.1, lambda x1, x2: x1,
                         x_out=(XS,))


class TestDuhamel:
    def test_constant_source(self):
        u = apply_duhamel(ModelSpec((0.7,)), lambda x, s: np.ones_like(x),
                          0.8, x_out=XS)
        assert np.max(np.abs(u.values - 0.8)) <= 1e-7

    def test_linear_source_moment(self):
        b, t = 0.7, 0.8
        u = apply_duhamel(ModelSpec((b,)), lambda x, s: x, t, x_out=XS)
        assert np.max(np.abs(u.values - (XS * t + b * t * t / 2))) < 1e-7 * 10

    def test_time_additivity(self):
        spec = ModelSpec((0.5,))
        g = lambda x, s: np.exp(-x) * (1.0 + np.cos(s))
        t1, t2 = 0.3, 0.5
        u_full = apply_duhamel(spec, g, t1 + t2, n_time_panels=16, x_out=XS)
        # cubic-spline intermediate: interp error ~h^4 stays below tolerance
        # (a piecewise-linear GridFunction would not); kernel mass beyond
        # y = 24 seen from x <= 8 at t2 is ~1e-11 so the clamp is safe
        fine = np.linspace(0.0, 24.0, 241)
        u_t1 = apply_duhamel(spec, g, t1, n_time_panels=8, x_out=fine)
        spl = CubicSpline(fine, u_t1.values)
        flow = apply_cauchy(spec, t2, lambda y: spl(np.minimum(y, 24.0)),
                            x_out=XS)
        tail = apply_duhamel(spec, lambda x, s: g(x, s + t1), t2,
                             n_time_panels=8, x_out=XS)
        assert np.max(np.abs(u_full.values - (flow.values + tail.values))) < 2e-5

    def test_nonpositive_source_keeps_sign(self):
        u = apply_duhamel(ModelSpec((0.5,)), lambda x, s: -smooth_bump(x),
                          1.0, x_out=XS)
        assert np.all(u.values <= 1e-10)

    def test_bound_by_t_sup_g(self):
        u = apply_duhamel(ModelSpec((1.2,)), lambda x, s: np.sin(x + s), 0.6,
                          x_out=XS)
        assert np.max(np.abs(u.values)) <= 0.6 + 1e-8


class TestDerivativeCommute:
    def test_dx_of_linear(self):
        d = derivative_commute(ModelSpec((0.7,)), 0.5,
                               np.polynomial.Polynomial([0.0, 1.0]), 1, 0,
                               x_out=XS)
        assert np.max(np.abs(d.values - 1.0)) < 1e-10

    def test_dt_matches_finite_difference(self):
        spec = ModelSpec((0.6,))
        f = np.polynomial.Polynomial([0.0, 0.0, 1.0])
        t, k = 0.5, 1e-4
        d = derivative_commute(spec, t, f, 0, 1, x_out=XS)
        vp = apply_cauchy(spec, t + k, lambda x: f(x), x_out=XS)
        vm = apply_cauchy(spec, t - k, lambda x: f(x), x_out=XS)
        fd = (vp.values - vm.values) / (2 * k)
        assert np.max(np.abs(d.values - fd)) < 1e-5 * max(1.0, np.max(np.abs(fd)))

    def test_dxx_matches_finite_difference(self):
        spec = ModelSpec((1.1,))
        f = np.polynomial.Polynomial([0.0, 0.0, 0.0, 1.0])
        t, h = 0.4, 1e-3
        xin = np.linspace(0.5, 6.0, 23)
        d = derivative_commute(spec, t, f, 2, 0, x_out=xin)
        vp = apply_cauchy(spec, t, lambda x: f(x), x_out=xin + h)
        v0 = apply_cauchy(spec, t, lambda x: f(x), x_out=xin)
        vm = apply_cauchy(spec, t, lambda x: f(x), x_out=xin - h)
        fd = (vp.values - 2 * v0.values + vm.values) / (h * h)
        assert np.max(np.abs(d.values - fd)) < 1e-4 * max(1.0, np.max(np.abs(fd)))

    def test_insufficient_smoothness_rejected(self):
        from kimura.errors import SmoothnessError
        with pytest.raises(SmoothnessError):
            derivative_commute(ModelSpec((0.5,)), 0.1, lambda x: x, 1, 1,
                               x_out=XS)


class TestResolvent:
    def test_constant(self):
        r = resolvent_apply(ModelSpec((0.5,)), 2.0, lambda x: np.ones_like(x),
                            x_out=XS[:20])
        assert np.max(np.abs(r.values - 0.5)) < 1e-7

    def test_linear_real_and_complex_mu(self):
        for mu in (2.0, 1 + 1j):
            mu_c = complex(mu)
            r = resolvent_apply(ModelSpec((0.5,)), mu, lambda x: x,
                                x_out=XS[:20])
            exact = XS[:20] / mu_c + 0.5 / mu_c ** 2
            assert np.max(np.abs(r.values - exact)) < 1e-5

    def test_positivity_and_bound(self):
        mu = 3.0
        r = resolvent_apply(ModelSpec((0.7,)), mu, smooth_bump, x_out=XS[:20])
        hi = float(np.max(smooth_bump(np.linspace(0, 8, 2001))))
        assert np.all(r.values >= -1e-9)
        assert np.max(r.values) <= hi / mu + 1e-9

    def test_branch_cut_rejected(self):
        with pytest.raises(DomainError):
            resolvent_apply(ModelSpec((0.5,)), -1.0, smooth_bump, x_out=XS[:5])

    def test_bad_ray_rejected(self):
        with pytest.raises(SectorError):
            resolvent_apply(ModelSpec((0.5,)), 5 * np.exp(2j * np.pi / 3),
                            smooth_bump, x_out=XS[:5], theta=0.9)


@pytest.fixture(scope="module")
def provider_bump():
    return ModelResolventProvider(ModelSpec((0.5,)), smooth_bump, XS[:20])


class TestContourSemigroup:
    def test_contour_validation(self):
        with pytest.raises(DomainError):
            Contour(alpha=2.0)
        with pytest.raises(DomainError):
            Contour(R=-1.0)

    def test_constant_reconstructed(self):
        prov = ModelResolventProvider(ModelSpec((0.5,)),
                                      lambda x: np.ones_like(x), XS[:12])
        for t in (0.5, 2.0):
            sg = semigroup_via_contour(prov, t)
            assert np.max(np.abs(sg - 1.0)) < 1e-4

    def test_matches_direct_kernel(self, provider_bump):
        for t in (0.5, 2.0):
            sg = semigroup_via_contour(provider_bump, t)
            direct = apply_cauchy(ModelSpec((0.5,)), t, smooth_bump,
                                  x_out=XS[:20])
            assert np.max(np.abs(sg - direct.values)) < 1e-4

    def test_long_time(self):
        # the arc amplifies resolvent error by e^{R t}; scale R like 1/t
        prov = ModelResolventProvider(ModelSpec((0.5,)), smooth_bump,
                                      XS[:20], R_min=0.1)
        sg = semigroup_via_contour(prov, 10.0, Contour(R=0.1))
        direct = apply_cauchy(ModelSpec((0.5,)), 10.0, smooth_bump,
                              x_out=XS[:20])
        assert np.max(np.abs(sg - direct.values)) < 1e-3

    def test_off_sector_mu_rejected_by_provider(self, provider_bump):
        with pytest.raises(SectorError):
            provider_bump(-2.0 + 0.001j)


class TestParametrix:
    def test_harmonic_neutral(self):
        w = solve_wf_parametrix(neutral_wf_op(), lambda x: x, 0.5, 1e-3)
        assert np.max(np.abs(w.values - w.nodes)) <= 1e-3

    def test_constant_exact(self):
        w = solve_wf_parametrix(wright_fisher_op(0.5, 0.5),
                                lambda x: np.ones_like(x), 0.3, 1e-3)
        assert np.max(np.abs(w.values - 1.0)) < 1e-12

    def test_discrete_max_principle(self):
        f = lambda x: np.sin(math.pi * x) ** 2
        w = solve_wf_parametrix(wright_fisher_op(0.7, 1.2, 0.4), f, 0.4, 1e-3)
        assert w.values.max() <= 1.0 + 1e-8
        assert w.values.min() >= -1e-8

    def test_self_convergence(self):
        op = wright_fisher_op(0.5, 0.5)
        f = lambda x: x * (1.0 - x)
        t = 0.1
        coarse = solve_wf_parametrix(op, f, t, 1e-3)
        fine = solve_wf_parametrix(op, f, t, 1.25e-4)
        vals_fine = fine(coarse.nodes)
        assert np.max(np.abs(coarse.values - vals_fine)) <= 2e-3

    def test_step_size_guards(self):
        with pytest.raises(StepSizeError):
            solve_wf_parametrix(neutral_wf_op(), lambda x: x, 0.1, 0.02,
                                delta=0.1)
        with pytest.raises(StepSizeError):
            solve_wf_parametrix(neutral_wf_op(), lambda x: x, 0.1, 5e-3,
                                delta=0.12)
