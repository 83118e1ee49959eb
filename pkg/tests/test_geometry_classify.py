"""Tests for state-space geometry, Hölder reports, and boundary classification."""

import numpy as np
import pytest

from kimura.classify import (
    DomainSpec,
    IntervalDriftOp,
    ProductWfOp,
    ScaledOp,
    SimplexMutationOp,
    classify_boundary,
    domain_from_json,
    long_time_limit,
    operator_from_json,
)
from kimura.errors import DomainError, NotCleanError, SmoothnessError
from kimura.geometry import (
    WfPoint,
    wf_ball_interval,
    wf_distance,
    wf_distance_parabolic,
    wf_midpoint,
)
from kimura.grids import GridFunction
from kimura.holder import holder_norm_2plus, holder_seminorm
from kimura.operators import KimuraOp1D, neutral_wf_op, wright_fisher_op
from kimura.sampling import RngStream, estimate_fixation


class TestDistance:
    def test_identity(self):
        p = WfPoint(np.array([0.3, 2.0]), np.array([1.0]))
        assert wf_distance(p, p) == 0.0

    def test_unit_interval_endpoints(self):
        assert wf_distance(0.0, 1.0) == 1.0

    def test_formula(self):
        p = WfPoint(np.array([4.0, 1.0]), np.array([2.0, -1.0]))
        q = WfPoint(np.array([1.0, 0.0]), np.array([0.5, 1.0]))
        expect = (2 - 1) + (1 - 0) + 1.5 + 2.0
        assert wf_distance(p, q) == pytest.approx(expect, rel=1e-15)

    def test_parabolic_adds_sqrt_gap(self):
        d0 = wf_distance(1.0, 4.0)
        assert wf_distance_parabolic(1.0, 0.5, 4.0, 0.25) == \
            pytest.approx(d0 + 0.5, rel=1e-15)

    def test_metric_axioms_random_triples(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            a, b, c = (WfPoint(rng.uniform(0, 4, 3), rng.normal(size=2))
                       for _ in range(3))
            dab, dbc, dac = (wf_distance(a, b), wf_distance(b, c),
                             wf_distance(a, c))
            assert dab == wf_distance(b, a)
            assert dac <= dab + dbc + 1e-12
            assert dab >= 0

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            wf_distance(WfPoint(np.array([1.0])), WfPoint(np.array([1.0, 2.0])))

    def test_negative_coordinate_rejected(self):
        with pytest.raises(DomainError):
            WfPoint(np.array([-0.1]))


class TestBallInterval:
    def test_paper_values(self):
        assert wf_ball_interval(1.0, 4.0) == pytest.approx((0.25, 6.25))
        assert wf_ball_interval(0.0, 1.0) == pytest.approx((0.0, 2.25))

    def test_ordering_and_positivity_threshold(self):
        # alpha > 0 exactly when x1/x2 > 1/9
        a, b = wf_ball_interval(0.2, 1.0)
        assert 0 < a < 0.2 < 1.0 < b
        a, _ = wf_ball_interval(1.0 / 9.0, 1.0)
        assert a == 0.0
        a, _ = wf_ball_interval(1.0 / 9.0 + 1e-6, 1.0)
        assert a > 0.0

    def test_midpoint(self):
        assert wf_midpoint(1.0, 4.0) == pytest.approx(2.25)
        # metric midpoint: equidistant in sqrt coordinates
        m = wf_midpoint(0.3, 2.7)
        assert wf_distance(0.3, m) == pytest.approx(wf_distance(m, 2.7))

    def test_invalid(self):
        with pytest.raises(DomainError):
            wf_ball_interval(1.0, 1.0)
        with pytest.raises(DomainError):
            wf_ball_interval(-0.1, 1.0)


class TestHolderSeminorm:
    def test_constant_is_zero(self):
        g = GridFunction(np.linspace(0, 1, 50), np.full(50, 3.7))
        rep = holder_seminorm(g, 0.5)
        assert rep.seminorm == 0.0
        assert rep.sup_norm == pytest.approx(3.7)

    def test_sqrt_at_gamma_one(self):
        # |sqrt x - sqrt x'| / |sqrt x - sqrt x'|^1 == 1 for every pair
        x = np.linspace(0, 1, 80)
        rep = holder_seminorm(GridFunction(x, np.sqrt(x)), 1.0)
        assert rep.seminorm == pytest.approx(1.0, rel=1e-12)

    def test_agrees_with_brute_force(self):
        x = np.linspace(0, 1, 60)
        vals = x ** 2 - 0.3 * x
        gamma = 0.5
        best = 0.0
        for i in range(60):
            for j in range(i + 1, 60):
                d = abs(np.sqrt(x[i]) - np.sqrt(x[j]))
                if 0 < d <= 1:
                    best = max(best, abs(vals[i] - vals[j]) / d ** gamma)
        rep = holder_seminorm(GridFunction(x, vals), gamma)
        assert rep.seminorm == pytest.approx(best, rel=1e-13)

    def test_homogeneity(self):
        x = np.linspace(0, 2, 40)
        vals = np.sin(x)
        base = holder_seminorm(GridFunction(x, vals), 0.3).seminorm
        for c in (0.25, 2.0, -3.0):
            rep = holder_seminorm(GridFunction(x, c * vals), 0.3)
            assert rep.seminorm == pytest.approx(abs(c) * base, rel=1e-12)

    def test_pair_restriction_to_unit_distance(self):
        # node 4.0 is sqrt-distance >= 1.5 from the others, so the huge
        # far increment is excluded and only the close pair counts
        x = np.array([0.0, 0.25, 4.0])
        vals = np.array([0.0, 2.0, 100.0])
        rep = holder_seminorm(GridFunction(x, vals), 0.5)
        assert rep.seminorm == pytest.approx(2.0 / 0.5 ** 0.5, rel=1e-12)

    def test_parabolic_mode(self):
        x = np.linspace(0, 1, 30)
        times = np.array([0.0, 0.25])
        snaps = [GridFunction(x, np.zeros(30)), GridFunction(x, np.full(30, 1.0))]
        rep = holder_seminorm(snaps, 0.5, mode="parabolic", times=times)
        # same node across the time gap: |1 - 0| / sqrt(0.25)^0.5
        assert rep.seminorm >= 1.0 / 0.25 ** 0.25 - 1e-12

    def test_bad_inputs(self):
        g = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        with pytest.raises(DomainError):
            holder_seminorm(g, 0.0)
        with pytest.raises(DomainError):
            holder_seminorm(g, 0.5, mode="weird")
        lone = GridFunction(np.array([0.0, 9.0]), np.array([0.0, 1.0]))
        with pytest.raises(DomainError):
            # the only pair is at distance 3 > 1: empty pair set
            holder_seminorm(lone, 0.5)


class TestHolder2Plus:
    def test_linear_function(self):
        x = np.linspace(0, 1, 101)
        rep = holder_norm_2plus(GridFunction(x, x), 0.5,
                                df=lambda x: np.ones_like(x),
                                d2f=lambda x: np.zeros_like(x))
        assert rep.components["xd2f"]["seminorm"] == 0.0
        assert rep.components["xd2f"]["sup_norm"] == 0.0
        assert rep.components["df"]["seminorm"] == 0.0
        assert not rep.flagged

    def test_vanishing_condition_holds(self):
        # f = x^{3/2}: x f'' = 0.75 sqrt(x) -> 0 at the left edge
        x = np.linspace(1e-4, 1, 400)
        rep = holder_norm_2plus(
            GridFunction(x, x ** 1.5), 0.5,
            df=lambda x: 1.5 * np.sqrt(x),
            d2f=lambda x: 0.75 / np.sqrt(x))
        assert not rep.flagged
        assert np.isfinite(rep.seminorm)

    def test_vanishing_condition_violated(self):
        # f = sqrt(x): x f'' = -x^{-1/2}/4 blows up at the edge
        x = np.linspace(1e-4, 1, 400)
        rep = holder_norm_2plus(
            GridFunction(x, np.sqrt(x)), 0.5,
            df=lambda x: 0.5 / np.sqrt(x),
            d2f=lambda x: -0.25 * x ** -1.5)
        assert rep.flagged

    def test_difference_fallback(self):
        x = np.linspace(0, 1, 2001)
        rep = holder_norm_2plus(GridFunction(x, x ** 2), 0.5)
        assert rep.components["df"]["sup_norm"] == pytest.approx(2.0, abs=1e-6)

    def test_too_few_nodes(self):
        g = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        with pytest.raises(SmoothnessError):
            holder_norm_2plus(g, 0.5)


class TestClassifyBoundary:
    def test_simplex_no_drift(self):
        dom = DomainSpec("simplex", 2)
        rep = classify_boundary(dom, SimplexMutationOp([0.0, 0.0, 0.0]))
        assert rep.dim_null == 3
        assert all(t.dim == 0 for t in rep.terminal)
        assert {t.description for t in rep.terminal} == {
            "vertex (0, 0)", "vertex (1, 0)", "vertex (0, 1)"}
        assert all(fc.label == "tangent" for fc in rep.faces)

    def test_simplex_inward_drift(self):
        dom = DomainSpec("simplex", 2)
        rep = classify_boundary(dom, SimplexMutationOp([0.3, 0.5, 0.2]))
        assert rep.dim_null == 1
        assert rep.terminal[0].description == "P"
        assert all(fc.label == "transverse" for fc in rep.faces)

    def test_simplex_mixed(self):
        # only the x0 inflow vanishes: that face carries the terminal stratum
        dom = DomainSpec("simplex", 2)
        rep = classify_boundary(dom, SimplexMutationOp([0.0, 0.4, 0.3]))
        assert rep.dim_null == 1
        assert rep.terminal[0].faces == ("x0=0",)
        assert rep.terminal[0].dim == 1

    def test_interval_one_sided(self):
        dom = DomainSpec("interval", 1)
        rep = classify_boundary(dom, IntervalDriftOp(wright_fisher_op(0.0, 0.7)))
        assert rep.dim_null == 1
        assert rep.terminal[0].description == "vertex (0)"
        assert rep.labels() == {"x0=0": "tangent", "x0=1": "transverse"}

    def test_interval_both_transverse(self):
        dom = DomainSpec("interval", 1)
        rep = classify_boundary(dom, IntervalDriftOp(wright_fisher_op(1.0, 2.0)))
        assert rep.dim_null == 1
        assert rep.terminal[0].description == "P"

    def test_interval_neutral(self):
        dom = DomainSpec("interval", 1)
        rep = classify_boundary(dom, IntervalDriftOp(neutral_wf_op()))
        assert rep.dim_null == 2
        assert {t.description for t in rep.terminal} == {
            "vertex (0)", "vertex (1)"}

    def test_cube_product_counts_multiply(self):
        # neutral axis contributes 2 terminal ends, transverse axis 1
        dom = DomainSpec("orthant_cube", 2)
        rep = classify_boundary(dom, ProductWfOp([0.0, 0.5], [0.0, 0.5]))
        assert rep.dim_null == 2
        rep2 = classify_boundary(dom, ProductWfOp([0.0, 0.0], [0.0, 0.0]))
        assert rep2.dim_null == 4
        rep3 = classify_boundary(dom, ProductWfOp([0.2, 0.5], [0.3, 0.5]))
        assert rep3.dim_null == 1

    def test_rescaling_invariance(self):
        dom = DomainSpec("simplex", 2)
        base = SimplexMutationOp([0.0, 0.4, 0.3])
        ref = classify_boundary(dom, base)
        scaled = classify_boundary(
            dom, ScaledOp(base, lambda P: 1.0 + 0.5 * P[:, 0] + 0.25 * P[:, 1]))
        assert scaled.labels() == ref.labels()
        assert [t.faces for t in scaled.terminal] == \
            [t.faces for t in ref.terminal]

    def test_not_clean_raises(self):
        dom = DomainSpec("orthant_cube", 2)

        class SignChanging:
            dim = 2

            def drift(self, P):
                return np.stack([P[:, 1] - 0.5, np.full(len(P), 0.3)], axis=1)

        with pytest.raises(NotCleanError) as exc:
            classify_boundary(dom, SignChanging())
        assert exc.value.face == "x0=0"

    def test_json_interface(self):
        dom = domain_from_json({"kind": "simplex", "dim": 2})
        op = operator_from_json(
            {"name": "kimura_simplex", "params": {"mutation": [0, 0, 0]}}, dom)
        assert classify_boundary(dom, op).dim_null == 3
        with pytest.raises(DomainError):
            domain_from_json({"kind": "simplex", "dim": 2, "extra": 1})
        with pytest.raises(DomainError):
            operator_from_json({"name": "nope"}, dom)
        with pytest.raises(DomainError):
            operator_from_json(
                {"name": "kimura_simplex", "params": {"bad": []}}, dom)
        with pytest.raises(DomainError):
            operator_from_json(
                {"name": "wright_fisher", "params": {"b0": 1}}, dom)


class TestLongTimeLimit:
    def test_constant_preserved(self):
        for op in (neutral_wf_op(), wright_fisher_op(1.0, 2.0),
                   wright_fisher_op(0.0, 0.7)):
            lim = long_time_limit(op, lambda x: np.full_like(
                np.asarray(x, dtype=float), 4.2))
            assert np.allclose(lim(np.linspace(0, 1, 7)), 4.2, rtol=1e-12)

    def test_neutral_harmonic_interpolation(self):
        op = neutral_wf_op()
        lim = long_time_limit(op, lambda x: np.asarray(x) ** 2)
        xs = np.linspace(0.0, 1.0, 11)
        assert np.allclose(lim(xs), xs, atol=1e-9)

    def test_tangent_transverse_gives_boundary_value(self):
        op = wright_fisher_op(0.0, 0.7)
        lim = long_time_limit(op, lambda x: 3.0 + np.asarray(x))
        assert np.allclose(lim(np.array([0.1, 0.9])), 3.0)
        op2 = wright_fisher_op(0.7, 0.0)
        lim2 = long_time_limit(op2, lambda x: 3.0 + np.asarray(x))
        assert np.allclose(lim2(np.array([0.1, 0.9])), 4.0)

    def test_stationary_mean_beta(self):
        # drift b0(1-x) - b1 x with a = 1 has the Beta(b0, b1) invariant law
        lim = long_time_limit(wright_fisher_op(2.0, 3.0), lambda x: np.asarray(x))
        assert float(lim(0.37)) == pytest.approx(0.4, abs=1e-10)
        lim2 = long_time_limit(wright_fisher_op(1.0, 1.0),
                               lambda x: np.asarray(x) ** 2)
        assert float(lim2(0.9)) == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_matches_monte_carlo(self):
        # E[f(X_inf)] for f = x^2 is the fixation frequency, so the path
        # estimator must agree with the predicted limit at the start point
        op = neutral_wf_op()
        lim = long_time_limit(op, lambda x: np.asarray(x) ** 2)
        est = estimate_fixation(op, 0.3, 5000, RngStream(91))
        assert abs(est.mean - float(lim(0.3))) <= 4 * est.std_error

    def test_not_clean_propagates(self):
        bad = KimuraOp1D(a=lambda x: 1.0 + 0.0 * np.asarray(x),
                         drift=lambda x: 1e-8 * (1.0 - np.asarray(x)))
        with pytest.raises(NotCleanError):
            long_time_limit(bad, lambda x: np.asarray(x))
