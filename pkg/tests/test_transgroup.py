import math

import numpy as np
import pytest
from scipy import integrate as sci_integrate

from semipert.funcspace import CompactWindow, SeminormSpec, constant, from_callable
from semipert.transgroup import (
    ResolventQuadrature,
    TranslationSemigroup,
    apply_T,
    check_bicontinuity_axioms,
    extrapolated_gap,
    g_kernel_threshold,
    h_function,
    hn_family,
    resolvent,
    resolvent_hn_analytic,
)

WINDOW = SeminormSpec(CompactWindow(-2.0, 2.0), 401)


def quad_resolvent_at(n: int, x: float) -> float:
    """Independent oracle: adaptive quadrature of the Laplace integral.

    Beyond T the integrand is exactly e^{-t} (the ramp has saturated), so the
    tail is added in closed form.
    """
    hn = hn_family(n)
    T = max(50.0, 2.0 - x)
    val, _ = sci_integrate.quad(lambda t: math.exp(-t) * hn(x + t), 0.0, T,
                                points=[max(0.0, -x), max(0.0, 1.0 - x)],
                                epsabs=1e-13, epsrel=1e-13, limit=300)
    return val + math.exp(-T)


class TestTranslation:
    def test_zero_time_is_identity(self):
        f = h_function()
        grid = np.linspace(-3, 3, 101)
        assert np.array_equal(apply_T(0.0, f)(grid), f(grid))

    def test_shift_of_h_hits_plateau(self):
        # hand evaluation: shifting by 1 and evaluating at 0 reads h(1) = 1
        assert apply_T(1.0, h_function())(0.0) == 1.0

    def test_semigroup_law_exact(self):
        f = h_function()
        grid = np.linspace(-4, 4, 801)
        lhs = apply_T(0.3, apply_T(0.7, f))(grid)
        rhs = apply_T(1.0, f)(grid)
        assert np.array_equal(lhs, rhs)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            apply_T(-0.1, constant(1.0))

    def test_contraction_constants(self):
        assert TranslationSemigroup.M == 1.0
        assert TranslationSemigroup.omega == 0.0


class TestResolventQuadrature:
    def test_constant_fixed_point(self):
        q = ResolventQuadrature(lam=1.0)
        r = resolvent(q, constant(1.0))
        xs = np.array([-2.0, 0.0, 3.0])
        assert np.max(np.abs(r(xs) - 1.0)) <= 1e-9

    def test_constant_scaling(self):
        q = ResolventQuadrature(lam=2.0)
        r = resolvent(q, constant(3.0))
        assert r(0.5) == pytest.approx(1.5, abs=1e-9)

    def test_step_function_beyond_threshold(self):
        q = ResolventQuadrature(lam=1.0)
        r = resolvent(q, hn_family(0))
        assert r(1.5) == pytest.approx(1.0, abs=1e-9)

    def test_invalid_lambda(self):
        with pytest.raises(ValueError):
            ResolventQuadrature(lam=0.0)

    def test_truncation_bound_attached(self):
        q = ResolventQuadrature(lam=1.0)
        f = constant(1.0)
        r = resolvent(q, f)
        assert r.error_bound >= math.exp(-40.0)
        assert r.sup_bound == f.sup_bound

    def test_resolvent_identity_probe(self):
        # lam R(lam) f - (R(lam) f)' = f, derivative by central differences
        lam = 1.0
        q = ResolventQuadrature(lam=lam)
        f = from_callable(lambda x: 1.0 / (1.0 + np.asarray(x, float) ** 2), 1.0)
        r = resolvent(q, f)
        xs = np.linspace(-2.0, 2.0, 9)
        step = 1e-4
        deriv = (r(xs + step) - r(xs - step)) / (2.0 * step)
        residual = np.max(np.abs(lam * r(xs) - deriv - f(xs)))
        assert residual <= 1e-6


class TestExplicitFamily:
    def test_hn_values(self):
        h2 = hn_family(2)
        assert h2(0.5) == 0.25
        assert h2(-1.0) == 0.0
        for n in range(0, 6):
            assert hn_family(n)(1.5) == 1.0

    def test_h_endpoint_values(self):
        h = h_function()
        assert h(1.0) == 1.0
        assert h(0.0) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_threshold(self):
        assert g_kernel_threshold() == 1.0

    def test_analytic_resolvent_third_case(self):
        for n in (0, 3, 25):
            assert resolvent_hn_analytic(n, 1.5) == 1.0

    def test_analytic_resolvent_at_zero(self):
        # (1 - e^{-1}) + e^{-1} = 1, also the direct Laplace quadrature of the
        # unit step gives 1 at the origin
        assert resolvent_hn_analytic(0, 0.0) == pytest.approx(1.0, rel=1e-14)
        assert quad_resolvent_at(0, 0.0) == pytest.approx(1.0, rel=1e-10)

    def test_case_boundary_continuity(self):
        for n in (0, 1, 7):
            left = resolvent_hn_analytic(n, 1.0 - 1e-12)
            right = resolvent_hn_analytic(n, 1.0 + 1e-12)
            assert left == pytest.approx(right, abs=1e-11)
            assert resolvent_hn_analytic(n, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_analytic_matches_adaptive_quadrature(self):
        for n in (0, 1, 2, 6):
            for x in (-1.5, -0.3, 0.0, 0.4, 0.9, 1.2):
                assert resolvent_hn_analytic(n, x) == pytest.approx(
                    quad_resolvent_at(n, x), rel=1e-10)


class TestExtrapolatedGap:
    def test_right_of_threshold_vanishes(self):
        spec = SeminormSpec(CompactWindow(2.0, 3.0), 101)
        for n in (0, 1, 5):
            assert extrapolated_gap(n, spec) == 0.0

    def test_gap_against_simpson_quadrature(self):
        # cross-check the analytic three-case formula with the budgeted
        # composite Simpson resolvent at n = 1
        q = ResolventQuadrature(lam=1.0)
        r = resolvent(q, hn_family(1))
        h = h_function()
        xs = np.linspace(-2.0, 2.0, 41)
        quad_gap = np.max(np.abs(r(xs) - h(xs)))
        spec = SeminormSpec(CompactWindow(-2.0, 2.0), 41)
        assert extrapolated_gap(1, spec) == pytest.approx(quad_gap, abs=1e-8)

    def test_bound_and_monotonicity_sample(self):
        spec = WINDOW
        gaps = [extrapolated_gap(n, spec) for n in range(1, 31)]
        for n, g in zip(range(1, 31), gaps):
            assert g <= 3.0 / (n + 1)
        assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))


class TestBicontinuity:
    def test_constant_function_all_exact(self):
        rep = check_bicontinuity_axioms(constant(1.0), 1.0, WINDOW)
        assert rep.passed
        assert rep.semigroup_law_residual == 0.0
        assert all(v == 0.0 for _, v in rep.continuity_table)

    def test_h_continuity_table_decreases(self):
        # |h(x+t) - h(x)| <= t on compacts since the slope never exceeds one
        rep = check_bicontinuity_axioms(h_function(), 1.0, WINDOW)
        assert rep.passed
        for t, v in rep.continuity_table:
            assert v <= t + 1e-12

    def test_escaping_bumps_vanish(self):
        spec = SeminormSpec(CompactWindow(-1.0, 1.0), 201)
        rep = check_bicontinuity_axioms(h_function(), 1.0, spec)
        assert rep.equicontinuity_vanishes
        assert rep.equicontinuity_table[-1][1] == 0.0


class TestResolventNormDecay:
    def test_step_resolvent_norm_decreases_in_lambda(self):
        # sampled sup of R(lam) applied to the unit step behaves like 1/lam
        from semipert.funcspace import sup_norm_sampled
        norms = []
        for lam in (1.0, 2.0, 4.0):
            q = ResolventQuadrature(lam=lam)
            r = resolvent(q, hn_family(0))
            norms.append(sup_norm_sampled(r, CompactWindow(-3.0, 6.0), 301))
        assert norms[0] > norms[1] > norms[2]
        for lam, nv in zip((1.0, 2.0, 4.0), norms):
            assert nv == pytest.approx(1.0 / lam, rel=1e-6)
