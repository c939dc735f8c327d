import numpy as np
import pytest

from semipert.funcspace import CompactWindow, constant, from_callable
from semipert.measures import (
    RegularMeasure,
    integrate,
    is_nonnegative,
    point_mass,
    support_bound,
    tail_mass,
    total_variation,
    uniform_density,
    upper_tail,
)
from conftest import random_nonneg_grid_function


class TestIntegrate:
    def test_unit_atom_squares(self):
        f = from_callable(lambda x: np.asarray(x, float) ** 2, sup_bound=100.0)
        assert integrate(point_mass(0.0), f) == 0.0

    def test_unit_density_constant(self):
        assert integrate(uniform_density(0.0, 1.0), constant(3.5)) == pytest.approx(3.5)

    def test_atom_weight(self):
        assert integrate(point_mass(0.0, 0.5), constant(1.0)) == 0.5

    def test_bound_by_total_variation(self, rng):
        for _ in range(50):
            mu = point_mass(rng.uniform(-2, 2), rng.uniform(-1, 1)) + \
                uniform_density(-1.0, rng.uniform(0, 2), rng.uniform(-1, 1))
            f = random_nonneg_grid_function(rng)
            assert abs(integrate(mu, f)) <= total_variation(mu) * f.sup_bound + 1e-10

    def test_linear_in_measure_and_function(self, rng):
        f = random_nonneg_grid_function(rng)
        g = random_nonneg_grid_function(rng)
        mu = point_mass(0.3, 0.2) + uniform_density(0.0, 2.0, 0.1)
        nu = point_mass(-1.0, -0.4)
        assert integrate(mu + nu, f) == pytest.approx(
            integrate(mu, f) + integrate(nu, f), rel=1e-14)
        assert integrate(mu, f + g) == pytest.approx(
            integrate(mu, f) + integrate(mu, g), rel=1e-13)
        assert integrate(2.0 * mu, f) == pytest.approx(2.0 * integrate(mu, f))


class TestTotalVariation:
    def test_single_atom(self):
        assert total_variation(point_mass(0.0, 0.5)) == 0.5

    def test_atom_plus_density(self):
        mu = point_mass(0.0, 0.4) + uniform_density(0.0, 1.0, 0.1)
        assert total_variation(mu) == pytest.approx(0.5)

    def test_signed_atoms_add_in_absolute_value(self):
        mu = point_mass(1.0, -0.3) + point_mass(2.0, 0.3)
        assert total_variation(mu) == pytest.approx(0.6)


class TestTailMass:
    def test_atom_inside(self):
        assert tail_mass(point_mass(0.0, 0.5), CompactWindow(-1, 1)) == 0.0

    def test_atom_outside(self):
        assert tail_mass(point_mass(5.0, 0.5), CompactWindow(-1, 1)) == 0.5

    def test_density_clipped(self):
        # clipped length times height: [0,2] density of height 1, window [0,1]
        assert tail_mass(uniform_density(0.0, 2.0), CompactWindow(0, 1)) == pytest.approx(1.0)

    def test_vanishes_for_large_windows(self, rng):
        mu = point_mass(3.0, 0.2) + uniform_density(-4.0, 2.0, 0.1)
        r = support_bound(mu)
        assert tail_mass(mu, CompactWindow(-r, r)) == 0.0


class TestUpperTail:
    def test_atom_at_cut_included(self):
        assert upper_tail(point_mass(0.0, 0.5), 0.0) == 0.5

    def test_atom_below_cut(self):
        assert upper_tail(point_mass(0.0, 0.5), 0.1) == 0.0

    def test_density_length(self):
        assert upper_tail(uniform_density(0.0, 1.0), 0.25) == pytest.approx(0.75)


class TestValidation:
    def test_bad_interval(self):
        with pytest.raises(ValueError):
            RegularMeasure(densities=((1.0, 1.0, 0.5),))

    def test_nonnegativity_probe(self):
        assert is_nonnegative(point_mass(0.0, 0.5) + uniform_density(0, 1, 0.1))
        assert not is_nonnegative(point_mass(0.0, -0.5))
