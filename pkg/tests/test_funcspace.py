import numpy as np
import pytest

from semipert.errors import PreconditionError
from semipert.funcspace import (
    BiAMCheck,
    CompactWindow,
    MixedSeminormSpec,
    SeminormSpec,
    abs_val,
    check_bi_am,
    check_compatibility,
    compact_sup_seminorm,
    constant,
    from_callable,
    from_grid,
    lattice_inf,
    lattice_sup,
    mixed_seminorm,
    neg_part,
    pos_part,
    sup_norm_sampled,
)
from conftest import random_nonneg_grid_function


def spec(a, b, resolution=201):
    return SeminormSpec(CompactWindow(a, b), resolution)


class TestSeminorm:
    def test_zero_function(self):
        assert compact_sup_seminorm(constant(0.0), spec(-3, 5)) == 0.0

    def test_identity_sup_at_endpoint(self):
        f = from_callable(lambda x: np.asarray(x, float), sup_bound=2.0)
        assert compact_sup_seminorm(f, spec(-2, 2)) == 2.0

    def test_exp_plateau_on_window(self):
        # dense-grid oracle: max of min(e^{x-1}, 1) on [-2, 2] is 1, attained
        # on the plateau
        from semipert.transgroup import h_function
        h = h_function()
        dense = np.linspace(-2, 2, 100001)
        oracle = np.max(np.abs(np.minimum(np.exp(dense - 1.0), 1.0)))
        got = compact_sup_seminorm(h, spec(-2, 2))
        assert got == pytest.approx(oracle, abs=0)
        assert got == 1.0

    def test_lower_bound_of_declared_sup(self, rng):
        grid = np.linspace(-5, 5, 401)
        for _ in range(20):
            f = random_nonneg_grid_function(rng)
            assert compact_sup_seminorm(f, spec(-5, 5, 401)) <= f.sup_bound + 1e-12
            assert f.check_bound(grid)

    def test_triangle_and_homogeneity(self, rng):
        p = spec(-3, 3, 301)
        for _ in range(20):
            f = random_nonneg_grid_function(rng)
            g = random_nonneg_grid_function(rng)
            assert compact_sup_seminorm(f + g, p) <= \
                compact_sup_seminorm(f, p) + compact_sup_seminorm(g, p) + 1e-12
            c = float(rng.uniform(-3, 3))
            assert compact_sup_seminorm(c * f, p) == pytest.approx(
                abs(c) * compact_sup_seminorm(f, p), rel=1e-15, abs=1e-15)


class TestMixedSeminorm:
    def test_empty_list(self):
        f = constant(5.0)
        assert mixed_seminorm(f, MixedSeminormSpec(())) == 0.0

    def test_singleton(self):
        f = from_callable(lambda x: np.cos(x), sup_bound=1.0)
        p = spec(0, 2)
        m = MixedSeminormSpec(((1.0, p),))
        assert mixed_seminorm(f, m) == compact_sup_seminorm(f, p)

    def test_two_windows(self):
        f = constant(1.0)
        m = MixedSeminormSpec(((0.5, spec(0, 1)), (0.25, spec(0, 2))))
        assert mixed_seminorm(f, m) == 0.5

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            MixedSeminormSpec(((-0.5, spec(0, 1)),))


class TestLattice:
    def test_sup_idempotent(self):
        f = from_callable(lambda x: np.sin(x), sup_bound=1.0)
        grid = np.linspace(-5, 5, 101)
        assert np.array_equal(lattice_sup(f, f)(grid), f(grid))

    def test_pos_part(self):
        f = from_callable(lambda x: np.asarray(x, float), sup_bound=2.0)
        assert pos_part(f)(-1.0) == 0.0
        assert pos_part(f)(1.0) == 1.0

    def test_abs_of_sine(self):
        f = from_callable(lambda x: np.sin(x), sup_bound=1.0)
        assert abs_val(f)(3 * np.pi / 2) == pytest.approx(1.0)

    def test_inf_neg_relations(self, rng):
        grid = np.linspace(-4, 4, 201)
        for _ in range(5):
            f = random_nonneg_grid_function(rng)
            g = random_nonneg_grid_function(rng)
            fs, gs = f(grid), g(grid)
            assert np.array_equal(lattice_inf(f, g)(grid), np.minimum(fs, gs))
            assert np.array_equal((pos_part(f) + neg_part(f))(grid), fs)

    def test_sup_bound_propagation(self, rng):
        f = random_nonneg_grid_function(rng)
        g = random_nonneg_grid_function(rng)
        assert lattice_sup(f, g).sup_bound <= max(f.sup_bound, g.sup_bound)
        assert abs_val(f).sup_bound == f.sup_bound


class TestGridFunctions:
    def test_linear_between_nodes_constant_beyond(self):
        f = from_grid([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
        assert f(0.5) == 1.0
        assert f(1.5) == 1.0
        assert f(-10.0) == 0.0
        assert f(10.0) == 0.0

    def test_shift_is_exact_node_shift(self):
        f = from_grid([0.0, 1.0], [1.0, 3.0])
        g = f.shift(0.25)
        assert g(0.25) == f(0.5)

    def test_bad_nodes_rejected(self):
        with pytest.raises(ValueError):
            from_grid([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])


class TestShiftComposition:
    def test_bitwise_exact_composition(self):
        f = from_callable(lambda x: np.exp(np.sin(x)), sup_bound=np.e)
        grid = np.linspace(-3, 3, 501)
        s, t = 0.3, 0.7
        once = f.shift(t).shift(s)
        joint = f.shift(s + t)
        assert np.array_equal(once(grid), joint(grid))

    def test_breakpoints_move_with_shift(self):
        f = from_callable(lambda x: np.abs(x), sup_bound=5.0, breakpoints=(0.0,))
        assert f.shift(1.5).effective_breakpoints == (-1.5,)


class TestBiAM:
    def test_constants(self):
        chk = check_bi_am(constant(1.0), constant(2.0), spec(-1, 1))
        assert isinstance(chk, BiAMCheck)
        assert chk.passed
        assert chk.norm_max == chk.norm_of_sup == 2.0

    def test_ramp_pair(self):
        # dense-grid oracle: both sides equal max(ramp, reversed ramp) peak
        f = from_grid([0.0, 1.0], [0.0, 1.0])
        g = from_grid([0.0, 1.0], [1.0, 0.0])
        p = spec(0, 1, 501)
        dense = p.grid()
        oracle_lhs = max(np.max(f(dense)), np.max(g(dense)))
        oracle_rhs = np.max(np.maximum(f(dense), g(dense)))
        assert oracle_lhs == oracle_rhs
        chk = check_bi_am(f, g, p)
        assert chk.passed
        assert chk.seminorm_max == oracle_lhs

    def test_negative_input_rejected(self):
        f = from_callable(lambda x: np.sin(x), sup_bound=1.0)
        with pytest.raises(PreconditionError):
            check_bi_am(f, constant(1.0), spec(-4, 4))

    def test_seeded_random_pairs_exact(self, rng):
        p = spec(-3, 3, 301)
        for _ in range(100):
            f = random_nonneg_grid_function(rng)
            g = random_nonneg_grid_function(rng)
            chk = check_bi_am(f, g, p)
            assert chk.passed
            assert chk.seminorm_max == chk.seminorm_of_sup
            assert chk.norm_max == chk.norm_of_sup


class TestCompatibility:
    def test_zero_dominated(self):
        assert check_compatibility(constant(0.0), constant(3.0), spec(-1, 1))

    def test_half_scaling(self):
        f = from_callable(lambda x: np.cos(x), sup_bound=1.0)
        assert check_compatibility(0.5 * f, f, spec(-2, 2))

    def test_random_dominated_pairs(self, rng):
        p = spec(-4, 4, 401)
        for _ in range(100):
            g = random_nonneg_grid_function(rng)
            shrink = rng.uniform(0.0, 1.0, g.nodes.size)
            f = from_grid(g.nodes, g.values * shrink)
            assert check_compatibility(f, g, p)

    def test_violation_raises(self):
        with pytest.raises(PreconditionError):
            check_compatibility(constant(2.0), constant(1.0), spec(-1, 1))
