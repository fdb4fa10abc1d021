import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memheat.core import (
    Grid,
    GridFunction,
    ValidationError,
    derived_exponents,
    gaussian_bump,
    lp_norm,
    make_params,
    random_band_limited,
)


class TestMakeParams:
    def test_basic(self):
        p = make_params(1, 1, 0.5, 2.0)
        assert p.alpha == 0.5
        assert p.c_alpha == pytest.approx(math.gamma(0.5))

    def test_boundary_gamma_rejected(self):
        with pytest.raises(ValidationError, match=r"gamma must lie in \(0,1\)"):
            make_params(1, 1, 1.0, 2.0)

    def test_other_valid(self):
        p = make_params(3, 2, 0.25, 1.5)
        assert p.alpha == 0.75

    @pytest.mark.parametrize(
        "kwargs,field",
        [
            (dict(n=0, m=1, gamma=0.5, p=2.0), "n"),
            (dict(n=1, m=0, gamma=0.5, p=2.0), "m"),
            (dict(n=1, m=1, gamma=0.0, p=2.0), "gamma"),
            (dict(n=1, m=1, gamma=-0.1, p=2.0), "gamma"),
            (dict(n=1, m=1, gamma=0.5, p=1.0), "p"),
        ],
    )
    def test_each_field_rejected_independently(self, kwargs, field):
        with pytest.raises(ValidationError, match=field):
            make_params(**kwargs)

    @given(
        gamma=st.floats(0.01, 0.99),
        p=st.floats(1.01, 10.0),
        n=st.integers(1, 4),
        m=st.integers(1, 3),
    )
    @settings(max_examples=50, deadline=None)
    def test_total_on_valid_domain(self, gamma, p, n, m):
        params = make_params(n, m, gamma, p)
        assert 0.0 < params.alpha < 1.0


class TestDerivedExponents:
    def test_alpha1(self):
        assert derived_exponents(make_params(1, 1, 0.5, 2.0)).alpha1 == 1.5
        assert derived_exponents(make_params(1, 1, 0.5, 3.0)).alpha1 == 0.75

    def test_p_star_sentinel(self):
        # positive part (1 - 2 + 1) = 0: diffusive branch degenerates
        exps = derived_exponents(make_params(1, 1, 0.5, 2.0))
        assert math.isinf(exps.p_star_diffusive)
        assert math.isinf(exps.p_star)

    def test_p_star_at_least_memory_branch(self):
        for gamma in (0.2, 0.5, 0.8):
            for n in (1, 2, 3):
                exps = derived_exponents(make_params(n, 1, gamma, 2.0))
                assert exps.p_star >= 1.0 / gamma

    def test_delta_sign_iff_subcritical(self):
        # nonzero positive part: delta > 0 exactly below the diffusive branch
        for p in (1.5, 2.0, 2.5, 3.0, 4.0):
            params = make_params(3, 1, 0.5, p)
            exps = derived_exponents(params)
            assert (exps.delta > 0) == (p < exps.p_star_diffusive)

    def test_alpha1_positive_always(self):
        for p in (1.1, 2.0, 9.0):
            for gamma in (0.1, 0.9):
                assert derived_exponents(make_params(2, 2, gamma, p)).alpha1 > 0


class TestGrid:
    def test_spacing_exact(self):
        g = Grid(dim=1, half_width=10.0, points_per_axis=512)
        assert g.spacing * g.points_per_axis == 2.0 * g.half_width

    def test_power_of_two_enforced(self):
        with pytest.raises(ValidationError):
            Grid(dim=1, half_width=1.0, points_per_axis=100)

    def test_axis_periodic_range(self):
        g = Grid(dim=1, half_width=2.0, points_per_axis=8)
        ax = g.axis()
        assert ax[0] == -2.0
        assert ax[-1] == pytest.approx(2.0 - g.spacing)

    def test_coords_dim2(self):
        g = Grid(dim=2, half_width=1.0, points_per_axis=4)
        xs, ys = g.coords()
        assert xs.shape == (4, 4)
        assert g.cell_volume == pytest.approx(0.25)


class TestNorms:
    def grid(self):
        return Grid(dim=1, half_width=5.0, points_per_axis=256)

    def test_zero_field(self):
        f = GridFunction.zeros(self.grid())
        for r in (1.0, 2.0, math.inf):
            assert lp_norm(f, r) == 0.0

    def test_constant_field(self):
        g = self.grid()
        f = GridFunction.constant(g, -3.0)
        volume = (2.0 * g.half_width) ** g.dim
        for r in (1.0, 2.0, 4.0):
            assert lp_norm(f, r) == pytest.approx(3.0 * volume ** (1.0 / r))
        assert lp_norm(f, math.inf) == 3.0

    def test_gaussian_mass(self):
        # L = 10 std devs: Riemann mass matches the analytic integral
        g = Grid(dim=1, half_width=10.0, points_per_axis=1024)
        f = gaussian_bump(g, 1.0, 1.0)
        assert lp_norm(f, 1.0) == pytest.approx(math.sqrt(2.0 * math.pi), abs=1e-10)

    def test_r_below_one_rejected(self):
        with pytest.raises(ValidationError):
            lp_norm(GridFunction.zeros(self.grid()), 0.5)

    def test_non_finite_rejected(self):
        f = GridFunction.zeros(self.grid())
        f.values[3] = math.nan
        assert not f.is_finite()
        with pytest.raises(ValidationError):
            lp_norm(f, 2.0)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_holder_monotonicity(self, seed):
        # normalized by volume^(1/r), the norm is nondecreasing in r
        g = self.grid()
        f = random_band_limited(g, seed, 1.0)
        volume = (2.0 * g.half_width) ** g.dim
        normalized = [
            lp_norm(f, r) / volume ** (1.0 / r) for r in (1.0, 2.0, 4.0, math.inf)
        ]
        for lo, hi in zip(normalized, normalized[1:]):
            assert hi >= lo - 1e-12


class TestFieldBuilders:
    def test_random_band_limited_deterministic(self):
        g = Grid(dim=1, half_width=5.0, points_per_axis=128)
        a = random_band_limited(g, 42, 0.7)
        b = random_band_limited(g, 42, 0.7)
        assert np.array_equal(a.values, b.values)
        assert a.sup_norm() == pytest.approx(0.7)

    def test_shape_mismatch_rejected(self):
        g = Grid(dim=1, half_width=5.0, points_per_axis=128)
        with pytest.raises(ValidationError):
            GridFunction(g, np.zeros(64))
