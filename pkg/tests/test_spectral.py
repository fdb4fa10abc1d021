import math

import numpy as np
import pytest

from memheat.core import Grid, GridFunction, ValidationError, lp_norm, random_band_limited
from memheat.spectral import (
    SymbolTable,
    apply_semigroup,
    decay_slope_probe,
    gaussian_kernel_reference,
    kernel_slice,
    spectral_tail_fraction,
)


class TestSymbolTable:
    def test_nonnegative_zero_only_at_origin(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=64)
        sym = SymbolTable(grid, 2).values
        assert np.all(sym >= 0.0)
        assert sym[0] == 0.0
        assert np.count_nonzero(sym == 0.0) == 1

    def test_reflection_symmetry(self):
        grid = Grid(dim=2, half_width=3.0, points_per_axis=16)
        sym = SymbolTable(grid, 1).values
        for axis in (0, 1):
            flipped = np.flip(sym, axis=axis)
            # lattice reflection k -> -k maps index j -> (-j) mod N
            rolled = np.roll(flipped, 1, axis=axis)
            assert np.allclose(sym, rolled, atol=0.0)


class TestApplySemigroup:
    def test_plane_wave_eigenvalue(self):
        grid = Grid(dim=1, half_width=math.pi, points_per_axis=128)
        f = GridFunction(grid, np.cos(grid.axis()))
        out = apply_semigroup(f, 2, 1.0)
        assert np.allclose(out.values, math.exp(-1.0) * f.values, atol=1e-14)

    def test_identity_at_zero_time(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=64)
        f = random_band_limited(grid, 7, 1.0)
        out = apply_semigroup(f, 3, 0.0)
        assert np.allclose(out.values, f.values, atol=1e-14)

    def test_constants_fixed(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=64)
        f = GridFunction.constant(grid, 2.5)
        for t in (0.1, 1.0, 10.0):
            out = apply_semigroup(f, 2, t)
            assert np.allclose(out.values, 2.5, atol=1e-13)

    def test_negative_time_rejected(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=64)
        with pytest.raises(ValidationError):
            apply_semigroup(GridFunction.zeros(grid), 1, -0.1)

    def test_semigroup_law(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=256)
        f = random_band_limited(grid, 3, 1.0)
        for m in (1, 2):
            ab = apply_semigroup(apply_semigroup(f, m, 0.4), m, 0.6)
            once = apply_semigroup(f, m, 1.0)
            assert np.max(np.abs(ab.values - once.values)) <= 1e-12

    def test_l2_contraction_all_m(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=256)
        for seed in range(5):
            f = random_band_limited(grid, seed, 1.0)
            before = lp_norm(f, 2.0)
            for m in (1, 2, 3):
                after = lp_norm(apply_semigroup(f, m, 0.5), 2.0)
                assert after <= before + 1e-13

    def test_sup_contraction_fails_for_m2(self):
        # extremal datum: the sign pattern of the kernel pushes the center
        # value to the kernel's L1 norm, which exceeds 1 for m > 1
        grid = Grid(dim=1, half_width=20.0, points_per_axis=1024)
        kern = kernel_slice(grid, 2, 1.0)
        f = GridFunction(grid, np.sign(kern.values[::-1]))
        out = apply_semigroup(f, 2, 1.0)
        assert out.sup_norm() > 1.0 + 1e-3


class TestKernelSlice:
    def test_gaussian_closed_form(self):
        grid = Grid(dim=1, half_width=20.0, points_per_axis=2048)
        kern = kernel_slice(grid, 1, 1.0)
        center = grid.points_per_axis // 2
        assert kern.values[center] == pytest.approx((4.0 * math.pi) ** -0.5, abs=1e-9)
        assert kern.values[center] == pytest.approx(0.282095, abs=1e-6)
        ref = gaussian_kernel_reference(grid, 1.0)
        assert np.max(np.abs(kern.values - ref)) <= 1e-8

    @pytest.mark.parametrize("m", [1, 2, 3])
    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_unit_mass(self, m, t):
        grid = Grid(dim=1, half_width=20.0, points_per_axis=1024)
        assert kernel_slice(grid, m, t).integral() == pytest.approx(1.0, abs=1e-12)

    def test_sign_change_for_m2(self):
        grid = Grid(dim=1, half_width=20.0, points_per_axis=2048)
        kern = kernel_slice(grid, 2, 1.0)
        assert float(np.min(kern.values)) < -1e-4 * float(np.max(kern.values))

    def test_gaussian_positive_no_sign_change(self):
        grid = Grid(dim=1, half_width=20.0, points_per_axis=2048)
        kern = kernel_slice(grid, 1, 1.0)
        assert float(np.min(kern.values)) > -1e-12

    def test_nonpositive_time_rejected(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=64)
        with pytest.raises(ValidationError):
            kernel_slice(grid, 1, 0.0)


class TestDecaySlopeProbe:
    TVALS = np.geomspace(1.0, 20.0, 9)

    def test_m1_sup_slope(self):
        slope = decay_slope_probe(1, 1, 1.0, math.inf, self.TVALS)
        assert slope == pytest.approx(-0.5, rel=0.02)

    def test_m2_sup_slope(self):
        slope = decay_slope_probe(2, 1, 1.0, math.inf, self.TVALS)
        assert slope == pytest.approx(-0.25, rel=0.02)

    def test_equal_exponents_flat(self):
        slope = decay_slope_probe(1, 1, 2.0, 2.0, self.TVALS)
        assert abs(slope) <= 0.01

    def test_l1_l2_intermediate(self):
        slope = decay_slope_probe(1, 1, 1.0, 2.0, self.TVALS)
        assert slope == pytest.approx(-0.25, rel=0.05)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValidationError):
            decay_slope_probe(1, 1, 1.0, math.inf, [1.0, 2.0, 3.0])

    def test_bad_exponent_order_rejected(self):
        with pytest.raises(ValidationError):
            decay_slope_probe(1, 1, 2.0, 1.0, self.TVALS)


class TestSpectralTail:
    def test_smooth_field_clean(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=256)
        f = random_band_limited(grid, 1, 1.0)
        assert spectral_tail_fraction(f) < 1e-10

    def test_rough_field_flagged(self):
        grid = Grid(dim=1, half_width=5.0, points_per_axis=256)
        rng = np.random.default_rng(0)
        f = GridFunction(grid, rng.standard_normal(grid.shape))
        assert spectral_tail_fraction(f) > 1e-3
