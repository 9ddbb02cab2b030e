import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from focktoeplitz import field as fld
from focktoeplitz.field import FREQUENCY, SPACE, GridMismatchError, ScalarField, make_grid
from focktoeplitz.symbols import builtin_family, gaussian, sample_symbol


def gauss_field(grid, c=1.0):
    x, y = grid.coordinates()
    return ScalarField(grid, np.exp(-c * (x * x + y * y)))


class TestGrid:
    def test_default_spacings(self):
        g = make_grid(16, 256)
        assert g.spacing == 0.0625
        assert g.frequency_spacing == 0.0625

    def test_unit_spacing(self):
        assert make_grid(8, 8).spacing == 1.0

    @pytest.mark.parametrize("extent, points", [(16, 100), (16, 4), (0, 64), (-1, 64)])
    def test_rejects_bad_shapes(self, extent, points):
        with pytest.raises(ValueError):
            make_grid(extent, points)

    def test_axis_starts_at_left_edge(self, grid):
        ax = grid.axis()
        assert ax[0] == -8.0 and ax[128] == 0.0 and len(ax) == 256

    def test_frequency_axis_contains_zero(self, grid):
        f = grid.frequency_axis()
        assert f[128] == 0.0 and f[0] == -8.0


class TestScalarField:
    def test_samples_are_read_only(self, small_grid):
        f = fld.constant(small_grid)
        with pytest.raises(ValueError):
            f.samples[0, 0] = 2

    def test_rejects_non_finite(self, small_grid):
        bad = np.ones((64, 64))
        bad[3, 3] = np.nan
        with pytest.raises(ValueError):
            ScalarField(small_grid, bad)

    def test_rejects_wrong_shape(self, small_grid):
        with pytest.raises(ValueError):
            ScalarField(small_grid, np.ones((32, 32)))

    def test_mixing_grids_fails(self, grid, small_grid):
        with pytest.raises(GridMismatchError):
            fld.constant(grid) + fld.constant(small_grid)

    def test_mixing_domains_fails(self, small_grid):
        with pytest.raises(GridMismatchError):
            fld.constant(small_grid) + fld.constant(small_grid, domain=FREQUENCY)

    def test_arithmetic(self, small_grid):
        f = fld.constant(small_grid, 2.0)
        assert np.all((3 * f - 1).samples == 5)
        assert np.all((f / 4).samples == 0.5)


class TestFourier:
    def test_round_trip(self, grid, rng):
        f = ScalarField(grid, rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256)))
        back = fld.fourier(fld.fourier(f, "forward"), "inverse")
        assert np.abs(back.samples - f.samples).max() <= 1e-12 * f.sup()

    def test_heat_kernel_transform(self, grid):
        spec = fld.fourier(fld.heat_kernel(grid, 1.0))
        u, v = grid.frequencies()
        near = u * u + v * v <= 16
        oracle = np.exp(-math.pi ** 2 * (u * u + v * v))
        assert spec.domain == FREQUENCY
        assert np.abs(spec.samples - oracle)[near].max() <= 1e-8

    def test_heat_kernel_mass(self, grid):
        assert abs(fld.fourier(fld.heat_kernel(grid, 0.5)).value_at((0, 0)) - 1) <= 1e-10

    def test_direction_misuse(self, small_grid):
        f = fld.constant(small_grid)
        with pytest.raises(ValueError):
            fld.fourier(f, "inverse")
        with pytest.raises(ValueError):
            fld.fourier(fld.fourier(f), "forward")

    def test_parseval(self, grid):
        f = gauss_field(grid) * np.exp(2j * math.pi * grid.coordinates()[0])
        F = fld.fourier(f)
        lhs = grid.spacing ** 2 * np.sum(np.abs(f.samples) ** 2)
        rhs = grid.frequency_spacing ** 2 * np.sum(np.abs(F.samples) ** 2)
        assert abs(lhs - rhs) <= 1e-10 * lhs

    def test_modulation_shifts_spectrum(self, grid):
        x, _ = grid.coordinates()
        F = fld.fourier(gauss_field(grid) * np.exp(2j * math.pi * x))
        i, j = np.unravel_index(np.argmax(np.abs(F.samples)), F.samples.shape)
        u, v = grid.frequencies()
        assert (u[i, j], v[i, j]) == (1.0, 0.0)


class TestConvolution:
    def test_delta_is_identity(self, grid, rng):
        f = ScalarField(grid, rng.standard_normal((256, 256)))
        d = np.zeros((256, 256))
        d[128, 128] = 1 / grid.spacing ** 2
        assert np.abs(fld.convolve(f, ScalarField(grid, d)).samples - f.samples).max() <= 1e-12

    def test_gaussian_semigroup(self, grid):
        out = fld.convolve(fld.heat_kernel(grid, 0.5), fld.heat_kernel(grid, 0.5))
        assert np.abs(out.samples - fld.heat_kernel(grid, 1.0).samples).max() <= 1e-8

    def test_unit_mass(self, grid):
        out = fld.convolve(fld.constant(grid), fld.heat_kernel(grid, 0.7))
        assert np.abs(out.samples - 1).max() <= 1e-8

    def test_commutes(self, small_grid, rng):
        f = ScalarField(small_grid, rng.standard_normal((64, 64)))
        h = ScalarField(small_grid, rng.standard_normal((64, 64)))
        assert np.allclose(fld.convolve(f, h).samples, fld.convolve(h, f).samples, atol=1e-12)


class TestHeat:
    def test_constants_fixed(self, grid):
        assert np.abs(fld.heat_transform(fld.constant(grid, 3.0), 2.0).samples - 3).max() <= 1e-10

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_gaussian_closed_form(self, grid, t):
        x, y = grid.coordinates()
        r2 = x * x + y * y
        oracle = np.exp(-r2 / (1 + t)) / (1 + t)
        assert np.abs(fld.heat_transform(gauss_field(grid), t).samples - oracle).max() <= 1e-6

    def test_origin_value_by_direct_quadrature(self, grid):
        # independent 2D midpoint sum of e^{-|w|^2} gamma_1(w)
        h = 0.01
        ax = np.arange(-8 + h / 2, 8, h)
        X, Y = np.meshgrid(ax, ax)
        direct = h * h * np.sum(np.exp(-2 * (X * X + Y * Y)) / math.pi)
        assert abs(fld.heat_transform(gauss_field(grid), 1.0).value_at(0) - direct) <= 1e-6
        assert abs(direct - 0.5) <= 1e-6

    @pytest.mark.parametrize("spec", builtin_family(), ids=lambda s: s.describe())
    def test_semigroup(self, grid, spec):
        g = sample_symbol(spec, grid)
        two = fld.heat_transform(fld.heat_transform(g, 0.25), 0.25)
        one = fld.heat_transform(g, 0.5)
        assert np.abs(two.samples - one.samples).max() <= 1e-9 * g.sup()

    def test_matches_convolution(self, grid):
        g = gauss_field(grid, 0.5)
        a = fld.heat_transform(g, 0.5)
        b = fld.convolve(g, fld.heat_kernel(grid, 0.5))
        assert np.abs(a.samples - b.samples).max() <= 1e-8

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_rejects_nonpositive_t(self, small_grid, t):
        with pytest.raises(ValueError):
            fld.heat_transform(fld.constant(small_grid), t)


class TestDerivatives:
    def test_zero_order_is_identity(self, grid):
        g = gauss_field(grid)
        assert np.array_equal(fld.spectral_derivative(g, 0, 0).samples, g.samples)

    def test_sine(self, grid):
        x, _ = grid.coordinates()
        f = ScalarField(grid, np.sin(2 * math.pi * x))
        d = fld.spectral_derivative(f, 1, 0)
        assert np.abs(d.samples - 2 * math.pi * np.cos(2 * math.pi * x)).max() <= 1e-8

    def test_second_derivative_of_heat_kernel(self, grid):
        k = fld.heat_kernel(grid, 1.0)
        value = fld.spectral_derivative(k, 2, 0).value_at(0).real

        def gamma(u):
            return math.exp(-u * u) / math.pi

        step = 1e-4
        fd = (gamma(step) - 2 * gamma(0) + gamma(-step)) / step ** 2
        assert abs(value - (-2 / math.pi)) <= 1e-6
        assert abs(value - fd) <= 1e-5 * abs(fd)

    def test_mixed_against_finite_differences(self, grid):
        g = gauss_field(grid)
        p = (0.5, -0.25)
        d = fld.spectral_derivative(g, 1, 1).value_at(p).real

        def f(a, b):
            return math.exp(-(a * a + b * b))

        h = 1e-4
        fd = (f(p[0] + h, p[1] + h) - f(p[0] + h, p[1] - h) - f(p[0] - h, p[1] + h) + f(p[0] - h, p[1] - h)) / (
            4 * h * h)
        assert abs(d - fd) <= 1e-5 * abs(fd)

    def test_order_cap(self, small_grid):
        with pytest.raises(ValueError):
            fld.spectral_derivative(fld.constant(small_grid), 2, 2)

    def test_multi_indices(self):
        idx = fld.multi_indices()
        assert len(idx) == 10 and idx[0] == (0, 0) and all(a + b <= 3 for a, b in idx)


class TestTranslateModulate:
    def test_identity(self, grid):
        g = gauss_field(grid)
        assert np.array_equal(fld.translate_modulate(g).samples, g.samples)

    def test_peak_moves(self, grid):
        out = fld.translate_modulate(fld.heat_kernel(grid, 1.0), (1, 0))
        x, y = grid.coordinates()
        i, j = np.unravel_index(np.argmax(np.abs(out.samples)), out.samples.shape)
        assert (x[i, j], y[i, j]) == (1.0, 0.0)

    def test_modulation(self, grid):
        x, _ = grid.coordinates()
        out = fld.translate_modulate(fld.constant(grid), (0, 0), (1, 0))
        assert np.abs(out.samples - np.exp(2j * math.pi * x)).max() <= 1e-12

    def test_off_lattice_rejected(self, grid):
        with pytest.raises(ValueError):
            fld.translate_modulate(fld.constant(grid), (0.01, 0))


class TestNorms:
    def test_constant_l1(self, grid):
        assert abs(fld.field_norm(fld.constant(grid), "Lp", 1) - 256) <= 1e-10

    def test_gaussian_l1(self, grid):
        assert abs(fld.field_norm(gauss_field(grid), "Lp", 1) - math.pi) <= 1e-6

    def test_gaussian_l2(self, grid):
        assert abs(fld.field_norm(gauss_field(grid), 2) - math.sqrt(math.pi / 2)) <= 1e-6

    def test_sup(self, grid):
        assert fld.field_norm(gauss_field(grid)) == 1.0

    def test_rejects_small_p(self, small_grid):
        with pytest.raises(ValueError):
            fld.field_norm(fld.constant(small_grid), "Lp", 0.5)

    def test_boundary_fraction(self, grid):
        assert fld.boundary_fraction(gauss_field(grid)) < 1e-12
        assert fld.boundary_fraction(fld.constant(grid)) > 0.2


class TestInterpolate:
    def test_exact_on_nodes(self, grid):
        g = gauss_field(grid)
        ax = grid.axis()[100:104]
        vals = fld.interpolate(g, ax, ax)
        assert np.allclose(vals, g.samples[100:104, 100:104], atol=1e-13)

    def test_between_nodes(self, grid):
        g = gauss_field(grid)
        xs = np.array([0.03, 0.51, -1.2345])
        vals = fld.interpolate(g, xs, xs)
        oracle = np.exp(-(xs[:, None] ** 2 + xs[None, :] ** 2))
        assert np.abs(vals - oracle).max() <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_heat_semigroup_property(s, t):
    grid = make_grid(16, 128)
    g = gauss_field(grid, 1.0)
    lhs = fld.heat_transform(fld.heat_transform(g, s), t)
    rhs = fld.heat_transform(g, s + t)
    assert np.abs(lhs.samples - rhs.samples).max() <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    grid = make_grid(8, 32)
    r = np.random.default_rng(seed)
    f = ScalarField(grid, r.standard_normal((32, 32)) * 10.0 ** r.uniform(-5, 5))
    back = fld.fourier(fld.fourier(f), "inverse")
    assert np.abs(back.samples - f.samples).max() <= 1e-12 * f.sup()
    assert back.domain == SPACE


def test_symbol_sample_matches_builtin(grid):
    assert np.array_equal(sample_symbol(gaussian(1.0), grid).samples, gauss_field(grid).samples)
