"""Sampled symbols on a periodic square grid and their FFT-based transforms.

The complex plane is identified with R^2 through ``z = x + iy``.  A field
stores an ``M x M`` array whose axis 0 runs over ``Re z`` and axis 1 over
``Im z``; sample ``(i, j)`` sits at ``(-L/2 + i*h, -L/2 + j*h)``.  Frequency
fields use the same layout on the lattice ``(-M/2 + i)/L``.

Transforms follow the convention

    F f(xi) = \\int f(w) exp(-2 pi i xi . w) dv(w)

so that the heat kernel ``gamma_t(z) = exp(-|z|^2/t)/(pi t)`` has transform
``a_t(xi) = exp(-pi^2 t |xi|^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SPACE = "space"
FREQUENCY = "frequency"

MAX_DERIVATIVE_ORDER = 3


class GridMismatchError(ValueError):
    """Two fields live on different grids or in different domains."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the square ``[-L/2, L/2)^2``."""

    extent: float
    points: int

    def __post_init__(self):
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise ValueError(f"extent must be positive and finite, got {self.extent}")
        m = self.points
        if int(m) != m or m < 8 or (int(m) & (int(m) - 1)) != 0:
            raise ValueError(f"points must be a power of two >= 8, got {m}")
        object.__setattr__(self, "points", int(m))

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    @property
    def frequency_spacing(self) -> float:
        return 1.0 / self.extent

    @property
    def frequency_extent(self) -> float:
        """Side length of the frequency lattice, ``M / L``."""
        return self.points / self.extent

    def axis(self) -> np.ndarray:
        return -0.5 * self.extent + self.spacing * np.arange(self.points)

    def frequency_axis(self) -> np.ndarray:
        return (np.arange(self.points) - self.points // 2) * self.frequency_spacing

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Real and imaginary coordinates of every node, ``indexing='ij'``."""
        a = self.axis()
        return np.meshgrid(a, a, indexing="ij")

    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.frequency_axis()
        return np.meshgrid(a, a, indexing="ij")

    def nodes(self) -> np.ndarray:
        """Complex coordinates ``x + iy`` of every node."""
        x, y = self.coordinates()
        return x + 1j * y

    def lattice_index(self, shift, *, tol: float = 1e-9) -> tuple[int, int]:
        """Integer node offsets for a shift that lies on the sample lattice."""
        s = np.asarray(_as_pair(shift), dtype=float) / self.spacing
        k = np.rint(s)
        if np.max(np.abs(s - k)) > tol:
            raise ValueError(f"shift {tuple(_as_pair(shift))} is not a multiple of the spacing {self.spacing}")
        return int(k[0]), int(k[1])


def make_grid(extent: float, points: int) -> Grid:
    return Grid(float(extent), points)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples of a function on a :class:`Grid`.

    Arithmetic between fields is only defined when both grid and domain tag
    agree; scalars broadcast.
    """

    grid: Grid
    samples: np.ndarray
    domain: str = SPACE

    def __post_init__(self):
        if self.domain not in (SPACE, FREQUENCY):
            raise ValueError(f"unknown domain {self.domain!r}")
        arr = np.asarray(self.samples, dtype=complex)
        m = self.grid.points
        if arr.shape != (m, m):
            raise ValueError(f"samples must have shape {(m, m)}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def _check(self, other: "ScalarField"):
        if self.grid != other.grid or self.domain != other.domain:
            raise GridMismatchError(
                f"cannot combine {self.domain} field on {self.grid} with {other.domain} field on {other.grid}")

    def _binary(self, other, op):
        if isinstance(other, ScalarField):
            self._check(other)
            other = other.samples
        return ScalarField(self.grid, op(self.samples, other), self.domain)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return ScalarField(self.grid, -self.samples, self.domain)

    def abs(self) -> "ScalarField":
        return ScalarField(self.grid, np.abs(self.samples), self.domain)

    def conj(self) -> "ScalarField":
        return ScalarField(self.grid, np.conj(self.samples), self.domain)

    def with_samples(self, samples) -> "ScalarField":
        return ScalarField(self.grid, samples, self.domain)

    def value_at(self, point) -> complex:
        """Sample at the node nearest to ``point`` (a complex number or pair)."""
        p = _as_pair(point)
        if self.domain == SPACE:
            step, origin = self.grid.spacing, -0.5 * self.grid.extent
        else:
            step, origin = self.grid.frequency_spacing, -(self.grid.points // 2) * self.grid.frequency_spacing
        i = int(round((p[0] - origin) / step)) % self.grid.points
        j = int(round((p[1] - origin) / step)) % self.grid.points
        return complex(self.samples[i, j])

    def sup(self) -> float:
        return float(np.max(np.abs(self.samples)))


def _as_pair(v) -> tuple[float, float]:
    if isinstance(v, (complex, np.complexfloating)):
        return float(v.real), float(v.imag)
    if np.isscalar(v):
        return float(v), 0.0
    a, b = v
    return float(a), float(b)


def constant(grid: Grid, value: complex = 1.0, domain: str = SPACE) -> ScalarField:
    return ScalarField(grid, np.full((grid.points, grid.points), value, dtype=complex), domain)


def from_function(grid: Grid, fn) -> ScalarField:
    """Sample ``fn(z)`` (vectorized over complex ``z``) at every space node."""
    return ScalarField(grid, np.broadcast_to(fn(grid.nodes()), (grid.points,) * 2))


def heat_kernel(grid: Grid, t: float) -> ScalarField:
    """Sampled ``gamma_t(z) = exp(-|z|^2/t) / (pi t)``."""
    _check_time(t)
    x, y = grid.coordinates()
    return ScalarField(grid, np.exp(-(x * x + y * y) / t) / (math.pi * t))


def gaussian_multiplier(grid: Grid, t: float) -> np.ndarray:
    """``a_t(xi) = exp(-pi^2 t |xi|^2)`` on the frequency lattice."""
    u, v = grid.frequencies()
    return np.exp(-(math.pi ** 2) * t * (u * u + v * v))


# ---------------------------------------------------------------------------
# transforms

def _forward(arr: np.ndarray, h: float) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(arr))) * (h * h)


def _inverse(arr: np.ndarray, h: float) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(arr))) / (h * h)


def fourier(f: ScalarField, direction: str = "forward") -> ScalarField:
    """Discrete approximation of the continuum Fourier transform.

    ``forward`` maps a space field to a frequency field and is scaled by
    ``h^2`` so values approximate the integral; ``inverse`` is its exact
    discrete inverse.
    """
    h = f.grid.spacing
    if direction == "forward":
        if f.domain != SPACE:
            raise ValueError("forward transform expects a space-domain field")
        return ScalarField(f.grid, _forward(f.samples, h), FREQUENCY)
    if direction == "inverse":
        if f.domain != FREQUENCY:
            raise ValueError("inverse transform expects a frequency-domain field")
        return ScalarField(f.grid, _inverse(f.samples, h), SPACE)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def reflect(f: ScalarField) -> ScalarField:
    """``u -> f(-u)`` on the periodic lattice (either domain)."""
    a = np.roll(f.samples[::-1, ::-1], 1, axis=(0, 1))
    return f.with_samples(a)


def spectrum_of_transform(f: ScalarField) -> ScalarField:
    """Frequency field of ``F^{-1} f`` for a space field ``f``.

    ``F^{-1} f(xi) = F f(-xi)``; the decomposition pieces are specified in
    terms of this inverse spectrum.
    """
    return reflect(fourier(f, "forward"))


def _require_space(*fields: ScalarField):
    for f in fields:
        if f.domain != SPACE:
            raise ValueError("operation expects space-domain fields")


def _check_time(t: float):
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"heat parameter must be positive, got {t}")


def convolve(f: ScalarField, h: ScalarField) -> ScalarField:
    """Periodic convolution approximating ``\\int f(z-w) h(w) dv(w)``."""
    _require_space(f, h)
    f._check(h)
    step = f.grid.spacing
    prod = _forward(f.samples, step) * _forward(h.samples, step)
    return ScalarField(f.grid, _inverse(prod, step))


def apply_multiplier(f: ScalarField, multiplier: np.ndarray) -> ScalarField:
    """Multiply the spectrum of a space field and transform back."""
    _require_space(f)
    step = f.grid.spacing
    return ScalarField(f.grid, _inverse(_forward(f.samples, step) * multiplier, step))


def heat_transform(f: ScalarField, t: float) -> ScalarField:
    """Heat transform ``H_t f = f * gamma_t`` computed spectrally."""
    _check_time(t)
    _require_space(f)
    return apply_multiplier(f, gaussian_multiplier(f.grid, t))


def derivative_multiplier(grid: Grid, a: int, b: int) -> np.ndarray:
    if a < 0 or b < 0 or int(a) != a or int(b) != b:
        raise ValueError("derivative orders must be nonnegative integers")
    if a + b > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order a+b={a + b} exceeds {MAX_DERIVATIVE_ORDER}")
    u, v = grid.frequencies()
    return (2j * math.pi * u) ** a * (2j * math.pi * v) ** b


def spectral_derivative(f: ScalarField, a: int, b: int) -> ScalarField:
    """``d^a/dRe^a d^b/dIm^b f`` by multiplication with ``(2 pi i xi)``."""
    mult = derivative_multiplier(f.grid, a, b)
    _require_space(f)
    if a == 0 and b == 0:
        return f
    return apply_multiplier(f, mult)


def multi_indices(order: int = MAX_DERIVATIVE_ORDER) -> list[tuple[int, int]]:
    """All ``(a, b)`` with ``a + b <= order`` in a fixed order."""
    return [(a, s - a) for s in range(order + 1) for a in range(s, -1, -1)]


def heat_derivatives(f: ScalarField, t: float,
                     indices: Sequence[tuple[int, int]] | None = None) -> dict[tuple[int, int], ScalarField]:
    """Derivatives ``d^a d^b H_t f`` for every multi-index, sharing one FFT."""
    _check_time(t)
    _require_space(f)
    grid = f.grid
    step = grid.spacing
    spec = _forward(f.samples, step) * gaussian_multiplier(grid, t)
    out = {}
    for a, b in indices or multi_indices():
        out[(a, b)] = ScalarField(grid, _inverse(spec * derivative_multiplier(grid, a, b), step))
    return out


def translate_modulate(f: ScalarField, y=(0.0, 0.0), x=(0.0, 0.0)) -> ScalarField:
    """Return ``b_x * tau_y f``: ``w -> exp(2 pi i w.x) f(w - y)``.

    ``y`` must be a lattice vector; the shift is an exact index roll.
    """
    _require_space(f)
    i, j = f.grid.lattice_index(y)
    out = np.roll(f.samples, (i, j), axis=(0, 1))
    x1, x2 = _as_pair(x)
    if x1 or x2:
        u, v = f.grid.coordinates()
        out = out * np.exp(2j * math.pi * (u * x1 + v * x2))
    return ScalarField(f.grid, out)


def field_norm(f: ScalarField, kind="sup", p: float | None = None) -> float:
    """``sup`` norm or ``L^p`` norm ``(h^2 sum |f|^p)^(1/p)`` of a space field.

    ``kind`` may be ``"sup"``, ``"Lp"`` (with ``p``) or a number meaning ``p``.
    """
    _require_space(f)
    if kind == "sup":
        return f.sup()
    if kind != "Lp":
        p, kind = float(kind), "Lp"
    if p is None or not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    h = f.grid.spacing
    mag = np.abs(f.samples)
    scale = mag.max()
    if scale == 0:
        return 0.0
    return float(scale * (h * h * np.sum((mag / scale) ** p)) ** (1.0 / p))


def boundary_fraction(f: ScalarField, p: float = 1.0, width: float = 1.0) -> float:
    """Share of ``\\int |f|^p`` carried by the band ``|z|_inf >= L/2 - width``.

    A non-negligible share means the sampled integral is an artifact of the
    finite box rather than an approximation of a convergent integral.
    """
    x, y = f.grid.coordinates()
    band = np.maximum(np.abs(x), np.abs(y)) >= 0.5 * f.grid.extent - width
    mag = np.abs(f.samples) ** p
    total = mag.sum()
    if total == 0:
        return 0.0
    return float(mag[band].sum() / total)


def interpolate(f: ScalarField, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of a space field on the tensor nodes ``xs x ys``.

    Exact for band-limited periodic fields; evaluation points outside the box
    see the periodic extension.
    """
    _require_space(f)
    grid = f.grid
    m = grid.points
    k = np.fft.fftfreq(m, d=grid.spacing)
    coeff = np.fft.fft2(f.samples) / (m * m)
    if m % 2 == 0:
        # split the Nyquist column symmetrically so real fields stay real
        nyq = m // 2
        coeff = np.insert(coeff, nyq + 1, 0, axis=0)
        coeff = np.insert(coeff, nyq + 1, 0, axis=1)
        coeff[nyq, :] *= 0.5
        coeff[nyq + 1, :] = coeff[nyq, :]
        coeff[:, nyq] *= 0.5
        coeff[:, nyq + 1] = coeff[:, nyq]
        k = np.insert(k, nyq + 1, -k[nyq])
    x0 = grid.axis()[0]
    ex = np.exp(2j * math.pi * np.outer(np.asarray(xs, dtype=float) - x0, k))
    ey = np.exp(2j * math.pi * np.outer(np.asarray(ys, dtype=float) - x0, k))
    return ex @ coeff @ ey.T
