"""Lattice partition of unity on the frequency plane and the symbol pieces.

The bump ``phi(xi, eta) = w(xi) w(eta)`` with ``w(s) = smooth_step(2(1 - |s|))``
is 1 on ``[-1/2, 1/2]^2`` and vanishes off ``(-1, 1)^2``.  Its lattice
translates are normalized pointwise,

    psi_x = phi(. - x) / sum_y phi(. - y),

which only involves the nine neighbours of ``x``.

A symbol piece ``g_x`` is defined through its inverse spectrum

    F^{-1}(g_x) = F^{-1}(H_s g) psi_x a_s^{-1},    s = 1 / (2 alpha),

so ``F^{-1}(g_x)`` is supported in the box ``x + (-1, 1]^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .field import FREQUENCY, SPACE, Grid, ScalarField, _forward, _inverse, gaussian_multiplier, reflect

LatticeIndex = tuple[int, int]

_NEIGHBOURS = [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)]


def smooth_step(u):
    """``h(u) / (h(u) + h(1 - u))`` with ``h(u) = exp(-1/u)`` for ``u > 0``.

    Vectorized; 0 for ``u <= 0`` and 1 for ``u >= 1``.
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        hu = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        v = 1.0 - u
        hv = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    out = hu / (hu + hv)
    return out if out.ndim else float(out)


def _profile(s):
    return smooth_step(2.0 * (1.0 - np.abs(s)))


def bump(xi, eta=None):
    """Product bump ``w(xi) w(eta)``; accepts a pair or two arrays."""
    if eta is None:
        xi, eta = xi
    return _profile(xi) * _profile(eta)


def _as_index(x) -> LatticeIndex:
    a, b = x
    if int(a) != a or int(b) != b:
        raise ValueError(f"lattice index must be integral, got {x}")
    return int(a), int(b)


def lattice_points(radius: int) -> list[LatticeIndex]:
    """All ``x`` with ``|x|_inf <= radius``, by increasing ``|x|_inf`` then lexicographically."""
    pts = [(i, j) for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)]
    return sorted(pts, key=lambda p: (max(abs(p[0]), abs(p[1])), p))


def shell(radius: int) -> Iterator[LatticeIndex]:
    """Lattice points with ``|x|_inf == radius``."""
    return (p for p in lattice_points(radius) if max(abs(p[0]), abs(p[1])) == radius)


@dataclass(frozen=True)
class PartitionWindow:
    index: LatticeIndex
    field: ScalarField
    support_box: tuple[tuple[float, float], tuple[float, float]]

    def contains(self, xi, eta) -> np.ndarray:
        """Membership in the half-open box ``(x1-1, x1+1] x (x2-1, x2+1]``."""
        (a0, a1), (b0, b1) = self.support_box
        return (xi > a0) & (xi <= a1) & (eta > b0) & (eta <= b1)


def _check_frequency_range(x: LatticeIndex, grid: Grid):
    # the lattice covers [-M/(2L), M/(2L) - 1/L]
    top = 0.5 * grid.frequency_extent - grid.frequency_spacing
    bottom = -0.5 * grid.frequency_extent
    if min(x) - 1 < bottom or max(x) + 1 > top:
        raise ValueError(f"frequency lattice [{bottom:g}, {top:g}] does not contain the support of window {x}")


def _window_values(x: LatticeIndex, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    num = bump(u - x[0], v - x[1])
    den = np.zeros_like(num)
    for e in _NEIGHBOURS:
        den += bump(u - x[0] - e[0], v - x[1] - e[1])
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=num > 0)
    return out


def window(x, grid: Grid) -> PartitionWindow:
    """Sample ``psi_x`` on the frequency lattice of ``grid``."""
    x = _as_index(x)
    _check_frequency_range(x, grid)
    axis = grid.frequency_axis()
    rows = np.flatnonzero(np.abs(axis - x[0]) < 1.0)
    cols = np.flatnonzero(np.abs(axis - x[1]) < 1.0)
    u, v = np.meshgrid(axis[rows], axis[cols], indexing="ij")
    values = np.zeros((grid.points, grid.points))
    values[np.ix_(rows, cols)] = _window_values(x, u, v)
    box = ((x[0] - 1.0, x[0] + 1.0), (x[1] - 1.0, x[1] + 1.0))
    return PartitionWindow(x, ScalarField(grid, values, FREQUENCY), box)


def frequency_multiplier(x, s: float, grid: Grid) -> ScalarField:
    """``psi_x a_s^{-1}`` with the growing factor evaluated only on the window's support."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    win = window(x, grid)
    u, v = grid.frequencies()
    inside = win.contains(u, v) & (win.field.samples.real > 0)
    out = np.zeros(u.shape)
    out[inside] = win.field.samples.real[inside] * np.exp(math.pi ** 2 * s * (u[inside] ** 2 + v[inside] ** 2))
    return ScalarField(grid, out, FREQUENCY)


def piece_spectrum(g: ScalarField, x, alpha: float) -> np.ndarray:
    """Forward spectrum ``F(g_x)`` sampled on the frequency lattice.

    ``F(g_x)(xi) = F(H_s g)(xi) * [psi_x a_s^{-1}](-xi)``.  The heat factor is
    applied on the spectrum directly: a detour through space would let
    ``a_s^{-1}`` amplify roundoff by up to ``exp(pi^2 s |xi|^2)``.
    """
    if g.domain != SPACE:
        raise ValueError("symbol_piece expects a space-domain field")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    s = 1.0 / (2.0 * alpha)
    heat = _forward(g.samples, g.grid.spacing) * gaussian_multiplier(g.grid, s)
    mult = reflect(frequency_multiplier(x, s, g.grid)).samples
    return heat * mult


def symbol_piece(g: ScalarField, x, alpha: float) -> ScalarField:
    """The piece ``g_x`` whose inverse spectrum lives in ``x + (-1, 1]^2``."""
    spec = piece_spectrum(g, x, alpha)
    return ScalarField(g.grid, _inverse(spec, g.grid.spacing))


def window_sum(grid: Grid, radius: int) -> np.ndarray:
    """``sum_{|x|_inf <= radius} psi_x`` on the frequency lattice."""
    total = np.zeros((grid.points, grid.points))
    for x in lattice_points(radius):
        total += window(x, grid).field.samples.real
    return total


def normalizer_range(grid: Grid) -> tuple[float, float]:
    """Range of ``sum_y phi(. - y)`` over the frequency lattice."""
    u, v = grid.frequencies()
    den = np.zeros(u.shape)
    for i in range(-2, 3):
        for j in range(-2, 3):
            den += bump(u - np.rint(u) - i, v - np.rint(v) - j)
    return float(den.min()), float(den.max())
