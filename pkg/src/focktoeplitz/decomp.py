"""Frequency decomposition ``T_g = sum_x T_{g_x}`` and its companion identities."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import field as fld
from .bounds import main_bound
from .field import Grid, ScalarField
from .fock import (FockBasis, OperatorMatrix, displacement_matrix, operator_norm, toeplitz_from_spectrum,
                   toeplitz_matrix)
from .partition import _as_index, frequency_multiplier, lattice_points, piece_spectrum, window
from .symbols import SymbolSpec, sample_symbol

#: slack for the monotonicity test of partial-sum residuals once they reach roundoff
MONOTONE_SLACK = 1e-14


class QuadratureMassError(ValueError):
    """The quadrature box misses a non-negligible share of the kernel's mass."""


@dataclass
class PieceRecord:
    index: tuple[int, int]
    sup: float
    norm: float
    tail_weight: float

    def as_dict(self) -> dict:
        return {"x": list(self.index), "sup": self.sup, "norm": self.norm, "tail_weight": self.tail_weight}


@dataclass
class DecompositionReport:
    alpha: float
    dimension: int
    radius: int
    symbol: str
    pieces: list[PieceRecord]
    residuals: list[float]
    field_residual: float
    matrices: dict = dc_field(default_factory=dict, repr=False)

    @property
    def monotone(self) -> bool:
        r = self.residuals
        return all(b <= a + MONOTONE_SLACK for a, b in zip(r, r[1:]))

    def piece(self, x) -> PieceRecord:
        x = _as_index(x)
        for rec in self.pieces:
            if rec.index == x:
                return rec
        raise KeyError(x)

    def dominant(self) -> PieceRecord:
        return max(self.pieces, key=lambda rec: rec.sup)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "dimension": self.dimension, "radius": self.radius,
                "symbol": self.symbol, "residuals": self.residuals, "monotone": self.monotone,
                "field_residual": self.field_residual, "pieces": [p.as_dict() for p in self.pieces]}


def _sampled(g, grid: Grid) -> ScalarField:
    return g if isinstance(g, ScalarField) else sample_symbol(g, grid)


def _full_matrix(g, basis: FockBasis, grid: Grid) -> OperatorMatrix:
    if isinstance(g, SymbolSpec) and g.is_analytic:
        return toeplitz_matrix(g, basis)
    return toeplitz_matrix(_sampled(g, grid), basis)


def piece_tail_estimate(g, x, alpha: float, grid: Grid, numerator: float | None = None) -> float:
    """Constant-free tail weight ``sum ||H_{2/alpha}|J^{a,b} g|||_inf / (1 + |x1| + |x2|)^3``.

    The numerator does not depend on ``x``; pass it in to avoid recomputing.
    """
    x = _as_index(x)
    if numerator is None:
        numerator = main_bound(g, alpha, grid)
    return numerator / (1 + abs(x[0]) + abs(x[1])) ** 3


def decompose(g, alpha: float, R: int, basis: FockBasis, grid: Grid, *, workers: int = 1,
              keep_matrices: bool = False) -> DecompositionReport:
    """Split ``T_g`` into the pieces ``T_{g_x}``, ``|x|_inf <= R``.

    Partial sums are accumulated by increasing ``|x|_inf`` (ties broken
    lexicographically) and ``||T_g - sum_{|x|_inf <= r} T_{g_x}||`` is recorded
    for every ``r``.
    """
    if int(R) != R or R < 0:
        raise ValueError(f"lattice radius must be a nonnegative integer, got {R}")
    if basis.alpha != alpha:
        raise ValueError(f"basis alpha {basis.alpha} differs from alpha {alpha}")
    f = _sampled(g, grid)
    order = lattice_points(int(R))
    for x in order:
        window(x, grid)  # fail early if the frequency lattice is too small

    def build(x):
        spec = piece_spectrum(f, x, alpha)
        if not np.any(spec):
            return spec, OperatorMatrix(basis, np.zeros((basis.dimension,) * 2))
        return spec, toeplitz_from_spectrum(spec, grid, basis)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(build, order))
    else:
        built = [build(x) for x in order]

    T = _full_matrix(g, basis, grid)
    numerator = main_bound(f, alpha, grid)
    acc = np.zeros((basis.dimension,) * 2, dtype=complex)
    spec_acc = np.zeros((grid.points,) * 2, dtype=complex)
    pieces, residuals = [], []
    level = 0
    for x, (spec, Tx) in zip(order, built):
        if max(abs(x[0]), abs(x[1])) > level:
            residuals.append(operator_norm(T.entries - acc))
            level += 1
        acc += Tx.entries
        spec_acc += spec
        sup = float(np.abs(fld._inverse(spec, grid.spacing)).max()) if np.any(spec) else 0.0
        pieces.append(PieceRecord(x, sup, operator_norm(Tx), piece_tail_estimate(f, x, alpha, grid, numerator)))
    residuals.append(operator_norm(T.entries - acc))
    recon = fld._inverse(spec_acc, grid.spacing)
    report = DecompositionReport(alpha, basis.dimension, int(R), _label(g), pieces, residuals,
                                 float(np.abs(f.samples - recon).max()))
    if keep_matrices:
        report.matrices = {"T": T, **{x: Tx for x, (_, Tx) in zip(order, built)}}
    return report


def _label(g) -> str:
    return g.describe() if isinstance(g, SymbolSpec) else "sampled field"


def berezin_level_residual(g, alpha: float, R: int, grid: Grid, points) -> float:
    """``max |H_{1/alpha} g(z) - sum_{|x|_inf <= R} H_{1/alpha} g_x(z)|`` over ``points``.

    ``points`` must be grid nodes.
    """
    f = _sampled(g, grid)
    h = 1.0 / alpha
    total = np.zeros((grid.points,) * 2, dtype=complex)
    for x in lattice_points(int(R)):
        total += piece_spectrum(f, x, alpha)
    lhs = fld.heat_transform(f, h)
    rhs = ScalarField(grid, fld._inverse(total * fld.gaussian_multiplier(grid, h), grid.spacing))
    return max(abs(lhs.value_at(z) - rhs.value_at(z)) for z in np.ravel(points))


def weyl_conjugation_residual(g, x, alpha: float, basis: FockBasis, grid: Grid) -> float:
    """Operator norm, on the leading ``N/2`` block, of

        W_z T_{g_x} W_z - T_{(b_x H_s g) * F[a_s^{-1} psi_0]},   z = -i pi x / (2 alpha).

    Both symbols are handled through their spectra; the right-hand one is
    ``F(g)(xi - x) a_s(xi - x) a_s^{-1}(xi) psi_0(xi)``.
    """
    x = _as_index(x)
    f = _sampled(g, grid)
    s = 1.0 / (2.0 * alpha)
    left_piece = toeplitz_from_spectrum(piece_spectrum(f, x, alpha), grid, basis)
    z = -1j * math.pi * complex(*x) / (2.0 * alpha)
    W = displacement_matrix(z, basis)
    lhs = W @ left_piece @ W

    # a frequency shift by x is x * L lattice steps
    steps = np.array(x, dtype=float) * grid.extent
    if not np.allclose(steps, np.rint(steps)):
        raise ValueError("modulation must land on the frequency lattice")
    shift = (int(np.rint(steps[0])), int(np.rint(steps[1])))
    heat = fld._forward(f.samples, grid.spacing) * fld.gaussian_multiplier(grid, s)
    moved = np.roll(heat, shift, axis=(0, 1))
    rhs_spec = moved * frequency_multiplier((0, 0), s, grid).samples
    rhs = toeplitz_from_spectrum(rhs_spec, grid, basis)
    half = basis.dimension // 2
    return operator_norm((lhs - rhs).block(half))


def _trapezoid_nodes(radius: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(round(2 * radius / step))
    if not math.isclose(n * step, 2 * radius, rel_tol=1e-12):
        raise ValueError(f"quad_step {step} does not divide the box [-{radius}, {radius}]")
    y = -radius + step * np.arange(n + 1)
    w = np.full(n + 1, step)
    w[0] = w[-1] = 0.5 * step
    return y, w


def representation_kernel(x, t: float, alpha: float, grid: Grid) -> ScalarField:
    """``F(psi_x a_{1/(2 alpha) + t}^{-1})`` on the space lattice."""
    mult = frequency_multiplier(x, 1.0 / (2.0 * alpha) + t, grid)
    return fld.reflect(ScalarField(grid, fld._inverse(mult.samples, grid.spacing)))


def kernel_mass_outside(x, t: float, alpha: float, grid: Grid, radius: float) -> float:
    """Share of ``int |K|`` outside ``|y|_inf <= radius`` for the representation kernel."""
    K = np.abs(representation_kernel(x, t, alpha, grid).samples)
    u, v = grid.coordinates()
    outside = np.maximum(np.abs(u), np.abs(v)) > radius + 1e-12
    return float(K[outside].sum() / K.sum())


def integral_representation(g, x, t: float, alpha: float, basis: FockBasis, grid: Grid,
                            quad_radius: float = 4.0, quad_step: float = 0.25, *,
                            mass_tol: float | None = 1e-6, method: str = "fused") -> OperatorMatrix:
    """Trapezoidal approximation of

        int F(psi_x a_{s+t}^{-1})(y) T_{tau_y H_{s+t} g} dv(y),   s = 1/(2 alpha),

    over ``|y|_inf <= quad_radius``.

    ``method='direct'`` assembles every translated Toeplitz matrix and sums
    them.  ``method='fused'`` uses linearity: translation multiplies the
    spectrum by ``exp(-2 pi i y.xi)``, so the weighted sum over ``y`` collapses
    to one spectral multiplier and one assembly.  Both give the same sum up
    to roundoff.

    Raises :class:`QuadratureMassError` when more than ``mass_tol`` of the
    kernel's absolute mass lies outside the box (``None`` disables the check).
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if method not in ("fused", "direct"):
        raise ValueError(f"unknown method {method!r}")
    x = _as_index(x)
    grid.lattice_index((quad_step, 0.0))
    if mass_tol is not None:
        share = kernel_mass_outside(x, t, alpha, grid, quad_radius)
        if share > mass_tol:
            raise QuadratureMassError(
                f"{share:.3g} of the kernel mass lies outside |y| <= {quad_radius} (tolerance {mass_tol:g})")
    st = 1.0 / (2.0 * alpha) + t
    ys, wy = _trapezoid_nodes(quad_radius, quad_step)

    # kernel values at the nodes, summed exactly over the window's support
    mult = frequency_multiplier(x, st, grid).samples
    u, v = grid.frequencies()
    nz = mult != 0
    hw = mult[nz] * grid.frequency_spacing ** 2
    K = np.einsum("ik,jk,k->ij", np.exp(-2j * math.pi * np.outer(ys, u[nz])),
                  np.exp(-2j * math.pi * np.outer(ys, v[nz])), hw)
    weights = K * np.outer(wy, wy)

    f = _sampled(g, grid)
    if method == "direct":
        heat = fld.heat_transform(f, st)
        out = np.zeros((basis.dimension,) * 2, dtype=complex)
        for i, a in enumerate(ys):
            for j, b in enumerate(ys):
                moved = fld.translate_modulate(heat, (a, b))
                out += weights[i, j] * toeplitz_matrix(moved, basis).entries
        return OperatorMatrix(basis, out)

    spec = fld._forward(f.samples, grid.spacing) * fld.gaussian_multiplier(grid, st)
    mag = np.abs(spec)
    keep = mag > 1e-18 * mag.max() if mag.max() > 0 else np.zeros_like(mag, bool)
    m = np.einsum("ij,ik,jk->k", weights, np.exp(-2j * math.pi * np.outer(ys, u[keep])),
                  np.exp(-2j * math.pi * np.outer(ys, v[keep])))
    combined = np.zeros_like(spec)
    combined[keep] = spec[keep] * m
    return toeplitz_from_spectrum(combined, grid, basis)


def translation_modulus(g, alpha: float, basis: FockBasis, grid: Grid, step: float) -> float:
    """``||T_{tau_y h} - T_h|| / |y|`` for ``h = H_{1/(2 alpha)} g`` and ``y = (step, 0)``.

    A finite-difference probe of the uniform continuity of ``y -> T_{tau_y h}``.
    """
    h = fld.heat_transform(_sampled(g, grid), 1.0 / (2.0 * alpha))
    moved = fld.translate_modulate(h, (step, 0.0))
    diff = toeplitz_matrix(moved, basis).entries - toeplitz_matrix(h, basis).entries
    return operator_norm(diff) / step
