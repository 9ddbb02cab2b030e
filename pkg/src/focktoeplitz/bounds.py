"""Computable right-hand sides of the norm and Schatten-norm inequalities.

None of the inequalities come with explicit constants, so every function here
returns the constant-free right-hand side.  Divergent integrals (a symbol that
is not integrable, an operator that is not compact) are reported as
``math.inf``; :func:`is_divergent` tells the two apart from large values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import field as fld
from .field import Grid, ScalarField
from .fock import OperatorMatrix, kernel_coefficients
from .symbols import SymbolSpec, sample_symbol

#: share of an integral carried by the outermost shell above which it is declared divergent
DIVERGENCE_FRACTION = 0.01


def is_divergent(value: float) -> bool:
    return math.isinf(value)


@dataclass
class BoundReport:
    """A bound next to the quantity it controls."""

    symbol: str
    alpha: float
    name: str
    bound: float
    measured: float | None = None
    p: float | None = None
    extras: dict = dc_field(default_factory=dict)

    @property
    def divergent(self) -> bool:
        return is_divergent(self.bound)

    @property
    def ratio(self) -> float | None:
        if self.measured is None:
            return None
        if self.divergent:
            return 0.0
        return self.measured / self.bound if self.bound > 0 else math.inf

    def as_dict(self) -> dict:
        return {"symbol": self.symbol, "alpha": self.alpha, "name": self.name, "p": self.p,
                "bound": self.bound, "measured": self.measured, "ratio": self.ratio,
                "divergent": self.divergent, **self.extras}


def _field(g, grid: Grid) -> ScalarField:
    return g if isinstance(g, ScalarField) else sample_symbol(g, grid)


def _describe(g) -> str:
    return g.describe() if isinstance(g, SymbolSpec) else "sampled field"


def jet(g, alpha: float, grid: Grid | None = None) -> dict[tuple[int, int], ScalarField]:
    """``J^{a,b} g = d^a_Re d^b_Im H_{1/(2 alpha)} g`` for all ``a + b <= 3``."""
    f = _field(g, grid)
    return fld.heat_derivatives(f, 1.0 / (2.0 * alpha))


# ---------------------------------------------------------------------------
# Carleson quantities

def carleson(f: ScalarField, mode: str = "heat", *, r: float = 1.0, alpha: float = 1.0) -> float:
    """Ball average ``sup_x int_{B(x,r)} f`` or heat value ``||H_{2/alpha} f||_inf``.

    ``f`` must be nonnegative (pass ``f.abs()``).
    """
    fld._require_space(f)
    if np.any(np.abs(f.samples.imag) > 0) or np.any(f.samples.real < 0):
        raise ValueError("carleson expects a nonnegative field")
    if mode == "heat":
        return fld.heat_transform(f, 2.0 / alpha).sup()
    if mode != "ball":
        raise ValueError(f"mode must be 'ball' or 'heat', got {mode!r}")
    if not r > 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    x, y = f.grid.coordinates()
    disc = ScalarField(f.grid, ((x * x + y * y) <= r * r).astype(float))
    return float(np.max(fld.convolve(f, disc).samples.real))


# ---------------------------------------------------------------------------
# Schur-type bound from the two-variable Berezin transform

def two_variable_berezin(g: SymbolSpec, z, w, alpha: float) -> np.ndarray:
    """``<g k_z, k_w>`` in closed form for the analytic family.

    With ``beta = alpha + c``, ``U = alpha conj(z) + pi i conj(x)`` and
    ``V = alpha w + pi i x`` the value is

        A (alpha/beta) m! beta^-m L_m(-UV/beta) exp(UV/beta - alpha(|z|^2+|w|^2)/2).
    """
    if not g.is_analytic:
        raise TypeError("closed form needs an analytic symbol")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    beta = alpha + g.decay
    xc = complex(*g.modulation)
    U = alpha * np.conj(z) + 1j * math.pi * np.conj(xc)
    V = alpha * w + 1j * math.pi * xc
    q = U * V / beta
    val = g.amplitude * (alpha / beta) * np.exp(q - 0.5 * alpha * (np.abs(z) ** 2 + np.abs(w) ** 2))
    m = g.power
    if m:
        coef = np.zeros(m + 1)
        coef[m] = 1.0
        val = val * math.factorial(m) * beta ** (-m) * np.polynomial.laguerre.lagval(-q, coef)
    return val


def two_variable_berezin_quadrature(g, z: complex, w: complex, alpha: float, order: int = 60) -> complex:
    """``<g k_z, k_w>`` by Gauss-Hermite quadrature centred on ``(z + w)/2``.

    After completing the square the weight is ``exp(-alpha |u - (z+w)/2|^2)``
    times a unimodular phase, so shifting the nodes keeps the rule accurate.
    ``g`` is any vectorized callable of a complex argument.
    """
    from scipy.special import roots_hermite

    t, wt = roots_hermite(order)
    s = math.sqrt(alpha)
    c = 0.5 * (z + w)
    u = c + (t[:, None] + 1j * t[None, :]) / s
    # k_z(u) conj(k_w(u)) exp(-alpha|u|^2) = exp(-alpha|u-c|^2 + i phase) * damping
    logk = (alpha * u * np.conj(z) - 0.5 * alpha * abs(z) ** 2
            + alpha * np.conj(u) * w - 0.5 * alpha * abs(w) ** 2 - alpha * np.abs(u) ** 2)
    integrand = g(u) * np.exp(logk + alpha * np.abs(u - c) ** 2)
    return complex(alpha / math.pi * np.sum(wt[:, None] * wt[None, :] * integrand) / alpha)


def _boundary_max_exceeds(values: np.ndarray, rtol: float = 1e-9) -> bool:
    inner = values[1:-1, 1:-1]
    if inner.size == 0:
        return True
    edge = max(values[0].max(), values[-1].max(), values[:, 0].max(), values[:, -1].max())
    return edge > inner.max() * (1 + rtol)


class RegionTooSmallError(ValueError):
    """A supremum sits on the edge of the sampled region."""


def schur_bound(g: SymbolSpec, alpha: float = 1.0, sample_extent: float = 4.0, sample_step: float = 0.5,
                integration_step: float = 0.125, margin: float | None = None) -> float:
    """``sqrt([(alpha/pi) sup_z int |g~| dv(w)] [sup_w int |g~| dv(z)])``.

    ``z`` (resp. ``w``) runs over the lattice ``[-E/2, E/2]^2`` with step
    ``sample_step``; the inner integral is a Riemann sum over a box enlarged by
    ``margin`` (default ``12/sqrt(alpha) + pi|x|/alpha``).  The single ``alpha/pi`` factor sits
    in the first bracket only.
    """
    if not isinstance(g, SymbolSpec) or not g.is_analytic:
        raise TypeError("schur_bound needs an analytic symbol")
    if margin is None:
        # |g~(z, .)| is a Gaussian displaced by up to pi |x| / alpha
        margin = 12.0 / math.sqrt(alpha) + math.pi * math.hypot(*g.modulation) / alpha
    half = 0.5 * sample_extent
    samples = np.arange(-half, half + 0.5 * sample_step, sample_step)
    reach = half + margin
    nodes = np.arange(-reach, reach + 0.5 * integration_step, integration_step)
    ui = nodes[:, None] + 1j * nodes[None, :]
    cell = integration_step ** 2

    def sweep(fixed_is_z: bool) -> np.ndarray:
        out = np.empty((samples.size, samples.size))
        for i, a in enumerate(samples):
            for j, b in enumerate(samples):
                p = complex(a, b)
                vals = np.abs(two_variable_berezin(g, p, ui, alpha) if fixed_is_z
                              else two_variable_berezin(g, ui, p, alpha))
                edge = max(vals[0].max(), vals[-1].max(), vals[:, 0].max(), vals[:, -1].max())
                if edge > 1e-10 * max(vals.max(), 1e-300):
                    raise RegionTooSmallError("integration box does not contain the kernel mass; raise margin")
                out[i, j] = cell * vals.sum()
        return out

    over_w = sweep(True)
    over_z = sweep(False)
    for name, tab in (("z", over_w), ("w", over_z)):
        if _boundary_max_exceeds(tab):
            raise RegionTooSmallError(f"sup over {name} attained on the sample boundary")
    s1 = over_w.max()
    s2 = over_z.max()
    return float(math.sqrt((alpha / math.pi) * s1 * s2))


# ---------------------------------------------------------------------------
# derivative bounds

def main_bound(g, alpha: float, grid: Grid) -> float:
    """``sum_{a+b<=3} || H_{2/alpha} |J^{a,b} g| ||_inf``."""
    return float(sum(main_bound_terms(g, alpha, grid).values()))


def main_bound_terms(g, alpha: float, grid: Grid) -> dict[tuple[int, int], float]:
    terms = {}
    for ab, j in jet(g, alpha, grid).items():
        terms[ab] = fld.heat_transform(j.abs(), 2.0 / alpha).sup()
    return terms


def derivative_sup_sum(g, alpha: float, grid: Grid) -> float:
    """``sum_{a+b<=3} ||J^{a,b} g||_inf``."""
    return float(sum(j.sup() for j in jet(g, alpha, grid).values()))


def bound_chain_report(g, alpha: float, t: float, grid: Grid) -> BoundReport:
    """The three members of the chain heat-of-jet, jet, heat transform."""
    if not 0 < t < 1.0 / (2.0 * alpha):
        raise ValueError(f"t must lie in (0, 1/(2 alpha)) = (0, {1 / (2 * alpha):g}), got {t}")
    first = main_bound(g, alpha, grid)
    second = derivative_sup_sum(g, alpha, grid)
    third = fld.heat_transform(_field(g, grid), t).sup()
    chain = [first, second, third]
    ratios = [first / second if second else math.inf, second / third if third else math.inf]
    return BoundReport(_describe(g), alpha, "bound_chain", first, None, None,
                       {"chain": chain, "ratios": ratios, "t": t})


def _lp_or_inf(f: ScalarField, p: float) -> float:
    if fld.boundary_fraction(f, p) > DIVERGENCE_FRACTION:
        return math.inf
    return fld.field_norm(f, "Lp", p)


def schatten_symbol_bound(g, p: float, grid: Grid, variant: str = "plain", alpha: float = 1.0) -> float:
    """``||g||_p`` (plain) or ``sum_{a+b<=3} ||J^{a,b} g||_p`` (derivative)."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if variant == "plain":
        return _lp_or_inf(_field(g, grid).abs(), p)
    if variant == "derivative":
        return float(sum(_lp_or_inf(j, p) for j in jet(g, alpha, grid).values()))
    raise ValueError(f"variant must be 'plain' or 'derivative', got {variant!r}")


def _lattice(extent: float, step: float) -> np.ndarray:
    half = 0.5 * extent
    return np.arange(-half, half + 0.5 * step, step)


def _outer_shell_share(values: np.ndarray) -> float:
    total = values.sum()
    if total == 0:
        return 0.0
    shell = values.copy()
    shell[1:-1, 1:-1] = 0.0
    return float(shell.sum() / total)


def kernel_schatten_bound(A: OperatorMatrix, p: float, w_extent: float, w_step: float,
                          z_extent: float, z_step: float) -> float:
    """``int ( int |<A k_z, k_{z+w}>|^p dv(z) )^{1/p} dv(w)`` by Riemann sums.

    Returns ``math.inf`` when either integral carries more than
    ``DIVERGENCE_FRACTION`` of its mass in the outermost shell of samples.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    zs = _lattice(z_extent, z_step)
    ws = _lattice(w_extent, w_step)
    zg = zs[:, None] + 1j * zs[None, :]
    basis = A.basis
    basis.check_kernel_point(zg)
    cz = kernel_coefficients(zg, basis).reshape(-1, basis.dimension)
    Acz = cz @ A.entries.T  # rows: A k_z
    inner = np.empty((ws.size, ws.size))
    shell_mass = total_mass = 0.0
    for i, a in enumerate(ws):
        for j, b in enumerate(ws):
            target = zg + complex(a, b)
            basis.check_kernel_point(target)
            cw = kernel_coefficients(target, basis).reshape(-1, basis.dimension)
            vals = np.abs(np.einsum("ij,ij->i", cw.conj(), Acz)).reshape(zg.shape) ** p
            mass = vals.sum()
            shell_mass += _outer_shell_share(vals) * mass
            total_mass += mass
            inner[i, j] = (z_step * z_step * mass) ** (1.0 / p)
    if total_mass == 0:
        return 0.0
    if shell_mass > DIVERGENCE_FRACTION * total_mass or _outer_shell_share(inner) > DIVERGENCE_FRACTION:
        return math.inf
    return float(w_step * w_step * inner.sum())


def product_schatten_bound(f, g, p: float, alpha: float, grid: Grid, w_extent: float = 2.0) -> float:
    """``sum sup_w ( iint |J f(xi)|^p |J g(eta)|^p exp(-alpha|xi - eta + w|^2 / 2) )^{1/p}``.

    The sum runs over both multi-index families; each double integral is the
    convolution ``|J g|^p * reflect(|J f|^p * G)`` with ``G(u) = exp(-alpha|u|^2/2)``
    evaluated at ``w``.  The supremum is over grid nodes with ``|w|_inf <= w_extent``.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    x, y = grid.coordinates()
    G = ScalarField(grid, np.exp(-0.5 * alpha * (x * x + y * y)))
    near = np.maximum(np.abs(x), np.abs(y)) <= w_extent + 1e-12
    jf = {ab: ScalarField(grid, np.abs(v.samples) ** p) for ab, v in jet(f, alpha, grid).items()}
    jg = {ab: ScalarField(grid, np.abs(v.samples) ** p) for ab, v in jet(g, alpha, grid).items()}
    total = 0.0
    for F_ in jf.values():
        if not np.any(F_.samples):
            continue
        H = fld.reflect(fld.convolve(F_, G))
        for G_ in jg.values():
            if not np.any(G_.samples):
                continue
            if (fld.boundary_fraction(F_, 1.0) > DIVERGENCE_FRACTION
                    and fld.boundary_fraction(G_, 1.0) > DIVERGENCE_FRACTION):
                return math.inf
            I = fld.convolve(G_, H).samples.real
            total += float(np.max(I[near])) ** (1.0 / p)
    return total


def product_reduction_factor(p: float, alpha: float) -> float:
    """``(int exp(-alpha |u|^2 / 2) dv(u))^{1/p} = (2 pi / alpha)^{1/p}``.

    With ``f = 1`` the product bound equals this factor times the derivative
    Schatten bound of ``g``.
    """
    return (2.0 * math.pi / alpha) ** (1.0 / p)
