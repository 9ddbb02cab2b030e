"""Truncated Fock-space linear algebra.

Operators are represented in the orthonormal monomial basis
``e_m(z) = sqrt(alpha^m / m!) z^m`` of ``F^2_alpha``; entry ``(j, k)`` of an
:class:`OperatorMatrix` is ``<A e_k, e_j>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln, roots_hermite

from .field import Grid, ScalarField, fourier, interpolate
from .symbols import SymbolSpec, sample_symbol

KERNEL_RADIUS_FRACTION = 0.5
DISPLACEMENT_RADIUS_FRACTION = 0.25
DISPLACEMENT_PADDING = 40


class BasisMismatchError(ValueError):
    pass


class TruncationError(ValueError):
    """A point lies too far out for the truncated basis to represent its kernel."""


@dataclass(frozen=True)
class FockBasis:
    alpha: float
    dimension: int

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dimension}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "dimension", int(self.dimension))

    def evaluate(self, z) -> np.ndarray:
        """Values ``e_m(z)``; shape ``z.shape + (N,)``."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (self.dimension,), dtype=complex)
        out[..., 0] = 1.0
        for m in range(1, self.dimension):
            out[..., m] = out[..., m - 1] * z * math.sqrt(self.alpha / m)
        return out

    def kernel_radius(self, fraction: float = KERNEL_RADIUS_FRACTION) -> float:
        """Largest ``|z|`` with ``alpha |z|^2 <= fraction * N``."""
        return math.sqrt(fraction * self.dimension / self.alpha)

    def check_kernel_point(self, z, fraction: float = KERNEL_RADIUS_FRACTION):
        r2 = np.max(np.abs(np.asarray(z)) ** 2) if np.size(z) else 0.0
        if self.alpha * r2 > fraction * self.dimension * (1 + 1e-12):
            raise TruncationError(
                f"|z|^2 = {r2:.4g} exceeds {fraction} N / alpha = {fraction * self.dimension / self.alpha:.4g}")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    basis: FockBasis
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        n = self.basis.dimension
        if arr.shape != (n, n):
            raise ValueError(f"entries must be {n}x{n}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def _check(self, other: "OperatorMatrix"):
        if self.basis != other.basis:
            raise BasisMismatchError(f"{self.basis} != {other.basis}")

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries + other.entries)

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries - other.entries)

    def __neg__(self):
        return OperatorMatrix(self.basis, -self.entries)

    def __mul__(self, c):
        return OperatorMatrix(self.basis, self.entries * complex(c))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries @ other.entries)

    @property
    def H(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.entries.conj().T)

    def block(self, size: int) -> np.ndarray:
        """Leading ``size x size`` block of the entries."""
        return self.entries[:size, :size]


def identity(basis: FockBasis) -> OperatorMatrix:
    return OperatorMatrix(basis, np.eye(basis.dimension, dtype=complex))


def matrix_algebra(op: str, A: OperatorMatrix, B=None) -> OperatorMatrix:
    """``add``, ``scale`` (B a scalar), ``multiply`` or ``adjoint``."""
    if op == "add":
        return A + B
    if op == "scale":
        return A * B
    if op == "multiply":
        return A @ B
    if op == "adjoint":
        return A.H
    raise ValueError(f"unknown matrix operation {op!r}")


# ---------------------------------------------------------------------------
# reproducing kernels

def kernel_coefficients(z, basis: FockBasis) -> np.ndarray:
    """Expansion of the normalized kernel ``k_z`` in the basis.

    ``c_m = exp(-alpha|z|^2/2) sqrt(alpha^m/m!) conj(z)^m``, accumulated in
    log space.  Vectorized: for array ``z`` the result has shape
    ``z.shape + (N,)``.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("kernel point must be finite")
    a = basis.alpha
    m = np.arange(basis.dimension)
    r = np.abs(z)[..., None]
    logr = np.log(np.where(r > 0, r, 1.0))
    logmag = -0.5 * a * r * r + 0.5 * m * math.log(a) - 0.5 * gammaln(m + 1) + m * logr
    logmag = np.where((r == 0) & (m > 0), -np.inf, logmag)
    phase = np.exp(-1j * m * np.angle(z)[..., None])
    return np.exp(logmag) * phase


def berezin(A: OperatorMatrix, z, w=None) -> complex:
    """``<A k_z, k_w>``; ``w`` defaults to ``z`` (the one-variable transform)."""
    basis = A.basis
    w = z if w is None else w
    basis.check_kernel_point(z)
    basis.check_kernel_point(w)
    cz = kernel_coefficients(z, basis)
    cw = kernel_coefficients(w, basis)
    return complex(cw.conj() @ A.entries @ cz)


def berezin_many(A: OperatorMatrix, zs, ws=None) -> np.ndarray:
    """Vectorized :func:`berezin` over matching arrays of points."""
    basis = A.basis
    zs = np.asarray(zs, dtype=complex)
    ws = zs if ws is None else np.asarray(ws, dtype=complex)
    basis.check_kernel_point(zs)
    basis.check_kernel_point(ws)
    cz = kernel_coefficients(zs, basis)
    cw = kernel_coefficients(ws, basis)
    return np.einsum("...j,jk,...k->...", cw.conj(), A.entries, cz)


# ---------------------------------------------------------------------------
# Toeplitz assembly

@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor quadrature against ``exp(-alpha |z|^2)``.

    ``scheme='gauss_hermite'`` uses ``order`` nodes per axis (``None`` picks
    ``max(80, 2N + 10)``); ``scheme='grid'`` uses the nodes of ``grid``.
    """

    scheme: str = "gauss_hermite"
    order: int | None = None
    grid: Grid | None = None

    def __post_init__(self):
        if self.scheme not in ("gauss_hermite", "grid"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.scheme == "grid" and self.grid is None:
            raise ValueError("grid quadrature needs a grid")

    def resolved_order(self, basis: FockBasis) -> int:
        q = self.order if self.order is not None else max(80, 2 * basis.dimension + 10)
        if q < 2 * basis.dimension:
            raise ValueError(f"quadrature order {q} below 2N = {2 * basis.dimension}")
        return int(q)

    def nodes(self, basis: FockBasis):
        """1D nodes and weights such that ``sum w f(x) ~ int f(x) exp(-alpha x^2) dx``."""
        if self.scheme == "gauss_hermite":
            t, w = roots_hermite(self.resolved_order(basis))
            s = math.sqrt(basis.alpha)
            return t / s, w / s
        axis = self.grid.axis()
        return axis, self.grid.spacing * np.exp(-basis.alpha * axis ** 2)


DEFAULT_QUADRATURE = QuadratureSpec()


def _assemble(values: np.ndarray, xs: np.ndarray, wx: np.ndarray, basis: FockBasis) -> np.ndarray:
    """``(alpha/pi) sum W g e_k conj(e_j)`` over the tensor nodes."""
    z = xs[:, None] + 1j * xs[None, :]
    weights = (wx[:, None] * wx[None, :]) * values
    E = basis.evaluate(z).reshape(-1, basis.dimension)
    T = (E.conj().T * weights.ravel()) @ E
    return basis.alpha / math.pi * T


def _closed_form_entries(spec: SymbolSpec, basis: FockBasis) -> np.ndarray | None:
    """Exact Toeplitz matrix for the analytic family, or ``None``."""
    if not spec.is_analytic:
        return None
    a, n = basis.alpha, basis.dimension
    beta = a + spec.decay
    x1, x2 = spec.modulation
    m_pow = spec.power
    k = np.arange(n)
    if x1 == 0 and x2 == 0:
        # diagonal: alpha^(k+1) (k+m)! / (k! beta^(k+m+1))
        logd = ((k + 1) * math.log(a) + gammaln(k + m_pow + 1) - gammaln(k + 1)
                - (k + m_pow + 1) * math.log(beta))
        return np.diag(spec.amplitude * np.exp(logd))
    if m_pow:
        return None
    stack = _plane_wave_stack(np.array([[x1, x2]]), basis, beta)
    return spec.amplitude * stack[0]


def _plane_wave_stack(freqs: np.ndarray, basis: FockBasis, beta: float | None = None) -> np.ndarray:
    """Matrices of ``T_g`` for ``g = exp(-(beta-alpha)|w|^2) b_xi(w)``, one per row of ``freqs``.

    For ``k >= j``, ``d = k - j`` and ``y = pi^2 |xi|^2 / beta`` the entry is

        (alpha/beta) sqrt(alpha^(j+k) j!/k!) (pi i xi)^d beta^-k e^-y L_j^(d)(y)

    with ``xi`` read as a complex number; ``j > k`` mirrors with ``conj(xi)``.
    The Laguerre form avoids the cancellation of the raw binomial sum.
    """
    a, n = basis.alpha, basis.dimension
    beta = a if beta is None else beta
    freqs = np.atleast_2d(np.asarray(freqs, dtype=float))
    rho = math.pi * np.hypot(freqs[:, 0], freqs[:, 1])
    theta = np.arctan2(freqs[:, 1], freqs[:, 0])
    y = rho * rho / beta
    lag = _laguerre_table(n, y)
    k = np.arange(n)
    lo = np.minimum.outer(k, k)
    hi = np.maximum.outer(k, k)
    d = hi - lo
    base = (math.log(a / beta) + 0.5 * (lo + hi) * math.log(a)
            + 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - hi * math.log(beta))
    logrho = np.log(np.where(rho > 0, rho, 1.0))
    rad = d * logrho[:, None, None]
    sign = np.where(k[None, :] >= k[:, None], 1.0, -1.0)
    phase = d * (0.5 * math.pi + sign * theta[:, None, None])
    mag = np.exp(base + rad - y[:, None, None])
    mag = np.where((rho[:, None, None] == 0) & (d > 0), 0.0, mag)
    return mag * np.exp(1j * phase) * lag[:, lo, d]


def _laguerre_table(n: int, y) -> np.ndarray:
    """``L[..., j, d] = L_j^(d)(y)`` for ``0 <= j, d < n`` by forward recurrence in ``j``."""
    y = np.asarray(y, dtype=float)[..., None]
    d = np.arange(n, dtype=float)
    L = np.empty(y.shape[:-1] + (n, n))
    L[..., 0, :] = 1.0
    if n > 1:
        L[..., 1, :] = 1.0 + d - y
    for j in range(1, n - 1):
        L[..., j + 1, :] = ((2 * j + 1 + d - y) * L[..., j, :] - (j + d) * L[..., j - 1, :]) / (j + 1)
    return L


SPECTRAL_CUTOFF = 1e-15
_SPECTRAL_CHUNK = 256


def toeplitz_from_spectrum(spectrum: np.ndarray, grid: Grid, basis: FockBasis) -> OperatorMatrix:
    """``T_f = sum_xi dxi^2 (F f)(xi) T_(b_xi)`` given ``F f`` on the frequency lattice of ``grid``.

    Exact plane-wave matrices make this free of the aliasing that tensor
    quadrature suffers for oscillating symbols.  Frequencies whose weight is
    below ``SPECTRAL_CUTOFF`` times the largest one are skipped.
    """
    spectrum = np.asarray(spectrum, dtype=complex)
    if spectrum.shape != (grid.points, grid.points):
        raise ValueError(f"spectrum must have shape {(grid.points,) * 2}")
    weights = spectrum * grid.frequency_spacing ** 2
    u, v = grid.frequencies()
    mag = np.abs(weights)
    n = basis.dimension
    out = np.zeros((n, n), dtype=complex)
    if mag.max() == 0:
        return OperatorMatrix(basis, out)
    keep = mag > SPECTRAL_CUTOFF * mag.max()
    weights = weights[keep]
    freqs = np.stack([u[keep], v[keep]], axis=1)
    for s in range(0, len(weights), _SPECTRAL_CHUNK):
        stack = _plane_wave_stack(freqs[s:s + _SPECTRAL_CHUNK], basis)
        out += np.tensordot(weights[s:s + _SPECTRAL_CHUNK], stack, axes=1)
    return OperatorMatrix(basis, out)


def toeplitz_matrix(g, basis: FockBasis, quad: QuadratureSpec = DEFAULT_QUADRATURE,
                    method: str = "auto") -> OperatorMatrix:
    """Matrix of the Toeplitz operator ``T_g`` on the truncated basis.

    Parameters
    ----------
    g : SymbolSpec, ScalarField or callable
        The symbol.  Analytic specs use exact Gaussian-moment formulas and
        space fields are expanded in plane waves (``method='auto'``).  With
        ``method='quadrature'`` specs and callables are evaluated at the
        nodes of ``quad``, and fields by trigonometric interpolation.
    method : {'auto', 'closed_form', 'spectral', 'quadrature'}
    """
    if method not in ("auto", "closed_form", "spectral", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(g, SymbolSpec):
        if method in ("auto", "closed_form"):
            entries = _closed_form_entries(g, basis)
            if entries is not None:
                return OperatorMatrix(basis, entries)
            if method == "closed_form":
                raise ValueError(f"no closed form for {g.describe()}")
        if not g.is_analytic or method == "spectral":
            if quad.grid is None:
                raise ValueError(f"{g.describe()} must be sampled; pass a grid quadrature")
            g = sample_symbol(g, quad.grid)
    elif method == "closed_form":
        raise ValueError("closed form only exists for analytic symbol specs")

    if isinstance(g, ScalarField) and method in ("auto", "spectral"):
        if g.domain != "space":
            raise ValueError("Toeplitz symbols must be space-domain fields")
        return toeplitz_from_spectrum(fourier(g, "forward").samples, g.grid, basis)
    if method == "spectral":
        raise ValueError("spectral assembly needs a sampled field")

    xs, wx = quad.nodes(basis)
    if isinstance(g, ScalarField):
        if quad.scheme == "grid" and quad.grid == g.grid:
            values = g.samples
        else:
            values = interpolate(g, xs, xs)
    else:
        values = g(xs[:, None] + 1j * xs[None, :])
    values = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ValueError("symbol is not finite at the quadrature nodes")
    return OperatorMatrix(basis, _assemble(values, xs, wx, basis))


# ---------------------------------------------------------------------------
# displacement operators

def annihilation(dimension: int) -> np.ndarray:
    """``A e_m = sqrt(m) e_(m-1)``."""
    return np.diag(np.sqrt(np.arange(1, dimension, dtype=float)), 1).astype(complex)


def displacement_matrix(z, basis: FockBasis, *, padding: int = DISPLACEMENT_PADDING,
                        check_tol: float = 1e-6) -> OperatorMatrix:
    """Compression of the Weyl operator ``W_z f(w) = f(w - z) k_z(w)``.

    The generator ``sqrt(alpha) (conj(z) A^+ - z A)`` is exponentiated on a
    padded basis of dimension ``N + padding`` and cut back to ``N``, so the
    trailing rows and columns are not polluted by the truncation boundary.
    Column 0 must reproduce the kernel ``k_z``.
    """
    z = complex(z)
    basis.check_kernel_point(z, DISPLACEMENT_RADIUS_FRACTION)
    n = basis.dimension + padding
    A = annihilation(n)
    gen = math.sqrt(basis.alpha) * (np.conj(z) * A.conj().T - z * A)
    W = expm(gen)[:basis.dimension, :basis.dimension]
    err = np.max(np.abs(W[:, 0] - kernel_coefficients(z, basis)))
    if err > check_tol:
        raise ArithmeticError(f"displacement column 0 deviates from k_z by {err:.3g}")
    return OperatorMatrix(basis, W)


# ---------------------------------------------------------------------------
# norms

def operator_norm(A, *, rtol: float = 1e-10, max_iter: int = 500) -> float:
    """Largest singular value by power iteration on ``A^H A``.

    Deterministic: the start vector is the normalized all-ones vector.
    Accepts an :class:`OperatorMatrix` or a plain array.
    """
    M = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A, dtype=complex)
    if not np.any(M):
        return 0.0
    n = M.shape[1]
    v = np.ones(n, dtype=complex) / math.sqrt(n)
    est = 0.0
    for _ in range(max_iter):
        u = M.conj().T @ (M @ v)
        lam = float(np.real(np.vdot(v, u)))
        nu = np.linalg.norm(u)
        if nu == 0:
            break
        v = u / nu
        if est and abs(lam - est) <= rtol * abs(lam):
            est = lam
            break
        est = lam
    return math.sqrt(max(est, 0.0))


def singular_values(A) -> np.ndarray:
    M = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A, dtype=complex)
    return np.linalg.svd(M, compute_uv=False)


def schatten_norm(A, p: float) -> float:
    """``(sum sigma_i^p)^(1/p)`` over all singular values."""
    if not p >= 1:
        raise ValueError(f"Schatten index must be >= 1, got {p}")
    s = singular_values(A)
    top = s.max() if s.size else 0.0
    if top == 0:
        return 0.0
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))
