"""Config-driven experiment runner.

    ftz <command> --config <path> [--out <dir>]

Commands: transform, toeplitz, decompose, bounds, schatten, carleson, selftest.
Each writes ``<command>.json`` (inputs, results, assertions) plus CSV tables
into the output directory.  Exit status: 0 when every assertion passes, 1 on
an assertion failure, 2 on a configuration error, 3 on an I/O error.
``FTZ_THREADS`` caps the worker pool.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import jsonschema
import numpy as np

from . import bounds, decomp, fock, formats, partition
from . import field as fld
from .symbols import SymbolSpec, sample_symbol

log = logging.getLogger("focktoeplitz")

COMMANDS = ("transform", "toeplitz", "decompose", "bounds", "schatten", "carleson", "selftest")

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

_SYMBOL_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "gaussian", "modulated_gaussian", "plane_wave",
                          "radial_polynomial_gaussian", "grid_file"]},
        "c": {"type": "number", "exclusiveMinimum": 0},
        "frequency": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "degree": {"type": "integer", "minimum": 0},
        "amplitude": {"oneOf": [{"type": "number"},
                                {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]},
        "path": {"type": "string"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "grid": {"type": "object",
                 "properties": {"extent": {"type": "number", "exclusiveMinimum": 0},
                                "points": {"type": "integer", "minimum": 8}},
                 "additionalProperties": False},
        "basis": {"type": "object",
                  "properties": {"dimension": {"type": "integer", "minimum": 1}},
                  "additionalProperties": False},
        "symbol": _SYMBOL_SCHEMA,
        "lattice_radius": {"type": "integer", "minimum": 0},
        "heat_t": {"type": "number", "exclusiveMinimum": 0},
        "schatten_p": {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1},
        "quadrature": {"type": "object",
                       "properties": {"scheme": {"enum": ["gauss_hermite"]},
                                      "order": {"type": ["integer", "null"], "minimum": 1}},
                       "additionalProperties": False},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "outputs": {"type": "object",
                    "properties": {"matrix": {"type": "string"}, "symbol_csv": {"type": "string"}},
                    "additionalProperties": False},
    },
    "additionalProperties": False,
}

DEFAULT_TOLERANCES = {
    "round_trip": 1e-12,
    "semigroup": 1e-9,
    "berezin": 1e-5,
    "self_adjoint": 1e-12,
    "decomposition": 1e-3,
    "carleson_low": 0.1,
    "carleson_high": 10.0,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    alpha: float = 1.0
    extent: float = 16.0
    points: int = 256
    dimension: int = 40
    symbol: SymbolSpec = dc_field(default_factory=lambda: SymbolSpec("gaussian", c=1.0))
    lattice_radius: int = 3
    heat_t: float = 0.25
    schatten_p: list = dc_field(default_factory=lambda: [1.0, 2.0, 4.0])
    quad_order: int | None = None
    tolerances: dict = dc_field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    matrix_path: str | None = None
    symbol_csv_path: str | None = None
    raw: dict = dc_field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "ExperimentConfig":
        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config {where}: {exc.message}") from None
        grid = d.get("grid", {})
        tol = dict(DEFAULT_TOLERANCES)
        unknown = set(d.get("tolerances", {})) - set(tol)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        tol.update(d.get("tolerances", {}))
        sym = dict(d.get("symbol", {"kind": "gaussian", "c": 1.0}))
        if sym.get("kind") == "grid_file" and base is not None and "path" in sym:
            sym["path"] = str((base / sym["path"]).resolve()) if not Path(sym["path"]).is_absolute() else sym["path"]
        try:
            spec = SymbolSpec.from_dict(sym)
            cfg = cls(alpha=float(d.get("alpha", 1.0)),
                      extent=float(grid.get("extent", 16.0)),
                      points=int(grid.get("points", 256)),
                      dimension=int(d.get("basis", {}).get("dimension", 40)),
                      symbol=spec,
                      lattice_radius=int(d.get("lattice_radius", 3)),
                      heat_t=float(d.get("heat_t", 0.25)),
                      schatten_p=[float(p) for p in d.get("schatten_p", [1, 2, 4])],
                      quad_order=d.get("quadrature", {}).get("order"),
                      tolerances=tol,
                      matrix_path=d.get("outputs", {}).get("matrix"),
                      symbol_csv_path=d.get("outputs", {}).get("symbol_csv"),
                      raw=d)
            cfg.grid  # validates extent/points
            fock.FockBasis(cfg.alpha, cfg.dimension)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    @property
    def grid(self) -> fld.Grid:
        return fld.make_grid(self.extent, self.points)

    @property
    def basis(self) -> fock.FockBasis:
        return fock.FockBasis(self.alpha, self.dimension)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(data, Path(path).parent)


# ---------------------------------------------------------------------------
# reports

@dataclass
class Report:
    command: str
    config: dict
    results: dict = dc_field(default_factory=dict)
    assertions: list = dc_field(default_factory=list)
    tables: dict = dc_field(default_factory=dict)

    def check(self, name: str, anchor: str, passed: bool, value=None, tolerance=None):
        self.assertions.append({"name": name, "anchor": anchor, "passed": bool(passed),
                                "value": _jsonable(value), "tolerance": tolerance})

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def write(self, out: Path):
        out.mkdir(parents=True, exist_ok=True)
        payload = {"command": self.command, "config": self.config, "results": _jsonable(self.results),
                   "assertions": self.assertions, "passed": self.passed}
        (out / f"{self.command}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        for name, (header, rows) in self.tables.items():
            with open(out / f"{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                for row in rows:
                    w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else "nan" if math.isnan(v) else "-inf")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def thread_count() -> int:
    raw = os.environ.get("FTZ_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FTZ_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"FTZ_THREADS must be a positive integer, got {raw!r}")
    return n


def _sample_points(basis: fock.FockBasis, radius: float = 2.0, step: float = 0.5) -> list[complex]:
    ax = np.arange(-radius, radius + 0.5 * step, step)
    pts = [complex(a, b) for a in ax for b in ax if abs(complex(a, b)) <= radius + 1e-12]
    limit = basis.kernel_radius()
    return [z for z in pts if abs(z) <= limit]


# ---------------------------------------------------------------------------
# commands

def run_transform(cfg: ExperimentConfig, rep: Report):
    grid, tol = cfg.grid, cfg.tolerances
    f = sample_symbol(cfg.symbol, grid)
    back = fld.fourier(fld.fourier(f, "forward"), "inverse")
    scale = max(f.sup(), 1e-300)
    rt = float(np.abs(back.samples - f.samples).max() / scale)
    t = cfg.heat_t
    two = fld.heat_transform(fld.heat_transform(f, t), t)
    one = fld.heat_transform(f, 2 * t)
    semi = float(np.abs(two.samples - one.samples).max() / scale)
    heat = fld.heat_transform(f, t)
    rep.results.update({"round_trip_error": rt, "semigroup_error": semi, "sup": f.sup(),
                        "heat_sup": heat.sup(), "l1": fld.field_norm(f, "Lp", 1.0), "heat_t": t})
    rep.check("fourier round trip", "fourier-transform", rt <= tol["round_trip"], rt, tol["round_trip"])
    rep.check("heat semigroup", "heat-transform", semi <= tol["semigroup"], semi, tol["semigroup"])
    axis = grid.axis()
    stride = max(1, grid.points // 32)
    rows = [(axis[i], float(heat.samples[i, grid.points // 2].real), float(heat.samples[i, grid.points // 2].imag))
            for i in range(0, grid.points, stride)]
    rep.tables["transform_profile"] = (("re_z", "heat_re", "heat_im"), rows)
    if cfg.symbol_csv_path:
        formats.export_symbol_csv(f, Path(cfg.symbol_csv_path))


def run_toeplitz(cfg: ExperimentConfig, rep: Report):
    basis, grid, tol = cfg.basis, cfg.grid, cfg.tolerances
    g = cfg.symbol
    T = fock.toeplitz_matrix(g if g.is_analytic else sample_symbol(g, grid), basis)
    heat = fld.heat_transform(sample_symbol(g, grid), 1.0 / cfg.alpha)
    rows, worst = [], 0.0
    for z in _sample_points(basis):
        b = fock.berezin(T, z)
        if g.is_analytic:
            ref = complex(bounds.two_variable_berezin(g, z, z, cfg.alpha))
        else:
            ref = complex(fld.interpolate(heat, [z.real], [z.imag])[0, 0])
        err = abs(b - ref)
        worst = max(worst, err)
        rows.append((z.real, z.imag, b.real, b.imag, ref.real, ref.imag, err))
    rep.tables["berezin"] = (("re_z", "im_z", "berezin_re", "berezin_im", "heat_re", "heat_im", "error"), rows)
    rep.check("berezin identity", "berezin-heat-identity", worst <= tol["berezin"], worst, tol["berezin"])
    sa = None
    if _is_real(g, grid):
        sa = float(np.abs(T.entries - T.H.entries).max())
        rep.check("self-adjoint for real symbol", "toeplitz-definition", sa <= tol["self_adjoint"], sa,
                  tol["self_adjoint"])
    norm, s1 = fock.operator_norm(T), fock.schatten_norm(T, 1.0)
    rep.results.update({"dimension": basis.dimension, "operator_norm": norm, "trace_norm": s1,
                        "berezin_max_error": worst, "self_adjoint_error": sa})
    rep.check("operator norm below trace norm", "schatten-class", norm <= s1 * (1 + 1e-12), norm / s1 if s1 else 0)
    if cfg.matrix_path:
        path = Path(cfg.matrix_path)
        formats.save_matrix(T, path)
        same = np.array_equal(formats.load_matrix(path, basis.dimension).entries, T.entries)
        rep.results["matrix_path"] = str(path)
        rep.check("matrix cache round trip", "matrix-cache", same, same)


def _is_real(g: SymbolSpec, grid: fld.Grid) -> bool:
    if g.is_analytic:
        return g.modulation == (0.0, 0.0) and g.amplitude.imag == 0
    return not np.any(sample_symbol(g, grid).samples.imag)


def run_decompose(cfg: ExperimentConfig, rep: Report, workers: int = 1):
    g = cfg.symbol if cfg.symbol.is_analytic else sample_symbol(cfg.symbol, cfg.grid)
    res = decomp.decompose(g, cfg.alpha, cfg.lattice_radius, cfg.basis, cfg.grid, workers=workers)
    rep.results.update(res.as_dict())
    rep.results["nonzero_pieces"] = sum(p.norm > 1e-12 for p in res.pieces)
    rep.tables["residuals"] = (("r", "residual"), list(enumerate(res.residuals)))
    rep.tables["pieces"] = (("x1", "x2", "sup", "norm", "tail_weight"),
                            [(p.index[0], p.index[1], p.sup, p.norm, p.tail_weight) for p in res.pieces])
    tol = 1e-8 if cfg.symbol.kind == "constant" else cfg.tolerances["decomposition"]
    rep.check("final residual", "decomposition-theorem", res.residuals[-1] <= tol, res.residuals[-1], tol)
    rep.check("residuals non-increasing", "decomposition-theorem", res.monotone, res.residuals)


def run_bounds(cfg: ExperimentConfig, rep: Report):
    g, basis, grid, alpha = cfg.symbol, cfg.basis, cfg.grid, cfg.alpha
    T = fock.toeplitz_matrix(g if g.is_analytic else sample_symbol(g, grid), basis)
    measured = fock.operator_norm(T)
    rows = []
    if g.is_analytic:
        sb = bounds.schur_bound(g, alpha)
        rows.append(("schur", sb, measured, measured / sb if sb else math.inf))
        rep.check("norm below schur bound", "schur-test", measured <= sb * (1 + 1e-9), measured / sb if sb else None)
    mb = bounds.main_bound(g, alpha, grid)
    rows.append(("main", mb, measured, measured / mb if mb else math.inf))
    if 0 < cfg.heat_t < 1.0 / (2 * alpha):
        chain = bounds.bound_chain_report(g, alpha, cfg.heat_t, grid)
        rep.results["chain"] = chain.extras["chain"]
        rep.results["chain_ratios"] = chain.extras["ratios"]
        rows.append(("chain_jet_sup", chain.extras["chain"][1], None, None))
        rows.append(("chain_heat_sup", chain.extras["chain"][2], None, None))
    rep.results.update({"measured_norm": measured, "main_bound": mb})
    rep.tables["bounds"] = (("bound_name", "bound_value", "measured", "ratio"), rows)
    rep.check("bounds finite", "decomposition-theorem", all(math.isfinite(r[1]) for r in rows))


def run_schatten(cfg: ExperimentConfig, rep: Report):
    g, basis, grid, alpha = cfg.symbol, cfg.basis, cfg.grid, cfg.alpha
    T = fock.toeplitz_matrix(g if g.is_analytic else sample_symbol(g, grid), basis)
    norm = fock.operator_norm(T)
    rows = []
    for p in cfg.schatten_p:
        sp = fock.schatten_norm(T, p)
        plain = bounds.schatten_symbol_bound(g, p, grid, "plain", alpha)
        deriv = bounds.schatten_symbol_bound(g, p, grid, "derivative", alpha)
        for name, value in (("plain", plain), ("derivative", deriv)):
            ratio = sp / value if math.isfinite(value) and value > 0 else None
            rows.append((name, p, value, sp, ratio, not math.isfinite(value)))
        rep.check(f"operator norm below S_{p:g}", "schatten-class", norm <= sp * (1 + 1e-12), sp)
    rep.tables["schatten"] = (("bound_name", "p", "bound_value", "measured", "ratio", "divergent"), rows)
    rep.results.update({"operator_norm": norm, "rows": [list(r) for r in rows]})


def run_carleson(cfg: ExperimentConfig, rep: Report):
    f = sample_symbol(cfg.symbol, cfg.grid).abs()
    ball = bounds.carleson(f, "ball", r=1.0)
    heat = bounds.carleson(f, "heat", alpha=cfg.alpha)
    ratio = ball / heat if heat else math.inf
    tol = cfg.tolerances
    rep.results.update({"ball": ball, "heat": heat, "ratio": ratio})
    rep.tables["carleson"] = (("quantity", "value"), [("ball_r1", ball), ("heat", heat), ("ratio", ratio)])
    rep.check("ball/heat comparable", "carleson-equivalence", tol["carleson_low"] <= ratio <= tol["carleson_high"],
              ratio, [tol["carleson_low"], tol["carleson_high"]])


def _trivial_examples():
    """Yield ``(name, anchor, thunk)`` for the closed-form examples of every module."""
    g16 = fld.make_grid(16, 256)
    one = sample_symbol(SymbolSpec("constant"), g16)
    gauss = sample_symbol(SymbolSpec("gaussian", c=1.0), g16)
    b10 = fock.FockBasis(1.0, 10)
    I10 = fock.identity(b10)
    rng = np.random.default_rng(0)
    A10 = fock.OperatorMatrix(b10, rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10)))
    x, y = g16.coordinates()

    def grid_spacing():
        return g16.spacing == 0.0625 and g16.frequency_spacing == 0.0625

    def forward_mass():
        return abs(fld.fourier(fld.heat_kernel(g16, 0.5)).value_at((0, 0)) - 1) <= 1e-10

    def delta_convolution():
        d = np.zeros((256, 256))
        d[128, 128] = 1 / g16.spacing ** 2
        return np.abs(fld.convolve(gauss, fld.ScalarField(g16, d)).samples - gauss.samples).max() <= 1e-12

    def sine_derivative():
        f = fld.ScalarField(g16, np.sin(2 * math.pi * x))
        return np.abs(fld.spectral_derivative(f, 1, 0).samples - 2 * math.pi * np.cos(2 * math.pi * x)).max() <= 1e-8

    def translate_peak():
        out = fld.translate_modulate(fld.heat_kernel(g16, 1.0), (1, 0))
        i, j = np.unravel_index(np.argmax(np.abs(out.samples)), out.samples.shape)
        return (x[i, j], y[i, j]) == (1.0, 0.0)

    def kernel_norm():
        z = math.sqrt(0.5 * 40 / 1.0) * 0.5 * (1 + 1j) / math.sqrt(2)
        return abs(np.sum(np.abs(fock.kernel_coefficients(z, fock.FockBasis(1.0, 40))) ** 2) - 1) <= 1e-12

    def kernel_inner():
        z, w = 0.3 + 0.2j, -0.1 + 0.4j
        return (abs(abs(fock.berezin(I10, z, w)) - math.exp(-abs(z - w) ** 2 / 2)) <= 1e-12
                and abs(fock.berezin(I10, z) - 1) <= 1e-12)

    def windows_sum():
        u, v = g16.frequencies()
        inner = np.maximum(np.abs(u), np.abs(v)) <= 2.5
        return np.abs(partition.window_sum(g16, 3)[inner] - 1).max() <= 1e-12

    def window_equivariance():
        w0 = partition.window((0, 0), g16).field.samples
        w1 = partition.window((1, 1), g16).field.samples
        k = int(round(g16.extent))
        return np.array_equal(np.roll(w0, (k, k), axis=(0, 1)), w1)

    def multiplier_support():
        win = partition.window((1, 0), g16)
        m = partition.frequency_multiplier((1, 0), 0.5, g16)
        u, v = g16.frequencies()
        return not np.any(m.samples[~win.contains(u, v)]) and m.value_at((0, 0)) == 0

    def piece_support():
        spec = partition.piece_spectrum(sample_symbol(SymbolSpec("gaussian", c=1.0), g16), (1, 0), 1.0)
        u, v = g16.frequencies()
        outside = ~partition.window((1, 0), g16).contains(-u, -v)
        return not np.any(spec[outside])

    def decompose_constant():
        rep = decomp.decompose(SymbolSpec("constant"), 1.0, 1, fock.FockBasis(1.0, 8), g16)
        nonzero = [p.index for p in rep.pieces if p.norm > 1e-10]
        return nonzero == [(0, 0)] and rep.residuals[0] <= 1e-8

    def weyl_at_origin():
        r = decomp.weyl_conjugation_residual(SymbolSpec("gaussian", c=1.0), (0, 0), 1.0,
                                             fock.FockBasis(1.0, 16), g16)
        return 0 <= r <= 1e-10

    def chain_of_constant():
        rep = bounds.bound_chain_report(SymbolSpec("constant"), 1.0, 0.25, g16)
        return np.allclose(rep.extras["chain"], 1, atol=1e-10) and np.allclose(rep.extras["ratios"], 1, atol=1e-10)

    def identity_kernel_schatten():
        return math.isinf(bounds.kernel_schatten_bound(fock.identity(fock.FockBasis(1.0, 60)), 2, 2, 0.5, 2, 0.5))

    def kernel_schatten_homogeneous():
        T = fock.toeplitz_matrix(SymbolSpec("gaussian", c=1.0), fock.FockBasis(1.0, 200))
        a = bounds.kernel_schatten_bound(T, 2, 7, 0.5, 7, 0.5)
        b = bounds.kernel_schatten_bound(T * 3.0, 2, 7, 0.5, 7, 0.5)
        return math.isfinite(a) and abs(b - 3 * a) <= 1e-10 * b

    def product_with_constant():
        g = SymbolSpec("gaussian", c=1.0)
        lhs = bounds.product_schatten_bound(SymbolSpec("constant"), g, 2, 1.0, g16)
        rhs = bounds.product_reduction_factor(2, 1.0) * bounds.schatten_symbol_bound(g, 2, g16, "derivative")
        return abs(lhs - rhs) <= 1e-8 * rhs

    def cache_round_trip():
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            A = fock.identity(fock.FockBasis(math.pi / 3, 4))
            path = Path(tmp) / "id.ftlz"
            formats.save_matrix(A, path)
            B = formats.load_matrix(path)
            ok = B.entries.tobytes() == A.entries.tobytes() and B.basis.alpha == A.basis.alpha
            path.write_bytes(path.read_bytes()[:-1])
            return ok and _raises(lambda: formats.load_matrix(path))

    def csv_round_trip():
        import tempfile

        g8 = fld.make_grid(8, 8)
        f = sample_symbol(SymbolSpec("gaussian", c=1.0), g8)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "g.csv"
            formats.export_symbol_csv(f, path)
            ok = np.array_equal(formats.ingest_symbol_csv(path, g8).samples, f.samples)
            path.write_text("# extent=8 points=8\n" + "1,0\n" * 64)
            ok = ok and np.all(formats.ingest_symbol_csv(path, g8).samples == 1)
            return ok and _raises(lambda: formats.ingest_symbol_csv(path, fld.make_grid(16, 8)))

    diag = fock.OperatorMatrix(b10, np.diag(0.5 ** np.arange(1, 11)))
    return [
        ("grid (16, 256)", "grid", grid_spacing),
        ("grid (8, 8)", "grid", lambda: fld.make_grid(8, 8).spacing == 1.0),
        ("grid rejects 100 points", "grid", lambda: _raises(lambda: fld.make_grid(16, 100))),
        ("constant samples", "symbols", lambda: bool(np.all(one.samples == 1))),
        ("gaussian at origin", "symbols", lambda: gauss.value_at(0) == 1.0),
        ("plane wave node", "symbols",
         lambda: abs(sample_symbol(SymbolSpec("plane_wave", frequency=(1, 0)), g16).value_at((0.25, 0)) - 1j)
         <= 1e-12),
        ("fourier round trip", "fourier-transform",
         lambda: np.abs(fld.fourier(fld.fourier(gauss), "inverse").samples - gauss.samples).max() <= 1e-12),
        ("heat kernel has unit mass", "fourier-transform", forward_mass),
        ("convolution with a delta", "convolution", delta_convolution),
        ("constant convolved with heat kernel", "convolution",
         lambda: np.abs(fld.convolve(one, fld.heat_kernel(g16, 0.5)).samples - 1).max() <= 1e-8),
        ("heat transform fixes constants", "heat-transform",
         lambda: np.abs(fld.heat_transform(one, 0.7).samples - 1).max() <= 1e-10),
        ("zeroth derivative", "derivatives",
         lambda: np.array_equal(fld.spectral_derivative(gauss, 0, 0).samples, gauss.samples)),
        ("derivative of a sine", "derivatives", sine_derivative),
        ("trivial translation", "translation",
         lambda: np.array_equal(fld.translate_modulate(gauss).samples, gauss.samples)),
        ("translation moves the peak", "translation", translate_peak),
        ("modulation of the constant", "translation",
         lambda: np.abs(fld.translate_modulate(one, (0, 0), (1, 0)).samples
                        - np.exp(2j * math.pi * x)).max() <= 1e-12),
        ("L1 norm of the constant", "norms", lambda: abs(fld.field_norm(one, "Lp", 1) - 256) <= 1e-10),
        ("sup of the gaussian", "norms", lambda: gauss.sup() == 1.0),
        ("normalized kernel at 0", "reproducing-kernel",
         lambda: np.array_equal(fock.kernel_coefficients(0, b10), np.eye(10)[0])),
        ("normalized kernel has unit norm", "reproducing-kernel", kernel_norm),
        ("toeplitz of the constant", "toeplitz-definition",
         lambda: np.abs(fock.toeplitz_matrix(SymbolSpec("constant"), b10).entries - np.eye(10)).max() <= 1e-12),
        ("displacement at 0", "weyl-operator",
         lambda: np.abs(fock.displacement_matrix(0, b10).entries - np.eye(10)).max() <= 1e-12),
        ("double adjoint", "matrix-algebra", lambda: np.array_equal(A10.H.H.entries, A10.entries)),
        ("identity times A", "matrix-algebra",
         lambda: np.array_equal(fock.matrix_algebra("multiply", I10, A10).entries, A10.entries)),
        ("operator norm of identity", "operator-norm", lambda: abs(fock.operator_norm(I10) - 1) <= 1e-12),
        ("operator norm of a diagonal", "operator-norm", lambda: abs(fock.operator_norm(diag) - 0.5) <= 1e-10),
        ("trace norm of identity", "schatten-class", lambda: abs(fock.schatten_norm(I10, 1) - 10) <= 1e-10),
        ("S2 is Frobenius", "schatten-class",
         lambda: abs(fock.schatten_norm(A10, 2) - np.linalg.norm(A10.entries)) <= 1e-10),
        ("berezin of identity", "berezin-heat-identity", kernel_inner),
        ("smooth step values", "partition-of-unity",
         lambda: partition.smooth_step(-1) == 0 and partition.smooth_step(0.5) == 0.5
         and partition.smooth_step(2) == 1),
        ("bump values", "partition-of-unity",
         lambda: partition.bump((0, 0)) == 1 and partition.bump((1.2, 0)) == 0),
        ("window is 1 at its own node", "partition-of-unity",
         lambda: partition.window((0, 0), g16).field.value_at((0, 0)) == 1),
        ("windows sum to one", "partition-of-unity", windows_sum),
        ("window translation", "partition-of-unity", window_equivariance),
        ("multiplier at the origin", "partition-of-unity",
         lambda: partition.frequency_multiplier((0, 0), 0.5, g16).value_at((0, 0)) == 1),
        ("multiplier support", "partition-of-unity", multiplier_support),
        ("pieces of the constant", "decomposition-theorem",
         lambda: np.abs(partition.symbol_piece(one, (0, 0), 1.0).samples - 1).max() <= 1e-10
         and np.abs(partition.symbol_piece(one, (1, 0), 1.0).samples).max() <= 1e-10),
        ("piece spectral support", "decomposition-theorem", piece_support),
        ("decomposition of the constant", "decomposition-theorem", decompose_constant),
        ("tail weight of the constant at 0", "tail-decay",
         lambda: abs(decomp.piece_tail_estimate(SymbolSpec("constant"), (0, 0), 1.0, g16) - 1) <= 1e-12),
        ("tail weight of the constant at (1,1)", "tail-decay",
         lambda: abs(decomp.piece_tail_estimate(SymbolSpec("constant"), (1, 1), 1.0, g16) - 1 / 27) <= 1e-12),
        ("weyl conjugation at 0", "weyl-conjugation", weyl_at_origin),
        ("heat carleson of the constant", "carleson-equivalence",
         lambda: abs(bounds.carleson(one, "heat") - 1) <= 1e-10),
        ("main bound of the constant", "decomposition-theorem",
         lambda: abs(bounds.main_bound(SymbolSpec("constant"), 1.0, g16) - 1) <= 1e-10),
        ("bound chain of the constant", "bound-chain", chain_of_constant),
        ("derivative schatten bound of the constant", "schatten-class",
         lambda: math.isinf(bounds.schatten_symbol_bound(SymbolSpec("constant"), 2, g16, "derivative"))),
        ("kernel schatten bound of identity", "kernel-schatten", identity_kernel_schatten),
        ("kernel schatten bound is homogeneous", "kernel-schatten", kernel_schatten_homogeneous),
        ("product bound with f = 1", "product-schatten", product_with_constant),
        ("matrix cache", "matrix-cache", cache_round_trip),
        ("symbol csv", "symbol-ingest", csv_round_trip),
    ]


def selftest_checks() -> list[tuple[str, str, bool]]:
    """Run the closed-form examples; an exception counts as a failure."""
    out = []
    for name, anchor, thunk in _trivial_examples():
        try:
            ok = bool(thunk())
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            log.warning("selftest %s raised %s", name, exc)
            ok = False
        out.append((name, anchor, ok))
    return out


def _raises(fn) -> bool:
    try:
        fn()
    except ValueError:
        return True
    return False


def run_selftest(cfg: ExperimentConfig, rep: Report):
    for name, anchor, ok in selftest_checks():
        rep.check(name, anchor, ok)
    rep.results["checks"] = len(rep.assertions)
    rep.tables["selftest"] = (("name", "anchor", "passed"),
                              [(a["name"], a["anchor"], a["passed"]) for a in rep.assertions])


def run(command: str, cfg: ExperimentConfig, out: Path, workers: int = 1) -> Report:
    rep = Report(command, _jsonable(cfg.raw))
    if command == "transform":
        run_transform(cfg, rep)
    elif command == "toeplitz":
        run_toeplitz(cfg, rep)
    elif command == "decompose":
        run_decompose(cfg, rep, workers)
    elif command == "bounds":
        run_bounds(cfg, rep)
    elif command == "schatten":
        run_schatten(cfg, rep)
    elif command == "carleson":
        run_carleson(cfg, rep)
    elif command == "selftest":
        run_selftest(cfg, rep)
    else:
        raise ConfigError(f"unknown command {command!r}")
    return rep


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftz", description="Truncated Fock-space Toeplitz experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=False, help="JSON experiment config (optional for selftest)")
    p.add_argument("--out", default=".", help="output directory for reports (default: current directory)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        workers = thread_count()
        if args.config is None:
            if args.command != "selftest":
                raise ConfigError("--config is required")
            cfg = ExperimentConfig()
        else:
            cfg = load_config(args.config)
        rep = run(args.command, cfg, Path(args.out), workers)
    except (ConfigError, formats.FormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        rep.write(Path(args.out))
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for a in rep.assertions:
        if not a["passed"]:
            print(f"FAIL {a['name']} [{a['anchor']}] value={a['value']}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
