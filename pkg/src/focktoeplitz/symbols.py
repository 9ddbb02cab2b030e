"""Declarative test symbols.

Every built-in is a member of the family

    g(w) = A |w|^(2m) exp(-c |w|^2) exp(2 pi i w . x)

which keeps Toeplitz matrices, Berezin transforms and heat transforms in
closed form.  ``grid_file`` symbols are read from the CSV ingestion format.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import Grid, ScalarField, _as_pair

KINDS = ("constant", "gaussian", "modulated_gaussian", "plane_wave",
         "radial_polynomial_gaussian", "grid_file")


@dataclass(frozen=True)
class SymbolSpec:
    kind: str
    c: float = 0.0
    frequency: tuple[float, float] = (0.0, 0.0)
    degree: int = 0
    amplitude: complex = 1.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "frequency", _as_pair(self.frequency))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.kind in ("gaussian", "modulated_gaussian", "radial_polynomial_gaussian") and not self.c > 0:
            raise ValueError(f"{self.kind} needs decay rate c > 0, got {self.c}")
        if self.kind == "radial_polynomial_gaussian" and (int(self.degree) != self.degree or self.degree < 0):
            raise ValueError("degree must be a nonnegative integer")
        if self.kind == "grid_file" and not self.path:
            raise ValueError("grid_file symbol needs a path")
        if not all(math.isfinite(v) for v in self.frequency):
            raise ValueError("frequency must be finite")

    # the canonical (amplitude, m, c, x) parameters of the closed-form family
    @property
    def decay(self) -> float:
        return 0.0 if self.kind in ("constant", "plane_wave", "grid_file") else float(self.c)

    @property
    def modulation(self) -> tuple[float, float]:
        if self.kind in ("modulated_gaussian", "plane_wave"):
            return self.frequency
        return (0.0, 0.0)

    @property
    def power(self) -> int:
        return int(self.degree) if self.kind == "radial_polynomial_gaussian" else 0

    @property
    def is_analytic(self) -> bool:
        return self.kind != "grid_file"

    @property
    def is_radial(self) -> bool:
        return self.is_analytic and self.modulation == (0.0, 0.0)

    def scaled(self, factor: complex) -> "SymbolSpec":
        return SymbolSpec(self.kind, self.c, self.frequency, self.degree, self.amplitude * factor, self.path)

    def __call__(self, z):
        """Evaluate the symbol at complex points ``z``."""
        if not self.is_analytic:
            raise TypeError("grid_file symbols have no closed form; sample them on a grid")
        z = np.asarray(z, dtype=complex)
        r2 = z.real ** 2 + z.imag ** 2
        out = np.full(z.shape, self.amplitude, dtype=complex)
        if self.power:
            out = out * r2 ** self.power
        if self.decay:
            out = out * np.exp(-self.decay * r2)
        x1, x2 = self.modulation
        if x1 or x2:
            out = out * np.exp(2j * math.pi * (z.real * x1 + z.imag * x2))
        return out

    def describe(self) -> str:
        parts = [self.kind]
        if self.decay:
            parts.append(f"c={self.c:g}")
        if self.modulation != (0.0, 0.0):
            parts.append(f"x=({self.frequency[0]:g},{self.frequency[1]:g})")
        if self.power:
            parts.append(f"m={self.power}")
        if self.amplitude != 1:
            parts.append(f"A={self.amplitude:g}")
        if self.path:
            parts.append(f"path={self.path}")
        return " ".join(parts)

    @classmethod
    def from_dict(cls, d: dict) -> "SymbolSpec":
        d = dict(d)
        kind = d.pop("kind")
        if "x" in d:
            d["frequency"] = d.pop("x")
        if "lambda" in d:
            d["frequency"] = d.pop("lambda")
        if "m" in d:
            d["degree"] = d.pop("m")
        amp = d.pop("amplitude", 1.0)
        if isinstance(amp, (list, tuple)):
            amp = complex(amp[0], amp[1])
        allowed = {"c", "frequency", "degree", "path"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown symbol keys: {sorted(unknown)}")
        return cls(kind=kind, amplitude=amp, **d)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("gaussian", "modulated_gaussian", "radial_polynomial_gaussian"):
            d["c"] = self.c
        if self.kind in ("modulated_gaussian", "plane_wave"):
            d["frequency"] = list(self.frequency)
        if self.kind == "radial_polynomial_gaussian":
            d["degree"] = self.degree
        if self.amplitude != 1:
            d["amplitude"] = [self.amplitude.real, self.amplitude.imag]
        if self.path:
            d["path"] = self.path
        return d


def constant(value: complex = 1.0) -> SymbolSpec:
    return SymbolSpec("constant", amplitude=value)


def gaussian(c: float = 1.0) -> SymbolSpec:
    return SymbolSpec("gaussian", c=c)


def modulated_gaussian(frequency, c: float = 1.0) -> SymbolSpec:
    return SymbolSpec("modulated_gaussian", c=c, frequency=frequency)


def plane_wave(frequency) -> SymbolSpec:
    return SymbolSpec("plane_wave", frequency=frequency)


def radial_polynomial_gaussian(degree: int, c: float = 1.0) -> SymbolSpec:
    return SymbolSpec("radial_polynomial_gaussian", c=c, degree=degree)


def builtin_family() -> list[SymbolSpec]:
    """The standard sweep of built-in symbols used by property checks."""
    return [
        constant(),
        gaussian(1.0),
        gaussian(0.5),
        modulated_gaussian((1.0, 0.0), 1.0),
        plane_wave((1.0, 0.0)),
        radial_polynomial_gaussian(1, 1.0),
    ]


def sample_symbol(spec: SymbolSpec, grid: Grid) -> ScalarField:
    """Space-domain samples of ``spec`` on ``grid``."""
    if spec.kind == "grid_file":
        from .formats import ingest_symbol_csv

        path = Path(spec.path)
        if not path.exists():
            raise FileNotFoundError(f"symbol file {path} does not exist")
        f = ingest_symbol_csv(path, grid)
        return f * spec.amplitude if spec.amplitude != 1 else f
    values = spec(grid.nodes())
    if not np.all(np.isfinite(values)):
        raise ValueError(f"symbol {spec.describe()} is not finite on the grid")
    return ScalarField(grid, values)
