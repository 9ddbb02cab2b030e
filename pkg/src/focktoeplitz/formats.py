"""On-disk formats: the binary matrix cache and the symbol CSV."""
from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .field import Grid, ScalarField

MAGIC = b"FTLZ1"
_HEADER = struct.Struct("<Id")


class FormatError(ValueError):
    """A cache or symbol file does not match its declared format."""


def save_matrix(A, path) -> None:
    """Write an :class:`~focktoeplitz.fock.OperatorMatrix` in the FTLZ1 layout.

    Layout: magic ``FTLZ1``, little-endian ``uint32`` N, ``float64`` alpha,
    then ``N*N`` complex entries as interleaved ``float64`` (re, im), row-major.
    """
    entries = np.ascontiguousarray(A.entries, dtype="<c16")
    n = entries.shape[0]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(n, float(A.basis.alpha)))
        fh.write(entries.tobytes(order="C"))


def load_matrix(path, expected_dimension: int | None = None):
    from .fock import FockBasis, OperatorMatrix

    data = Path(path).read_bytes()
    if data[:5] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:5]!r}")
    if len(data) < 5 + _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    n, alpha = _HEADER.unpack_from(data, 5)
    expected = 5 + _HEADER.size + 16 * n * n
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for N={n}, found {len(data)}")
    if expected_dimension is not None and n != expected_dimension:
        raise FormatError(f"{path}: dimension {n} does not match expected {expected_dimension}")
    entries = np.frombuffer(data, dtype="<c16", offset=5 + _HEADER.size).reshape(n, n)
    return OperatorMatrix(FockBasis(alpha, n), entries.astype(complex))


def _header_line(grid: Grid) -> str:
    return f"# extent={grid.extent!r} points={grid.points}"


def export_symbol_csv(f: ScalarField, path) -> None:
    """Write a space field in the ingestion format (17 significant digits)."""
    lines = [_header_line(f.grid)]
    for v in f.samples.ravel(order="C"):
        lines.append(f"{v.real:.17g},{v.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def ingest_symbol_csv(path, grid: Grid) -> ScalarField:
    """Read ``# extent=<L> points=<M>`` followed by ``M*M`` lines ``re,im``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise FormatError(f"{path}: missing '# extent=... points=...' header")
    header = dict(tok.split("=", 1) for tok in lines[0][1:].split() if "=" in tok)
    try:
        extent, points = float(header["extent"]), int(header["points"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: malformed header {lines[0]!r}") from exc
    if not math.isclose(extent, grid.extent, rel_tol=1e-12) or points != grid.points:
        raise FormatError(f"{path}: header extent={extent} points={points} does not match grid "
                          f"extent={grid.extent} points={grid.points}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != points * points:
        raise FormatError(f"{path}: expected {points * points} value lines, found {len(body)}")
    values = np.empty(points * points, dtype=complex)
    for n, ln in enumerate(body):
        try:
            re, im = ln.split(",")
            values[n] = complex(float(re), float(im))
        except ValueError as exc:
            raise FormatError(f"{path}: line {n + 2} is not 're,im': {ln!r}") from exc
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: non-finite value")
    return ScalarField(grid, values.reshape(points, points))
