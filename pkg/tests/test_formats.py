import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from focktoeplitz.field import ScalarField, make_grid
from focktoeplitz.fock import FockBasis, OperatorMatrix, identity
from focktoeplitz.formats import FormatError, export_symbol_csv, ingest_symbol_csv, load_matrix, save_matrix
from focktoeplitz.symbols import gaussian, sample_symbol


def test_identity_round_trip(tmp_path):
    A = identity(FockBasis(1.0, 4))
    save_matrix(A, tmp_path / "a.ftlz")
    B = load_matrix(tmp_path / "a.ftlz")
    assert B.entries.tobytes() == A.entries.tobytes()


def test_byte_layout(tmp_path):
    A = identity(FockBasis(2.5, 3))
    path = tmp_path / "a.ftlz"
    save_matrix(A, path)
    data = path.read_bytes()
    assert len(data) == 5 + 4 + 8 + 16 * 9
    assert data[:5] == b"FTLZ1"
    assert struct.unpack_from("<Id", data, 5) == (3, 2.5)
    assert struct.unpack_from("<dd", data, 17) == (1.0, 0.0)


def test_alpha_bits_preserved(tmp_path):
    alpha = math.pi / 7
    save_matrix(identity(FockBasis(alpha, 2)), tmp_path / "a.ftlz")
    got = load_matrix(tmp_path / "a.ftlz").basis.alpha
    assert struct.pack("<d", got) == struct.pack("<d", alpha)


def test_truncated(tmp_path):
    path = tmp_path / "a.ftlz"
    save_matrix(identity(FockBasis(1.0, 4)), path)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(FormatError):
        load_matrix(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "a.ftlz"
    save_matrix(identity(FockBasis(1.0, 2)), path)
    path.write_bytes(b"XXXXX" + path.read_bytes()[5:])
    with pytest.raises(FormatError):
        load_matrix(path)


def test_dimension_mismatch(tmp_path):
    path = tmp_path / "a.ftlz"
    save_matrix(identity(FockBasis(1.0, 2)), path)
    with pytest.raises(FormatError):
        load_matrix(path, expected_dimension=3)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 12), st.floats(0.01, 100), st.integers(0, 2**32 - 1))
def test_random_round_trip(n, alpha, seed):
    import tempfile
    from pathlib import Path

    r = np.random.default_rng(seed)
    A = OperatorMatrix(FockBasis(alpha, n), r.standard_normal((n, n)) + 1j * r.standard_normal((n, n)))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "m.ftlz"
        save_matrix(A, path)
        B = load_matrix(path, n)
    assert B.entries.tobytes() == A.entries.tobytes() and B.basis == A.basis


def test_csv_constant(tmp_path):
    grid = make_grid(8, 8)
    path = tmp_path / "c.csv"
    path.write_text("# extent=8 points=8\n" + "1,0\n" * 64)
    assert np.all(ingest_symbol_csv(path, grid).samples == 1)


def test_csv_header_mismatch(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("# extent=8 points=8\n" + "1,0\n" * 64)
    with pytest.raises(FormatError):
        ingest_symbol_csv(path, make_grid(16, 8))


@pytest.mark.parametrize("body", ["1,0\n" * 63, "1,0\n" * 63 + "nan,0\n", "1,0\n" * 63 + "x,y\n",
                                  "1,0\n" * 63 + "1\n"])
def test_csv_bad_body(tmp_path, body):
    path = tmp_path / "c.csv"
    path.write_text("# extent=8 points=8\n" + body)
    with pytest.raises(FormatError):
        ingest_symbol_csv(path, make_grid(8, 8))


def test_csv_missing_header(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("1,0\n" * 64)
    with pytest.raises(FormatError):
        ingest_symbol_csv(path, make_grid(8, 8))


def test_csv_lossless(tmp_path):
    grid = make_grid(16, 64)
    x, _ = grid.coordinates()
    f = sample_symbol(gaussian(1.0), grid) * np.exp(1j * x / 3)
    export_symbol_csv(f, tmp_path / "g.csv")
    g = ingest_symbol_csv(tmp_path / "g.csv", grid)
    assert np.abs(g.samples - f.samples).max() == 0
    assert isinstance(g, ScalarField)
