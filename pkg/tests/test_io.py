import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dsylv.io import (
    MAGIC,
    read_binary,
    read_factored,
    read_matrix_market,
    write_binary,
    write_factored,
    write_matrix_market,
)
from dsylv.linalg_core import FactoredMatrix

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=30, deadline=None)
@given(re=arrays(np.float64, st.tuples(st.integers(0, 6), st.integers(0, 6)), elements=finite))
def test_binary_round_trip(tmp_path_factory, re):
    M = re + 1j * re[::-1]
    path = tmp_path_factory.mktemp("bin") / "m.bin"
    write_binary(path, M)
    back = read_binary(path)
    assert back.shape == M.shape and np.array_equal(back, M)


def test_binary_layout(tmp_path):
    M = np.array([[1 + 2j, 3.0], [4.0, 5j], [6.0, 7.0]])
    path = tmp_path / "m.bin"
    write_binary(path, M)
    raw = path.read_bytes()
    assert raw[:8] == MAGIC == b"DSYLVMAT"
    assert int.from_bytes(raw[8:16], "little") == 3 and int.from_bytes(raw[16:24], "little") == 2
    body = np.frombuffer(raw[24:], dtype="<c16")
    assert np.array_equal(body, M.reshape(-1))


def test_binary_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTAMATX" + bytes(16))
    with pytest.raises(ValueError):
        read_binary(path)


def test_binary_truncated(tmp_path):
    path = tmp_path / "t.bin"
    write_binary(path, np.ones((2, 2)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_binary(path)


def test_factored_round_trip(tmp_path, rng):
    F = FactoredMatrix(rng.standard_normal((5, 2)) + 0j, rng.standard_normal((4, 2)) + 1j)
    write_factored(tmp_path / "x", F)
    G = read_factored(tmp_path / "x")
    assert np.array_equal(F.F1, G.F1) and np.array_equal(F.F2, G.F2)


def test_matrix_market_sparse(tmp_path):
    M = sp.csr_matrix(np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]))
    path = tmp_path / "a.mtx"
    write_matrix_market(path, M)
    back = read_matrix_market(path)
    assert sp.issparse(back) and back.dtype == np.complex128
    assert np.array_equal(back.toarray(), M.toarray())
    assert isinstance(read_matrix_market(path, dense=True), np.ndarray)


def test_matrix_market_dense_complex(tmp_path):
    M = np.array([[1 + 1j, 2.0], [0.5j, -3.0]])
    path = tmp_path / "d.mtx"
    write_matrix_market(path, M)
    assert np.array_equal(read_matrix_market(path), M)


def test_matrix_market_duplicates_summed(tmp_path):
    path = tmp_path / "dup.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.5\n1 1 2.5\n2 2 1.0\n")
    assert np.array_equal(read_matrix_market(path).toarray(), np.array([[4.0, 0.0], [0.0, 1.0]]))
