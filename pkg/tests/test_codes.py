from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from learnedbf.codes import (
    LinearCode,
    RmParams,
    build_rm,
    check_orthogonal,
    code_from_pc,
    dual_min_weight_rows_ok,
    encode,
    load_pc,
    overcomplete_pc,
    parse_code_spec,
    rm_overcomplete_pc,
    save_pc,
    syndrome,
)
from learnedbf.gf2 import BitMatrix, rank


@pytest.fixture(scope="module")
def rm25():
    return build_rm(RmParams(2, 5))


@pytest.mark.parametrize("r,m,K,M", [(2, 5, 16, 16), (3, 6, 42, 22), (4, 7, 99, 29)])
def test_rm_dimensions(r, m, K, M):
    code = build_rm(RmParams(r, m))
    assert (code.N, code.K, code.M) == (2**m, K, M)
    assert rank(code.generator) == K and rank(code.pc_matrix) == M
    assert check_orthogonal(code.generator, code.pc_matrix)


@pytest.mark.parametrize("r,m", [(0, 3), (1, 3), (1, 4), (2, 4), (3, 5), (0, 1)])
def test_rm_small_dimensions(r, m):
    code = build_rm(RmParams(r, m))
    assert code.K == sum(comb(m, i) for i in range(r + 1))
    assert code.M == code.N - code.K
    assert check_orthogonal(code.generator, code.pc_matrix)


def test_rm_min_distance_small():
    # RM(1,3) is the extended Hamming [8,4,4] code
    code = build_rm(RmParams(1, 3))
    u = ((np.arange(1, 16)[:, None] >> np.arange(4)) & 1).astype(np.uint8)
    assert encode(code, u).sum(axis=1).min() == 4


@pytest.mark.parametrize("r,m", [(-1, 3), (4, 3), (2, 9)])
def test_rm_invalid(r, m):
    with pytest.raises(ValueError):
        RmParams(r, m)


def test_overcomplete_rm25(rm25):
    H = overcomplete_pc(rm25)
    assert H.shape == (620, 32)
    assert dual_min_weight_rows_ok(rm25, H)
    assert set(H.dense.sum(axis=1).tolist()) == {8}
    assert len({r.tobytes() for r in H.dense}) == 620


def test_overcomplete_rm36():
    code = build_rm(RmParams(3, 6))
    H = overcomplete_pc(code)
    assert H.shape == (2604, 64)
    assert dual_min_weight_rows_ok(code, H)


def test_flats_equal_enumeration():
    for r, m in [(2, 5), (1, 4), (3, 6)]:
        code = build_rm(RmParams(r, m))
        assert rm_overcomplete_pc(RmParams(r, m)) == overcomplete_pc(code)


def test_rm47_overcomplete_via_flats():
    code = build_rm(RmParams(4, 7))
    with pytest.raises(ValueError, match="load_pc"):
        overcomplete_pc(code)
    H = rm_overcomplete_pc(RmParams(4, 7))
    assert H.shape == (10668, 128)
    assert dual_min_weight_rows_ok(code, H)


def test_repetition_code_overcomplete():
    H = BitMatrix.from_array([[1, 1, 0], [0, 1, 1]])
    code = code_from_pc(H)
    assert code.K == 1
    Hoc = overcomplete_pc(code)
    assert {tuple(r) for r in Hoc.dense.tolist()} == {(1, 1, 0), (0, 1, 1), (1, 0, 1)}


def test_encode_examples(rm25):
    assert not encode(rm25, np.zeros(16, np.uint8)).any()
    eye = np.eye(16, dtype=np.uint8)
    assert np.array_equal(encode(rm25, eye), rm25.generator.dense)
    with pytest.raises(ValueError):
        encode(rm25, np.zeros(15, np.uint8))


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**16 - 1))
@settings(max_examples=50, deadline=None)
def test_syndrome_decoupling(e_int, u_int):
    code = build_rm(RmParams(2, 5))
    e = ((e_int >> np.arange(32)) & 1).astype(np.uint8)
    u = ((u_int >> np.arange(16)) & 1).astype(np.uint8)
    c = encode(code, u)
    assert not syndrome(code.pc_matrix, c).any()
    assert np.array_equal(syndrome(code.pc_matrix, c ^ e), syndrome(code.pc_matrix, e))


def test_syndrome_single_error_is_column(rm25):
    H = rm25.pc_matrix
    for n in (0, 7, 31):
        e = np.zeros(32, np.uint8)
        e[n] = 1
        assert np.array_equal(syndrome(H, e), H.dense[:, n])


def test_pc_file_roundtrip(tmp_path, rm25):
    path = tmp_path / "h.txt"
    save_pc(rm25.pc_matrix, path)
    assert path.read_text().splitlines()[0] == "16 32"
    assert load_pc(path) == rm25.pc_matrix


@pytest.mark.parametrize("text", ["", "3\n1 0", "2 2\n1 0\n", "2 2\n1 0\n1 2\n", "1 2\n1 0 1\n", "x y\n"])
def test_load_pc_errors(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ValueError):
        load_pc(path)


def test_code_from_file(tmp_path, rm25):
    path = tmp_path / "rm.txt"
    save_pc(rm25.pc_matrix, path)
    code = parse_code_spec(f"file:{path}")
    assert (code.N, code.K) == (32, 16)
    assert check_orthogonal(code.generator, rm25.pc_matrix)


@pytest.mark.parametrize("spec", ["rm:2", "rm:a,b", "bch:63", "rm:5,3"])
def test_bad_code_spec(spec):
    with pytest.raises(ValueError):
        parse_code_spec(spec)


def test_linear_code_rejects_non_orthogonal():
    G = BitMatrix.from_array([[1, 1, 0]])
    H = BitMatrix.from_array([[1, 0, 0], [0, 1, 1]])
    with pytest.raises(ValueError):
        LinearCode(G, H, "bad")
