"""Reed-Muller construction, parity-check matrices, encoding and syndromes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from math import comb
from pathlib import Path

import numpy as np

from .gf2 import BitMatrix, matmul, mod2_matmul, nullspace, rank, rref, unpack_bits

MAX_ENUM_DUAL_DIM = 24


@dataclass(frozen=True)
class RmParams:
    r: int
    m: int

    def __post_init__(self):
        if not (0 <= self.r <= self.m <= 8):
            raise ValueError(f"need 0 <= r <= m <= 8, got r={self.r}, m={self.m}")

    @property
    def N(self) -> int:
        return 1 << self.m

    @property
    def K(self) -> int:
        return sum(comb(self.m, i) for i in range(self.r + 1))


@dataclass(frozen=True, eq=False)
class LinearCode:
    generator: BitMatrix
    pc_matrix: BitMatrix
    label: str = ""
    rm: RmParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.generator.cols != self.pc_matrix.cols:
            raise ValueError("generator and pc_matrix disagree on N")
        if self.pc_matrix.rows < self.N - self.K:
            raise ValueError("pc_matrix has fewer than N-K rows")
        if not check_orthogonal(self.generator, self.pc_matrix):
            raise ValueError("generator rows are not orthogonal to pc_matrix")
        if rank(self.generator) != self.generator.rows:
            raise ValueError("generator rows are linearly dependent")

    @property
    def N(self) -> int:
        return self.generator.cols

    @property
    def K(self) -> int:
        return self.generator.rows

    @property
    def M(self) -> int:
        return self.pc_matrix.rows

    @property
    def rate(self) -> float:
        return self.K / self.N

    def with_pc(self, H: BitMatrix, label: str | None = None) -> LinearCode:
        if H.cols != self.N:
            raise ValueError(f"H has {H.cols} columns, code has N={self.N}")
        return replace(self, pc_matrix=H, label=self.label if label is None else label)

    @cached_property
    def systematic(self) -> tuple[np.ndarray, list[int]]:
        """Generator in reduced echelon form and its information (pivot) positions."""
        R, _, pivots = rref(self.generator)
        return R.to_array(), pivots


def rm_monomials(r: int, m: int) -> list[tuple[int, ...]]:
    """Monomials of degree <= r in m variables, by degree then lexicographic."""
    return [s for d in range(r + 1) for s in itertools.combinations(range(m), d)]


def rm_generator(r: int, m: int) -> np.ndarray:
    n = 1 << m
    idx = np.arange(n)
    var = [((idx >> i) & 1).astype(np.uint8) for i in range(m)]
    rows = []
    for mono in rm_monomials(r, m):
        row = np.ones(n, dtype=np.uint8)
        for i in mono:
            row &= var[i]
        rows.append(row)
    return np.array(rows, dtype=np.uint8)


def build_rm(params: RmParams) -> LinearCode:
    """RM(r, m) with the standard parity-check matrix (generator of RM(m-r-1, m))."""
    r, m = params.r, params.m
    G = rm_generator(r, m)
    if r == m:
        H = np.zeros((0, 1 << m), dtype=np.uint8)
    else:
        H = rm_generator(m - r - 1, m)
    label = f"RM({params.N},{params.K})"
    return LinearCode(BitMatrix.from_array(G), BitMatrix.from_array(H), label, params)


def code_from_pc(H: BitMatrix, label: str = "") -> LinearCode:
    """Code defined by a parity-check matrix; generator is its null space."""
    return LinearCode(nullspace(H), H, label)


def _sort_rows(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def overcomplete_pc(code: LinearCode, max_dual_dim: int = MAX_ENUM_DUAL_DIM) -> BitMatrix:
    """All minimum-weight dual codewords, found by enumerating the whole dual code."""
    R, k, _ = rref(code.pc_matrix)
    if k > max_dual_dim:
        raise ValueError(
            f"dual dimension {k} exceeds {max_dual_dim}; enumerate is infeasible, "
            "use load_pc with a precomputed file (or rm_overcomplete_pc for RM codes)"
        )
    basis = R.data[:k]
    words = np.zeros((1, basis.shape[1]), dtype=basis.dtype)
    for row in basis:
        words = np.concatenate([words, words ^ row])
    weights = np.bitwise_count(words).sum(axis=1)
    weights[0] = np.iinfo(weights.dtype).max
    wmin = weights.min()
    rows = unpack_bits(words[weights == wmin], code.N)
    return BitMatrix.from_array(_sort_rows(rows))


def _subspaces(m: int, k: int):
    """Yield every k-dimensional subspace of GF(2)^m as a sorted tuple of ints."""
    for piv in itertools.combinations(range(m), k):
        piv_set = set(piv)
        slots = [(i, j) for i, p in enumerate(piv) for j in range(p + 1, m) if j not in piv_set]
        for fill in range(1 << len(slots)):
            rows = [1 << p for p in piv]
            for bit, (i, j) in enumerate(slots):
                if (fill >> bit) & 1:
                    rows[i] |= 1 << j
            span = [0]
            for v in rows:
                span += [s ^ v for s in span]
            yield tuple(sorted(span))


def rm_overcomplete_pc(params: RmParams) -> BitMatrix:
    """Minimum-weight dual codewords of RM(r, m) built directly as affine flats.

    The dual RM(m-r-1, m) has minimum weight 2^(r+1) and its minimum-weight
    words are the incidence vectors of (r+1)-dimensional affine flats.
    """
    r, m = params.r, params.m
    if r >= m:
        raise ValueError("RM(m, m) has a trivial dual")
    n = 1 << m
    k = r + 1
    seen: set[tuple[int, ...]] = set()
    for sub in _subspaces(m, k):
        arr = np.array(sub)
        for b in range(n):
            flat = tuple(sorted((arr ^ b).tolist()))
            seen.add(flat)
    rows = np.zeros((len(seen), n), dtype=np.uint8)
    for i, flat in enumerate(seen):
        rows[i, list(flat)] = 1
    return BitMatrix.from_array(_sort_rows(rows))


def load_pc(path) -> BitMatrix:
    """Read a parity-check matrix: header "M N", then M rows of N 0/1 tokens."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValueError(f"{path}: header must be 'M N'")
    try:
        M, N = int(lines[0][0]), int(lines[0][1])
        body = np.array([[int(t) for t in ln] for ln in lines[1:]], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: cannot parse: {exc}") from None
    if len(lines) - 1 != M or any(len(ln) != N for ln in lines[1:]):
        raise ValueError(f"{path}: header says {M}x{N}, body does not match")
    body = body.reshape(M, N)
    if not np.isin(body, (0, 1)).all():
        raise ValueError(f"{path}: entries must be 0 or 1")
    return BitMatrix.from_array(body.astype(np.uint8))


def save_pc(H: BitMatrix, path) -> None:
    dense = H.to_array()
    lines = [f"{H.rows} {H.cols}"] + [" ".join(map(str, row)) for row in dense]
    Path(path).write_text("\n".join(lines) + "\n")


def encode(code: LinearCode, u) -> np.ndarray:
    """c = u G over GF(2). Accepts one message or a batch (rows)."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != code.K:
        raise ValueError(f"message length {u.shape[-1]} != K={code.K}")
    return mod2_matmul(u, code.generator.dense)


def syndrome(H: BitMatrix, z) -> np.ndarray:
    """s = H z. Works on a single word or a batch of rows."""
    z = np.asarray(z, dtype=np.uint8)
    if z.shape[-1] != H.cols:
        raise ValueError(f"word length {z.shape[-1]} != H columns {H.cols}")
    return mod2_matmul(z, H.dense.T)


def check_orthogonal(G: BitMatrix, H: BitMatrix) -> bool:
    """True iff G H^T = 0."""
    return not matmul(G, H.transpose()).dense.any()


def dual_min_weight_rows_ok(code: LinearCode, H: BitMatrix) -> bool:
    """Rows of H lie in the dual and share a single weight."""
    if not check_orthogonal(code.generator, H):
        return False
    return len(set(H.dense.sum(axis=1).tolist())) == 1


def parse_code_spec(spec: str) -> LinearCode:
    """Parse ``rm:r,m`` or ``file:<pc-matrix path>``."""
    kind, _, arg = spec.partition(":")
    if kind == "rm":
        try:
            r, m = (int(x) for x in arg.split(","))
        except ValueError:
            raise ValueError(f"bad RM spec {spec!r}, expected rm:r,m") from None
        return build_rm(RmParams(r, m))
    if kind == "file":
        H = load_pc(arg)
        return code_from_pc(H, Path(arg).stem)
    raise ValueError(f"unknown code spec {spec!r}; use rm:r,m or file:<path>")

