"""Bit-packed linear algebra over GF(2).

Rows are packed little-endian into 64-bit words: column ``j`` lives in word
``j // 64`` at bit ``j % 64``. Padding bits past ``cols`` are always zero.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

WORD_BITS = 64
_WORD = np.dtype("<u8")


def _nwords(n: int) -> int:
    return max(1, (n + WORD_BITS - 1) // WORD_BITS)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8) & 1
    n = bits.shape[-1]
    nbytes = _nwords(n) * 8
    packed = np.packbits(bits, axis=-1, bitorder="little")
    pad = nbytes - packed.shape[-1]
    if pad:
        widths = [(0, 0)] * (packed.ndim - 1) + [(0, pad)]
        packed = np.pad(packed, widths)
    return np.ascontiguousarray(packed).view(_WORD)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns uint8 with last axis of length n."""
    words = np.ascontiguousarray(words, dtype=_WORD)
    as_bytes = words.view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, count=n, bitorder="little")


def bits_to_ints(bits: np.ndarray) -> list[int]:
    """Convert each row of a 0/1 matrix to a Python int (bit i = column i)."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def int_to_bits(value: int, n: int) -> np.ndarray:
    raw = value.to_bytes((n + 7) // 8 or 1, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=n, bitorder="little")


class BitVector:
    """Fixed-length packed binary vector."""

    __slots__ = ("len", "data")

    def __init__(self, length: int, data: np.ndarray | None = None):
        self.len = int(length)
        if data is None:
            data = np.zeros(_nwords(self.len), dtype=_WORD)
        data = np.asarray(data, dtype=_WORD)
        if data.shape != (_nwords(self.len),):
            raise ValueError(f"expected {_nwords(self.len)} words, got shape {data.shape}")
        self.data = data
        self.data.flags.writeable = False

    @classmethod
    def from_bits(cls, bits) -> BitVector:
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        return cls(bits.size, pack_bits(bits))

    @classmethod
    def from_int(cls, value: int, length: int) -> BitVector:
        return cls.from_bits(int_to_bits(value, length))

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length)

    def to_array(self) -> np.ndarray:
        return unpack_bits(self.data, self.len)

    def __array__(self, dtype=None, copy=None):
        out = self.to_array()
        return out if dtype is None else out.astype(dtype)

    def to_int(self) -> int:
        return int.from_bytes(self.data.tobytes(), "little")

    def __len__(self) -> int:
        return self.len

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return int(self.data[i // WORD_BITS] >> np.uint64(i % WORD_BITS)) & 1

    def _check(self, other: BitVector) -> None:
        if self.len != other.len:
            raise ValueError(f"length mismatch: {self.len} vs {other.len}")

    def __xor__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.len, self.data ^ other.data)

    def __and__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.len, self.data & other.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.len == other.len and bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.len, self.data.tobytes()))

    def weight(self) -> int:
        return int(np.bitwise_count(self.data).sum())

    def any(self) -> bool:
        return bool(self.data.any())

    def __repr__(self) -> str:
        return "BitVector(" + "".join(map(str, self.to_array())) + ")"


class BitMatrix:
    """Row-major packed binary matrix. Treated as immutable."""

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        shape = (self.rows, _nwords(self.cols))
        if data is None:
            data = np.zeros(shape, dtype=_WORD)
        data = np.asarray(data, dtype=_WORD).reshape(shape)
        self.data = data
        self.data.flags.writeable = False

    @classmethod
    def from_array(cls, arr) -> BitMatrix:
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("BitMatrix needs a 2-D array")
        return cls(arr.shape[0], arr.shape[1], pack_bits(arr))

    @classmethod
    def from_rows(cls, rows: list[BitVector]) -> BitMatrix:
        if not rows:
            raise ValueError("from_rows needs at least one row")
        n = rows[0].len
        if any(r.len != n for r in rows):
            raise ValueError("rows differ in length")
        return cls(len(rows), n, np.stack([r.data for r in rows]))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_array(self) -> np.ndarray:
        return unpack_bits(self.data, self.cols)

    def __array__(self, dtype=None, copy=None):
        out = self.to_array()
        return out if dtype is None else out.astype(dtype)

    @cached_property
    def dense(self) -> np.ndarray:
        """Cached read-only uint8 view of the matrix."""
        out = self.to_array()
        out.flags.writeable = False
        return out

    @cached_property
    def column_ints(self) -> tuple[int, ...]:
        """Column n packed as an int with bit m = H[m, n]."""
        return tuple(bits_to_ints(self.dense.T))

    @cached_property
    def column_weights(self) -> np.ndarray:
        return self.dense.sum(axis=0).astype(np.int64)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.data[i].copy())

    def column(self, j: int) -> BitVector:
        return BitVector.from_bits(self.dense[:, j])

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_array(self.dense.T)

    @property
    def T(self) -> BitMatrix:
        return self.transpose()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def mod2_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Dense 0/1 product reduced mod 2, routed through BLAS in float32.

    Exact while the inner dimension stays below 2**24.
    """
    prod = np.asarray(A, dtype=np.float32) @ np.asarray(B, dtype=np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def mat_vec_mul(H: BitMatrix, x: BitVector) -> BitVector:
    """Compute ``H x`` over GF(2)."""
    if H.cols != x.len:
        raise ValueError(f"dimension mismatch: H has {H.cols} columns, x has length {x.len}")
    parity = np.bitwise_count(H.data & x.data).sum(axis=1) & 1
    return BitVector.from_bits(parity.astype(np.uint8))


def matmul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    return BitMatrix.from_array(mod2_matmul(A.dense, B.dense))


def _rref_inplace(data: np.ndarray, cols: int, max_pivots: int | None = None) -> list[int]:
    rows = data.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows or (max_pivots is not None and len(pivots) == max_pivots):
            break
        w, b = divmod(c, WORD_BITS)
        colbits = (data[:, w] >> np.uint64(b)) & np.uint64(1)
        hits = np.flatnonzero(colbits[r:]) + r
        if hits.size == 0:
            continue
        p = hits[0]
        if p != r:
            data[[r, p]] = data[[p, r]]
        colbits = (data[:, w] >> np.uint64(b)) & np.uint64(1)
        colbits[r] = 0
        others = np.flatnonzero(colbits)
        if others.size:
            data[others] ^= data[r]
        pivots.append(c)
        r += 1
    return pivots


def rref(M: BitMatrix) -> tuple[BitMatrix, int, list[int]]:
    """Reduced row-echelon form of a copy of M, with rank and pivot columns."""
    data = np.array(M.data, copy=True)
    pivots = _rref_inplace(data, M.cols)
    return BitMatrix(M.rows, M.cols, data), len(pivots), pivots


def rank(M: BitMatrix) -> int:
    return rref(M)[1]


def nullspace(M: BitMatrix) -> BitMatrix:
    """Basis (as rows) of {x : M x = 0}."""
    R, rk, pivots = rref(M)
    n = M.cols
    free = [c for c in range(n) if c not in set(pivots)]
    if not free:
        return BitMatrix(0, n)
    dense = R.to_array()[:rk]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        basis[i, pivots] = dense[:, f]
    return BitMatrix.from_array(basis)


class XorBasis:
    """Incremental linear-independence tracker for vectors packed as ints."""

    __slots__ = ("_by_lead", "vectors")

    def __init__(self):
        self._by_lead: dict[int, int] = {}
        self.vectors: list[int] = []

    def __len__(self) -> int:
        return len(self.vectors)

    def reduce(self, v: int) -> int:
        by_lead = self._by_lead
        while v:
            lead = v.bit_length() - 1
            u = by_lead.get(lead)
            if u is None:
                return v
            v ^= u
        return 0

    def add(self, v: int) -> bool:
        """Add v if independent of the current span; report whether it was added."""
        r = self.reduce(v)
        if not r:
            return False
        self._by_lead[r.bit_length() - 1] = r
        self.vectors.append(v)
        return True


def extend_independent(basis: list[BitVector], v: BitVector) -> bool:
    """Append v to basis iff it is linearly independent of it."""
    for b in basis:
        if b.len != v.len:
            raise ValueError(f"length mismatch: {b.len} vs {v.len}")
    tracker = XorBasis()
    for b in basis:
        tracker.add(b.to_int())
    if tracker.reduce(v.to_int()) == 0:
        return False
    basis.append(v)
    return True
