"""Affine automorphisms of Reed-Muller codes chosen from channel reliabilities.

Positions of RM(r, m) are labelled by v in F_2^m (bit i of the index is
coordinate i). Any invertible affine map T(v) = Av + b permutes the code
onto itself. Picking v_0..v_m as the least reliable affinely independent
positions and setting b = v_0, A = [v_1 - v_0, ..., v_m - v_0] moves those
values onto the fixed positions {0, 1, 2, 4, ..., 2^(m-1)}, whose induced
crossover probabilities are then ordered. Decoding the permuted hard
decisions as if the channel were N parallel BSCs with known crossovers is
the sort-and-discard scheme.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import SnrSpec, make_rng, snr_to_params
from .codes import LinearCode
from .decoders import DEFAULT_MAX_ITERS, DecodeResult
from .gf2 import BitMatrix, BitVector, extend_independent
from .rl.policy import lbf_decode_batch

P_FLOOR = 1e-6
P_CEIL = 0.5 - 1e-6
PROFILE_STREAM = 7


def log2_length(N: int) -> int:
    m = N.bit_length() - 1
    if N < 2 or 1 << m != N:
        raise ValueError(f"blocklength {N} is not a power of two >= 2")
    return m


def b_set(m: int) -> list[int]:
    """The zero index and the m unit-vector indices: [0, 1, 2, 4, ..., 2^(m-1)]."""
    return [0] + [1 << i for i in range(m)]


@dataclass(frozen=True, eq=False)
class AffinePerm:
    A: BitMatrix
    b: BitVector
    lookup: np.ndarray

    @property
    def m(self) -> int:
        return self.A.rows

    def is_bijection(self) -> bool:
        return np.array_equal(np.sort(self.lookup), np.arange(1 << self.m))


def affine_lookup(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """lookup[i] = A bits(i) + b, as an index table over 0..2^m-1."""
    m = A.shape[0]
    idx = np.arange(1 << m)
    bits = (idx[:, None] >> np.arange(m)) & 1
    img = (bits @ A.T.astype(np.int64) + b) & 1
    return img @ (1 << np.arange(m))


def sort_perm(r) -> np.ndarray:
    """Indices that sort r ascending; ties keep their original order."""
    return np.argsort(np.asarray(r), kind="stable")


def select_affine_perm(m: int, pi) -> AffinePerm:
    """Affine map sending the B-set to the first m+1 affinely independent entries of pi."""
    pi = np.asarray(pi)
    if len(pi) != 1 << m:
        raise ValueError(f"permutation length {len(pi)} != 2^{m}")
    v0 = int(pi[0])
    basis: list[BitVector] = []
    for v in pi[1:]:
        if extend_independent(basis, BitVector.from_int(int(v) ^ v0, m)):
            if len(basis) == m:
                break
    A = np.array([d.to_array() for d in basis], dtype=np.uint8).T.reshape(m, m)
    b = BitVector.from_int(v0, m)
    return AffinePerm(BitMatrix.from_array(A), b, affine_lookup(A, b.to_array()))


def select_lookups(reliability: np.ndarray) -> np.ndarray:
    """Vectorised :func:`select_affine_perm` over rows; returns one lookup per row.

    For each row the span of the directions accepted so far is kept as a
    boolean mask over F_2^m, so an independence test is a single lookup.
    """
    R = np.atleast_2d(reliability)
    n, N = R.shape
    m = log2_length(N)
    order = np.argsort(R, axis=1, kind="stable")
    v0 = order[:, 0]
    span = np.zeros((n, N), dtype=bool)
    span[:, 0] = True
    dirs = np.zeros((n, m), dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    xs = np.arange(N)
    for j in range(1, N):
        todo = np.flatnonzero(count < m)
        if todo.size == 0:
            break
        d = order[todo, j] ^ v0[todo]
        fresh = ~span[todo, d]
        t, d = todo[fresh], d[fresh]
        dirs[t, count[t]] = d
        count[t] += 1
        span[t] |= np.take_along_axis(span[t], xs[None, :] ^ d[:, None], axis=1)
    lookup = np.repeat(v0[:, None], N, axis=1)
    for i in range(m):
        lookup ^= ((xs >> i) & 1)[None, :] * dirs[:, i:i + 1]
    return lookup


def apply_perm(lookup, x) -> np.ndarray:
    """out[..., i] = x[..., lookup[i]]; a 2-D lookup permutes each row separately."""
    lookup = getattr(lookup, "lookup", lookup)
    x = np.asarray(x)
    if lookup.ndim == 1:
        return x[..., lookup]
    return np.take_along_axis(x, lookup, axis=-1)


def invert_perm(lookup, x) -> np.ndarray:
    """Undo :func:`apply_perm`: out[..., lookup[i]] = x[..., i]."""
    lookup = getattr(lookup, "lookup", lookup)
    x = np.asarray(x)
    out = np.empty_like(x)
    if lookup.ndim == 1:
        out[..., lookup] = x
    else:
        np.put_along_axis(out, lookup, x, axis=-1)
    return out


@dataclass(frozen=True, eq=False)
class CrossoverProfile:
    """Per-position crossover probabilities of the sorted (parallel-BSC) channel."""

    p: np.ndarray
    snr: SnrSpec
    samples: int
    llr_mag: np.ndarray = field(init=False)
    clamped: np.ndarray = field(init=False)

    def __post_init__(self):
        raw = np.asarray(self.p, dtype=float)
        p = np.clip(raw, P_FLOOR, P_CEIL)
        object.__setattr__(self, "clamped", p != raw)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "llr_mag", np.log((1.0 - p) / p))

    @property
    def N(self) -> int:
        return len(self.p)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.p * (1.0 - self.p) / self.samples)

    @classmethod
    def from_counts(cls, errors: np.ndarray, samples: int, snr: SnrSpec) -> CrossoverProfile:
        return cls(np.asarray(errors, dtype=float) / samples, snr, samples)


class SortDiscardErrors:
    """AWGN hard-decision error patterns after the reliability-driven permutation."""

    def __init__(self, n: int, snr: SnrSpec):
        log2_length(n)
        self.n = n
        self.snr = snr

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        y = 1.0 + self.snr.sigma * rng.standard_normal((count, self.n))
        E = (y < 0).astype(np.uint8)
        return apply_perm(select_lookups(np.abs(y)), E)


def _profile_block(n: int, snr: SnrSpec, seed: int, block: int, size: int) -> np.ndarray:
    E = SortDiscardErrors(n, snr).sample(make_rng(seed, PROFILE_STREAM, block), size)
    return E.sum(axis=0, dtype=np.int64)


def estimate_crossovers(code: LinearCode, snr, n_samples: int, rng: np.random.Generator | None = None,
                        seed: int = 0, workers: int = 1, block_size: int = 50_000) -> CrossoverProfile:
    """Monte Carlo estimate of the permuted channel's crossover per position.

    With ``rng`` the samples are drawn serially from it. Otherwise block b uses
    the stream keyed by (seed, b) and blocks may run on ``workers`` processes;
    per-position error counts are summed, so the estimate does not depend on
    the worker count. The all-zero word is sent, which is exact because the
    channel and the selection only see |y| and the sign relative to the code
    bit.
    """
    if not isinstance(snr, SnrSpec):
        snr = snr_to_params(float(snr), code.rate)
    N = code.N
    sizes = [min(block_size, n_samples - s) for s in range(0, n_samples, block_size)]
    if rng is not None:
        src = SortDiscardErrors(N, snr)
        errors = sum(src.sample(rng, s).sum(axis=0, dtype=np.int64) for s in sizes)
    elif workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_profile_block, *zip(*[(N, snr, seed, b, s) for b, s in enumerate(sizes)]))
            errors = sum(parts)
    else:
        errors = sum(_profile_block(N, snr, seed, b, s) for b, s in enumerate(sizes))
    return CrossoverProfile.from_counts(errors, n_samples, snr)


def write_profile_csv(profile: CrossoverProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# ebn0_db={profile.snr.ebn0_db!r} rate={profile.snr.rate!r} "
                 f"samples={profile.samples}\n")
        w = csv.writer(fh)
        w.writerow(["n", "p_n", "llr_mag_n"])
        for n, (p, mag) in enumerate(zip(profile.p, profile.llr_mag)):
            w.writerow([n, repr(float(p)), repr(float(mag))])


def read_profile_csv(path) -> CrossoverProfile:
    with open(path, newline="") as fh:
        head = fh.readline()
        if not head.startswith("#"):
            raise ValueError(f"{path}: missing '# ebn0_db=... rate=... samples=...' line")
        meta = dict(tok.split("=", 1) for tok in head[1:].split())
        try:
            snr = snr_to_params(float(meta["ebn0_db"]), float(meta["rate"]))
            samples = int(meta["samples"])
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: bad profile header {head.strip()!r}") from exc
        rows = list(csv.DictReader(fh))
    p = np.array([float(r["p_n"]) for r in rows])
    if [int(r["n"]) for r in rows] != list(range(len(rows))) or len(rows) < 2:
        raise ValueError(f"{path}: positions must be listed as 0..N-1")
    return CrossoverProfile(p, snr, samples)


def monotone_over_b(profile: CrossoverProfile, sigmas: float = 0.0) -> bool:
    """p strictly decreases along the B-set, each gap above ``sigmas`` merged stderrs."""
    idx = b_set(log2_length(profile.N))
    p, se = profile.p[idx], profile.stderr[idx]
    gaps = p[:-1] - p[1:]
    return bool(np.all(gaps > sigmas * np.sqrt(se[:-1] ** 2 + se[1:] ** 2)))


def sort_and_discard_batch(q, H: BitMatrix, Y, T: int = DEFAULT_MAX_ITERS):
    """Permute hard decisions by reliability, decode greedily, permute back."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    lookup = select_lookups(np.abs(Y))
    Z = (Y < 0).astype(np.uint8)
    res = lbf_decode_batch(q, H, apply_perm(lookup, Z), T)
    res.estimates = invert_perm(lookup, res.estimates)
    return res


def sort_and_discard_decode(q, code: LinearCode, profile: CrossoverProfile | None, y,
                            T: int = DEFAULT_MAX_ITERS, H: BitMatrix | None = None) -> DecodeResult:
    """Single-word sort-and-discard decoding.

    The profile shapes the training reward only; inference is the plain
    greedy policy, so ``profile`` is accepted for interface symmetry and
    checked for length.
    """
    if profile is not None and profile.N != code.N:
        raise ValueError("profile length does not match the code")
    H = code.pc_matrix if H is None else H
    return sort_and_discard_batch(q, H, np.asarray(y, dtype=float)[None, :], T)[0]


class SortDiscardDecoder:
    def __init__(self, q, H: BitMatrix, T: int = DEFAULT_MAX_ITERS, name: str = "lbf-sd"):
        self.q, self.H, self.T, self.name = q, H, T, name

    def decode_batch(self, rx) -> np.ndarray:
        return sort_and_discard_batch(self.q, self.H, rx.soft, self.T).estimates
