"""Classical baselines: BF, weighted BF, syndrome-table ML, brute-force ML, OSD.

Each decoder has a single-word function returning :class:`DecodeResult` and
a batch path operating on rows of a 2-D array, which is what the Monte Carlo
harness calls.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelRealization
from .codes import LinearCode, encode
from .gf2 import BitMatrix, mod2_matmul, rref

DEFAULT_MAX_ITERS = 10
MAX_TABLE_ROWS = 18
MAX_BRUTE_K = 20


@dataclass
class DecodeResult:
    estimate: np.ndarray
    converged: bool
    flips_used: int
    stalled: bool = False


@dataclass
class BatchResult:
    estimates: np.ndarray
    converged: np.ndarray
    flips_used: np.ndarray
    stalled: np.ndarray

    def __getitem__(self, i: int) -> DecodeResult:
        return DecodeResult(
            self.estimates[i], bool(self.converged[i]), int(self.flips_used[i]), bool(self.stalled[i])
        )


def _as_batch(x, n: int, dtype) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=dtype)
    if x.shape[-1] != n:
        raise ValueError(f"word length {x.shape[-1]} != {n}")
    return np.atleast_2d(x), x.ndim == 1


def _flip_loop(H: BitMatrix, Z: np.ndarray, max_iters: int, score) -> BatchResult:
    """Shared greedy flipping loop; ``score(S_active, rows)`` returns per-bit metrics.

    The argmax (lowest index on ties) bit is flipped; a word stops early
    when its syndrome returns to one already visited, since the rule is a
    function of the syndrome alone and would cycle.
    """
    Hd = H.dense
    HT = np.ascontiguousarray(Hd.T)
    est = Z.copy()
    S = mod2_matmul(est, HT)
    B = Z.shape[0]
    flips = np.zeros(B, dtype=np.int64)
    stalled = np.zeros(B, dtype=bool)
    active = S.any(axis=1)
    history = [np.packbits(S, axis=1)]
    for _ in range(max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        q = score(S[idx], idx)
        n = np.argmax(q, axis=1)
        est[idx, n] ^= 1
        S[idx] ^= HT[n]
        flips[idx] += 1
        packed = np.packbits(S, axis=1)
        seen = np.zeros(idx.size, dtype=bool)
        for past in history:
            seen |= (past[idx] == packed[idx]).all(axis=1)
        history.append(packed)
        nonzero = S[idx].any(axis=1)
        stalled[idx] = seen & nonzero
        active[idx] = nonzero & ~seen
    return BatchResult(est, ~S.any(axis=1), flips, stalled)


def bf_decode_batch(H: BitMatrix, Z, max_iters: int = DEFAULT_MAX_ITERS) -> BatchResult:
    Z, _ = _as_batch(Z, H.cols, np.uint8)
    Hf = H.dense.astype(np.float32)
    colw = H.column_weights.astype(np.float32)

    def score(S, _idx):
        # Q_n = (unsat now) - (unsat after flipping n) = 2 |s & h_n| - |h_n|
        return 2.0 * (S.astype(np.float32) @ Hf) - colw

    return _flip_loop(H, Z, max_iters, score)


def bf_decode(H: BitMatrix, z, max_iters: int = DEFAULT_MAX_ITERS) -> DecodeResult:
    """Hard-decision bit flipping: flip the bit that most reduces unsatisfied checks."""
    return bf_decode_batch(H, z, max_iters)[0]


def _check_min_reliability(H: BitMatrix, R: np.ndarray) -> np.ndarray:
    """phi[b, m] = min over n in row m of R[b, n]."""
    Hd = H.dense
    wmax = int(Hd.sum(axis=1).max()) if H.rows else 0
    idx = np.full((H.rows, max(wmax, 1)), H.cols, dtype=np.int64)
    for m in range(H.rows):
        cols = np.flatnonzero(Hd[m])
        idx[m, : cols.size] = cols
    Rext = np.concatenate([R, np.full((R.shape[0], 1), np.inf)], axis=1)
    return Rext[:, idx].min(axis=2)


def wbf_decode_batch(H: BitMatrix, Y, max_iters: int = DEFAULT_MAX_ITERS) -> BatchResult:
    Y, _ = _as_batch(Y, H.cols, float)
    Z = (Y < 0).astype(np.uint8)
    phi = _check_min_reliability(H, np.abs(Y))
    Hf = H.dense.astype(np.float64)

    def score(S, idx):
        # E_n = sum over checks m on bit n of (2 s_m - 1) phi_m
        return ((2.0 * S - 1.0) * phi[idx]) @ Hf

    return _flip_loop(H, Z, max_iters, score)


def wbf_decode(H: BitMatrix, y, max_iters: int = DEFAULT_MAX_ITERS) -> DecodeResult:
    """Weighted bit flipping driven by each check's least reliable bit."""
    return wbf_decode_batch(H, y, max_iters)[0]


class SyndromeTable:
    """Dense map from every syndrome to a minimum-weight coset leader."""

    def __init__(self, H: BitMatrix, leaders: np.ndarray, covered: np.ndarray):
        self.H = H
        self.leaders = leaders
        self.covered = covered
        self._weights = (1 << np.arange(H.rows, dtype=np.int64))

    def index(self, S: np.ndarray) -> np.ndarray:
        return S.astype(np.int64) @ self._weights

    def leader_weight(self, s: int) -> int:
        return int(self.leaders[s].sum())


def build_syndrome_table(
    H: BitMatrix, max_weight: int | None = None, max_rows: int = MAX_TABLE_ROWS
) -> SyndromeTable:
    """Breadth-first expansion over error weight; first-found leader wins."""
    M, N = H.rows, H.cols
    if M > max_rows:
        raise MemoryError(f"dense syndrome table needs 2^{M} entries; limit is 2^{max_rows}")
    size = 1 << M
    cols = np.array(H.column_ints, dtype=np.int64)
    leaders = np.zeros((size, N), dtype=np.uint8)
    covered = np.zeros(size, dtype=bool)
    covered[0] = True
    frontier = np.array([0], dtype=np.int64)
    weight = 0
    while frontier.size and (max_weight is None or weight < max_weight):
        cand = (frontier[:, None] ^ cols[None, :]).ravel()
        parent = np.repeat(frontier, N)
        bit = np.tile(np.arange(N), frontier.size)
        fresh = ~covered[cand]
        cand, parent, bit = cand[fresh], parent[fresh], bit[fresh]
        new, first = np.unique(cand, return_index=True)
        leaders[new] = leaders[parent[first]]
        leaders[new, bit[first]] = 1
        covered[new] = True
        frontier = new
        weight += 1
    return SyndromeTable(H, leaders, covered)


def syndrome_ml_decode_batch(table: SyndromeTable, Z) -> BatchResult:
    Z, _ = _as_batch(Z, table.H.cols, np.uint8)
    s = table.index(mod2_matmul(Z, table.H.dense.T))
    ok = table.covered[s]
    correction = np.where(ok[:, None], table.leaders[s], 0).astype(np.uint8)
    est = Z ^ correction
    flips = correction.sum(axis=1).astype(np.int64)
    return BatchResult(est, ok, flips, np.zeros(len(Z), dtype=bool))


def syndrome_ml_decode(table: SyndromeTable, z) -> DecodeResult:
    return syndrome_ml_decode_batch(table, z)[0]


@lru_cache(maxsize=8)
def codebook(code: LinearCode) -> np.ndarray:
    """All 2^K codewords, row i encoding the binary expansion of i."""
    if code.K > MAX_BRUTE_K:
        raise ValueError(f"K={code.K} too large for exhaustive enumeration (max {MAX_BRUTE_K})")
    idx = np.arange(1 << code.K, dtype=np.int64)
    msgs = ((idx[:, None] >> np.arange(code.K)) & 1).astype(np.uint8)
    return encode(code, msgs)


@lru_cache(maxsize=8)
def _bipolar_codebook(code: LinearCode, dtype) -> np.ndarray:
    return np.ascontiguousarray((1.0 - 2.0 * codebook(code)).T.astype(dtype))


def brute_force_ml_batch(code: LinearCode, X, metric: str = "hard") -> BatchResult:
    """Exhaustive ML. ``metric='hard'`` takes hard decisions and minimizes
    Hamming distance; ``metric='soft'`` takes LLRs (or anything proportional,
    such as y) and maximizes the correlation sum_n (-1)^c_n x_n."""
    if metric not in ("hard", "soft"):
        raise ValueError(f"metric must be 'hard' or 'soft', got {metric!r}")
    if metric == "hard":
        X, _ = _as_batch(X, code.N, np.uint8)
        obs = 1.0 - 2.0 * X.astype(np.float32)
        book = _bipolar_codebook(code, np.float32)
    else:
        X, _ = _as_batch(X, code.N, float)
        obs = X
        book = _bipolar_codebook(code, np.float64)
    words = codebook(code)
    chunk = max(1, (1 << 23) // words.shape[0])
    best = np.empty(len(X), dtype=np.int64)
    for start in range(0, len(X), chunk):
        best[start : start + chunk] = np.argmax(obs[start : start + chunk] @ book, axis=1)
    est = words[best]
    n = len(X)
    return BatchResult(est, np.ones(n, dtype=bool), np.zeros(n, dtype=np.int64), np.zeros(n, dtype=bool))


def brute_force_ml(code: LinearCode, y_or_z, metric: str = "hard") -> DecodeResult:
    return brute_force_ml_batch(code, y_or_z, metric)[0]


@lru_cache(maxsize=16)
def _test_patterns(k: int, order: int) -> np.ndarray:
    rows = []
    for w in range(order + 1):
        for pos in itertools.combinations(range(k), w):
            row = np.zeros(k, dtype=np.uint8)
            row[list(pos)] = 1
            rows.append(row)
    return np.array(rows, dtype=np.uint8)


def osd_decode(code: LinearCode, y, order: int = 3) -> DecodeResult:
    """Order-``order`` ordered statistics decoding of one soft word."""
    if not 0 <= order <= 4:
        raise ValueError(f"OSD order must be in 0..4, got {order}")
    y = np.asarray(y, dtype=float)
    perm = np.argsort(-np.abs(y), kind="stable")
    yp = y[perm]
    Gp = BitMatrix.from_array(code.generator.dense[:, perm])
    R, k, pivots = rref(Gp)
    Rd = R.dense[:k]
    u0 = (yp[pivots] < 0).astype(np.uint8)
    cands = mod2_matmul(_test_patterns(k, order) ^ u0, Rd)
    best = int(np.argmax((1.0 - 2.0 * cands) @ yp))
    est = np.empty(code.N, dtype=np.uint8)
    est[perm] = cands[best]
    return DecodeResult(est, True, 0)


def osd_decode_batch(code: LinearCode, Y, order: int = 3) -> BatchResult:
    Y, _ = _as_batch(Y, code.N, float)
    est = np.empty(Y.shape, dtype=np.uint8)
    for i, y in enumerate(Y):
        est[i] = osd_decode(code, y, order).estimate
    n = len(Y)
    return BatchResult(est, np.ones(n, dtype=bool), np.zeros(n, dtype=np.int64), np.zeros(n, dtype=bool))


class BitFlipDecoder:
    def __init__(self, H: BitMatrix, max_iters: int = DEFAULT_MAX_ITERS, name: str = "bf"):
        self.H, self.max_iters, self.name = H, max_iters, name

    def decode_batch(self, rx: ChannelRealization) -> np.ndarray:
        return bf_decode_batch(self.H, rx.hard, self.max_iters).estimates


class WbfDecoder:
    def __init__(self, H: BitMatrix, max_iters: int = DEFAULT_MAX_ITERS, name: str = "wbf"):
        self.H, self.max_iters, self.name = H, max_iters, name

    def decode_batch(self, rx: ChannelRealization) -> np.ndarray:
        return wbf_decode_batch(self.H, rx.soft, self.max_iters).estimates


class SyndromeMlDecoder:
    def __init__(self, table: SyndromeTable, name: str = "hdml"):
        self.table, self.name = table, name

    def decode_batch(self, rx: ChannelRealization) -> np.ndarray:
        return syndrome_ml_decode_batch(self.table, rx.hard).estimates


class BruteForceMlDecoder:
    def __init__(self, code: LinearCode, metric: str = "soft", name: str = "brute"):
        self.code, self.metric, self.name = code, metric, name

    def decode_batch(self, rx: ChannelRealization) -> np.ndarray:
        obs = rx.hard if self.metric == "hard" else rx.soft
        return brute_force_ml_batch(self.code, obs, self.metric).estimates


class OsdDecoder:
    def __init__(self, code: LinearCode, order: int = 3, name: str | None = None):
        self.code, self.order = code, order
        self.name = name or f"osd{order}"

    def decode_batch(self, rx: ChannelRealization) -> np.ndarray:
        return osd_decode_batch(self.code, rx.soft, self.order).estimates
