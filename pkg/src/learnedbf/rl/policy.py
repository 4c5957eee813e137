"""Decoding by greedy rollout of a learned Q-function."""

from __future__ import annotations

import numpy as np

from ..decoders import DEFAULT_MAX_ITERS, BatchResult, DecodeResult, _as_batch
from ..gf2 import BitMatrix, mod2_matmul


def lbf_decode_batch(q, H: BitMatrix, Z, T: int = DEFAULT_MAX_ITERS) -> BatchResult:
    """Flip ``argmax_a Q(s, a)`` until the syndrome is zero or T flips are spent.

    ``q`` is anything with ``greedy_batch(S)`` taking a 0/1 syndrome array
    (a :class:`QTable` or :class:`QNetwork`).
    """
    Z, _ = _as_batch(Z, H.cols, np.uint8)
    HT = np.ascontiguousarray(H.dense.T)
    est = Z.copy()
    S = mod2_matmul(est, HT)
    flips = np.zeros(len(Z), dtype=np.int64)
    active = S.any(axis=1)
    for _ in range(T):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        a = np.asarray(q.greedy_batch(S[idx]))
        est[idx, a] ^= 1
        S[idx] ^= HT[a]
        flips[idx] += 1
        active[idx] = S[idx].any(axis=1)
    converged = ~S.any(axis=1)
    return BatchResult(est, converged, flips, np.zeros(len(Z), dtype=bool))


def lbf_decode(q, H: BitMatrix, z, T: int = DEFAULT_MAX_ITERS) -> DecodeResult:
    return lbf_decode_batch(q, H, np.asarray(z, dtype=np.uint8)[None, :], T)[0]


class LbfDecoder:
    """Learned bit-flipping on hard decisions."""

    def __init__(self, q, H: BitMatrix, T: int = DEFAULT_MAX_ITERS, name: str = "lbf"):
        self.q, self.H, self.T, self.name = q, H, T, name

    def decode_batch(self, rx) -> np.ndarray:
        return lbf_decode_batch(self.q, self.H, rx.hard, self.T).estimates
