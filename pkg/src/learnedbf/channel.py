"""BPSK over AWGN and the BSC, with SNR bookkeeping and LLRs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr


def q_function(x):
    """Gaussian tail probability P(X > x) for X ~ N(0, 1)."""
    return ndtr(-np.asarray(x, dtype=float))


def make_rng(master_seed: int, stream: int = 0, block: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by (master_seed, stream, block)."""
    seq = np.random.SeedSequence([int(master_seed), int(stream), int(block)])
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class SnrSpec:
    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")

    @property
    def ebn0(self) -> float:
        return 10.0 ** (self.ebn0_db / 10.0)

    @property
    def sigma(self) -> float:
        if math.isinf(self.ebn0_db) and self.ebn0_db > 0:
            return 0.0
        return 1.0 / math.sqrt(2.0 * self.rate * self.ebn0)

    @property
    def bsc_p(self) -> float:
        if self.sigma == 0.0:
            return 0.0
        return float(q_function(1.0 / self.sigma))


def snr_to_params(ebn0_db: float, rate: float) -> SnrSpec:
    return SnrSpec(float(ebn0_db), float(rate))


@dataclass
class ChannelRealization:
    """One word (1-D fields) or a batch of words (2-D fields, one row each)."""

    codeword: np.ndarray
    soft: np.ndarray
    hard: np.ndarray
    llr: np.ndarray

    @property
    def error_pattern(self) -> np.ndarray:
        return self.hard ^ self.codeword

    def __len__(self) -> int:
        return 1 if self.codeword.ndim == 1 else self.codeword.shape[0]


def hard_decision(y: np.ndarray) -> np.ndarray:
    # y == 0 maps to 0
    return (np.asarray(y) < 0).astype(np.uint8)


def transmit_awgn(c, spec: SnrSpec, rng: np.random.Generator) -> ChannelRealization:
    c = np.asarray(c, dtype=np.uint8)
    x = 1.0 - 2.0 * c
    sigma = spec.sigma
    if sigma == 0.0:
        y = x.astype(float)
        llr = np.where(c == 0, np.inf, -np.inf)
    else:
        y = x + sigma * rng.standard_normal(c.shape)
        llr = 2.0 * y / sigma**2
    return ChannelRealization(c, y, hard_decision(y), llr)


def bsc_llr_magnitude(p: float) -> float:
    if p <= 0.0:
        return math.inf
    return math.log((1.0 - p) / p)


def transmit_bsc(c, p: float, rng: np.random.Generator) -> ChannelRealization:
    if not 0.0 <= p < 0.5:
        raise ValueError(f"crossover probability must lie in [0, 0.5), got {p}")
    c = np.asarray(c, dtype=np.uint8)
    flips = (rng.random(c.shape) < p).astype(np.uint8)
    z = c ^ flips
    soft = 1.0 - 2.0 * z.astype(float)
    llr = soft * bsc_llr_magnitude(p)
    return ChannelRealization(c, soft, z, llr)


@dataclass(frozen=True)
class ChannelSpec:
    """What an evaluation or training run transmits over.

    ``kind`` is ``"bsc"`` (hard decisions only, crossover derived from the SNR)
    or ``"awgn"`` (soft observations).
    """

    kind: str
    snr: SnrSpec

    def __post_init__(self):
        if self.kind not in ("bsc", "awgn"):
            raise ValueError(f"unknown channel kind {self.kind!r}")

    def transmit(self, c, rng: np.random.Generator) -> ChannelRealization:
        if self.kind == "bsc":
            return transmit_bsc(c, self.snr.bsc_p, rng)
        return transmit_awgn(c, self.snr, rng)


class BscErrors:
    """Training-time error source: i.i.d. BSC error patterns on the all-zero word."""

    def __init__(self, n: int, p: float):
        self.n = n
        self.p = float(p)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return (rng.random((count, self.n)) < self.p).astype(np.uint8)


class AwgnHardErrors:
    """Hard-decision error patterns of the AWGN channel (statistically a BSC)."""

    def __init__(self, n: int, snr: SnrSpec):
        self.n = n
        self.snr = snr

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        zeros = np.zeros((count, self.n), dtype=np.uint8)
        return transmit_awgn(zeros, self.snr, rng).hard
