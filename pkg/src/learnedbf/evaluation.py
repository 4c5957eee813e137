"""Monte Carlo CER/BER estimation, learning curves and CSV output."""

from __future__ import annotations

import csv
import math
from array import array
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelSpec, make_rng
from .codes import LinearCode, encode
from .gf2 import mod2_matmul

LEARNING_WINDOW = 5000
RESULT_COLUMNS = ("snr_db", "decoder", "pc_matrix", "codewords", "cer", "ber", "stderr_cer")


@dataclass
class ErrorStats:
    codewords: int = 0
    codeword_errors: int = 0
    bit_errors: int = 0
    bits: int = 0

    @property
    def cer(self) -> float:
        return self.codeword_errors / self.codewords if self.codewords else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def stderr_cer(self) -> float:
        if not self.codewords:
            return 0.0
        p = self.cer
        return math.sqrt(p * (1.0 - p) / self.codewords)

    def __add__(self, other: ErrorStats) -> ErrorStats:
        return ErrorStats(
            self.codewords + other.codewords,
            self.codeword_errors + other.codeword_errors,
            self.bit_errors + other.bit_errors,
            self.bits + other.bits,
        )


def _simulate_block(decoder, code: LinearCode, channel: ChannelSpec, seed: int, stream: int,
                    block: int, size: int, info_bits: bool) -> ErrorStats:
    rng = make_rng(seed, stream, block)
    u = rng.integers(0, 2, size=(size, code.K), dtype=np.uint8)
    if info_bits:
        Gsys, pivots = code.systematic
        c = mod2_matmul(u, Gsys)
    else:
        c = encode(code, u)
    rx = channel.transmit(c, rng)
    est = decoder.decode_batch(rx)
    wrong = est != c
    if info_bits:
        wrong_bits = wrong[:, pivots]
    else:
        wrong_bits = wrong
    return ErrorStats(size, int(wrong.any(axis=1).sum()), int(wrong_bits.sum()), int(wrong_bits.size))


def run_monte_carlo(
    decoder,
    code: LinearCode,
    channel: ChannelSpec,
    min_errors: int = 100,
    max_words: int = 1_000_000,
    seed: int = 0,
    stream: int = 0,
    block_size: int = 1000,
    workers: int = 1,
    info_bits: bool = False,
) -> ErrorStats:
    """Simulate blocks of words until ``min_errors`` codeword errors or ``max_words``.

    Block ``b`` always draws from the stream keyed by ``(seed, stream, b)`` and
    blocks are merged in order, so the result does not depend on ``workers``.
    ``info_bits`` switches BER counting from all codeword bits to the
    information positions of a systematic encoder.
    """
    if min_errors < 1:
        raise ValueError("min_errors must be >= 1")
    sizes = []
    left = max_words
    while left > 0:
        sizes.append(min(block_size, left))
        left -= sizes[-1]

    stats = ErrorStats()
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        b = 0
        while b < len(sizes) and stats.codeword_errors < min_errors:
            wave = range(b, min(b + max(workers, 1), len(sizes)))
            args = [(decoder, code, channel, seed, stream, i, sizes[i], info_bits) for i in wave]
            if pool is None:
                results = [_simulate_block(*a) for a in args]
            else:
                results = list(pool.map(_simulate_block, *zip(*args)))
            for res in results:
                stats = stats + res
                b += 1
                if stats.codeword_errors >= min_errors:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return stats


@dataclass
class LearningCurve:
    """Per-episode greedy-decoding outcomes and their trailing moving-average CER."""

    window: int = LEARNING_WINDOW
    failures: array = field(default_factory=lambda: array("B"))
    ma_cer: array = field(default_factory=lambda: array("d"))
    _running: int = 0

    @property
    def episodes(self) -> np.ndarray:
        """1-based episode index of each moving-average point."""
        return np.arange(self.window, self.window + len(self.ma_cer))

    def __len__(self) -> int:
        return len(self.failures)

    def first_below(self, threshold: float) -> int | None:
        """Episode at which the moving average first drops below ``threshold``."""
        ma = np.frombuffer(self.ma_cer, dtype=float)
        hits = np.flatnonzero(ma < threshold)
        return int(self.episodes[hits[0]]) if hits.size else None


def record_outcome(curve: LearningCurve, success: bool) -> None:
    fail = 0 if success else 1
    curve.failures.append(fail)
    curve._running += fail
    n = len(curve.failures)
    if n > curve.window:
        curve._running -= curve.failures[n - 1 - curve.window]
    if n >= curve.window:
        curve.ma_cer.append(curve._running / curve.window)


def write_learning_curve_csv(curve: LearningCurve, path, every: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "ma_cer"])
        for ep, v in zip(curve.episodes[::every], list(curve.ma_cer)[::every]):
            w.writerow([int(ep), repr(float(v))])


@dataclass(frozen=True)
class ResultRow:
    snr_db: float
    decoder: str
    pc_matrix: str
    stats: ErrorStats


def write_results_csv(rows, path) -> None:
    ordered = sorted(rows, key=lambda r: (r.decoder, r.pc_matrix, r.snr_db))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in ordered:
            s = r.stats
            w.writerow([repr(float(r.snr_db)), r.decoder, r.pc_matrix, s.codewords,
                        repr(s.cer), repr(s.ber), repr(s.stderr_cer)])


def read_results_csv(path) -> list[dict]:
    out = []
    with open(Path(path), newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append({
                "snr_db": float(rec["snr_db"]),
                "decoder": rec["decoder"],
                "pc_matrix": rec["pc_matrix"],
                "codewords": int(rec["codewords"]),
                "cer": float(rec["cer"]),
                "ber": float(rec["ber"]),
                "stderr_cer": float(rec["stderr_cer"]),
            })
    return out
