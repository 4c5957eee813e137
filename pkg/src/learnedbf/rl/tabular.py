"""Tabular Q-learning over syndromes."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..evaluation import LearningCurve, record_outcome
from ..gf2 import bits_to_ints, mod2_matmul
from ..mdp import MdpConfig
from .explore import ExploreSpec, pick_action
from .sources import error_source

_MAGIC = b"QTBL"


class QTable:
    """Sparse Q-function: syndrome int -> list of N action values.

    Missing syndromes behave as all-zero rows.
    """

    def __init__(self, M: int, N: int):
        self.M = M
        self.N = N
        self.rows: dict[int, list[float]] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def values(self, s: int) -> np.ndarray:
        row = self.rows.get(s)
        return np.zeros(self.N) if row is None else np.array(row)

    def max_value(self, s: int) -> float:
        row = self.rows.get(s)
        return max(row) if row is not None else 0.0

    def greedy(self, s: int) -> int:
        row = self.rows.get(s)
        if row is None:
            return 0
        return row.index(max(row))

    def greedy_batch(self, S: np.ndarray) -> np.ndarray:
        return np.array([self.greedy(s) for s in bits_to_ints(S)], dtype=np.int64)

    def same_values(self, other: QTable) -> bool:
        keys = set(self.rows) | set(other.rows)
        return all(np.array_equal(self.values(k), other.values(k)) for k in keys)

    def save(self, path) -> None:
        nbytes = max(1, (self.M + 7) // 8)
        with open(path, "wb") as fh:
            fh.write(_MAGIC + struct.pack("<IIQ", self.M, self.N, len(self.rows)))
            for key in sorted(self.rows):
                fh.write(key.to_bytes(nbytes, "little"))
                fh.write(np.asarray(self.rows[key], dtype="<f4").tobytes())

    @classmethod
    def load(cls, path) -> QTable:
        raw = Path(path).read_bytes()
        if raw[:4] != _MAGIC:
            raise ValueError(f"{path}: not a Q-table file")
        M, N, count = struct.unpack_from("<IIQ", raw, 4)
        nbytes = max(1, (M + 7) // 8)
        rec = nbytes + 4 * N
        body = raw[4 + 16:]
        if len(body) != count * rec:
            raise ValueError(f"{path}: expected {count} records of {rec} bytes")
        q = cls(M, N)
        for i in range(count):
            chunk = body[i * rec:(i + 1) * rec]
            key = int.from_bytes(chunk[:nbytes], "little")
            q.rows[key] = np.frombuffer(chunk[nbytes:], dtype="<f4").astype(float).tolist()
        return q


def greedy_action(q, s: int) -> int:
    """argmax_a Q(s, a), lowest index on ties."""
    return q.greedy(s)


def q_update(table: QTable, s: int, a: int, r: float, s2: int, done: bool,
             alpha: float, gamma: float) -> None:
    target = r if done else r + gamma * table.max_value(s2)
    row = table.rows.get(s)
    if row is None:
        new = alpha * target
        if new == 0.0:
            return
        row = [0.0] * table.N
        table.rows[s] = row
    row[a] = (1.0 - alpha) * row[a] + alpha * target


def greedy_rollout(q, columns, s: int, T: int) -> tuple[int, int, int]:
    """Follow the greedy policy from syndrome s; return (final s, flip mask, flips)."""
    flips = 0
    used = 0
    while s and used < T:
        a = q.greedy(s)
        s ^= columns[a]
        flips ^= 1 << a
        used += 1
    return s, flips, used


def train_tabular(code, H, channel_spec, mdp_cfg: MdpConfig, explore_spec: ExploreSpec,
                  alpha: float = 0.1, episodes: int = 100_000, rng: np.random.Generator = None,
                  table: QTable | None = None, record_curve: bool = True,
                  chunk: int = 4096) -> tuple[QTable, LearningCurve]:
    """Q-learning with one fresh channel error pattern per episode.

    Words are drawn on the all-zero codeword; since syndromes depend only on
    the error pattern this is equivalent to random messages. Before training
    on each word it is first decoded greedily, and whether the greedy policy
    recovered the transmitted word is logged to the learning curve.
    """
    if mdp_cfg.H.shape != H.shape:
        raise ValueError("mdp_cfg was built for a different parity-check matrix")
    rng = np.random.default_rng() if rng is None else rng
    N, T, gamma = code.N, mdp_cfg.T, mdp_cfg.gamma
    source = error_source(N, channel_spec)
    q = QTable(H.rows, N) if table is None else table
    curve = LearningCurve()
    columns = mdp_cfg.columns
    penalty = mdp_cfg.penalty.tolist()
    eps_g = explore_spec.goal_prob
    HT = H.dense.T

    start = 0
    while start < episodes:
        n = min(chunk, episodes - start)
        E = source.sample(rng, n)
        synd = bits_to_ints(mod2_matmul(E, HT))
        errs = bits_to_ints(E)
        uniforms = rng.random((n, T, 2)).tolist()
        for i in range(n):
            s = synd[i]
            if record_curve:
                s_end, flips, _ = greedy_rollout(q, columns, s, T)
                record_outcome(curve, s_end == 0 and flips == errs[i])
            if s == 0:
                continue
            eps = explore_spec.eps_at(start + i)
            support = np.flatnonzero(E[i]).tolist() if eps_g else []
            for t in range(T):
                u1, u2 = uniforms[i][t]
                a = pick_action(eps, eps_g, u1, u2, N, support, lambda: q.greedy(s))
                s2 = s ^ columns[a]
                r = -penalty[a] + (1.0 if s2 == 0 else 0.0)
                done = s2 == 0 or t + 1 == T
                q_update(q, s, a, r, s2, done, alpha, gamma)
                if eps_g:
                    if a in support:
                        support.remove(a)
                    else:
                        support.append(a)
                s = s2
                if done:
                    break
        start += n
    return q, curve
