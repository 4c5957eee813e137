"""Syndrome-domain bit-flipping MDP.

States are syndromes packed into Python ints (bit m = s_m); flipping bit a
XORs column a of H into the state. Reward for flipping a is
``-c * |llr_a|`` plus 1 if the new syndrome is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf2 import BitMatrix

DOMINANCE_MARGIN = 0.01


@dataclass(frozen=True, eq=False)
class MdpConfig:
    H: BitMatrix
    T: int
    llr_mag: np.ndarray
    c_scale: float
    gamma: float = 0.99
    penalty: np.ndarray = field(init=False, repr=False)
    columns: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        mag = np.asarray(self.llr_mag, dtype=float)
        if mag.shape != (self.H.cols,) or not (mag > 0).all():
            raise ValueError("llr_mag must be a positive vector of length N")
        object.__setattr__(self, "llr_mag", mag)
        if np.all(mag == mag[0]):
            # exact -1/T per flip, so the BSC rewards come out as -1/T and 1 - 1/T
            penalty = np.full(mag.shape, 1.0 / self.T)
        else:
            penalty = self.c_scale * mag
        penalty.flags.writeable = False
        object.__setattr__(self, "penalty", penalty)
        object.__setattr__(self, "columns", self.H.column_ints)

    @classmethod
    def for_llr(cls, H: BitMatrix, llr_mag, T: int = 10, gamma: float = 0.99) -> MdpConfig:
        """Choose c so that T penalties never outweigh the +1 terminal reward."""
        mag = np.asarray(llr_mag, dtype=float)
        if np.all(mag == mag[0]):
            c = 1.0 / (T * mag[0])
        else:
            c = 1.0 / (T * mag.max() * (1.0 + DOMINANCE_MARGIN))
        return cls(H, T, mag, c, gamma)

    @classmethod
    def bsc(cls, H: BitMatrix, T: int = 10, gamma: float = 0.99, p: float | None = None) -> MdpConfig:
        mag = 1.0 if p is None else float(np.log((1 - p) / p))
        return cls.for_llr(H, np.full(H.cols, mag), T, gamma)

    @property
    def N(self) -> int:
        return self.H.cols

    @property
    def M(self) -> int:
        return self.H.rows


@dataclass(frozen=True)
class MdpState:
    syndrome: int
    steps_taken: int = 0

    @property
    def terminal(self) -> bool:
        return self.syndrome == 0


def syndrome_int(cfg: MdpConfig, z) -> int:
    z = np.asarray(z, dtype=np.uint8)
    if z.shape != (cfg.N,):
        raise ValueError(f"word must have shape ({cfg.N},), got {z.shape}")
    s = 0
    for n in np.flatnonzero(z):
        s ^= cfg.columns[n]
    return s


def reset(cfg: MdpConfig, z) -> MdpState:
    return MdpState(syndrome_int(cfg, z), 0)


def transition(cfg: MdpConfig, s: int, a: int) -> tuple[int, float]:
    """Next syndrome and reward, without bookkeeping."""
    s2 = s ^ cfg.columns[a]
    r = -cfg.penalty[a]
    if s2 == 0:
        r += 1.0
    return s2, float(r)


def step(cfg: MdpConfig, state: MdpState, action: int) -> tuple[MdpState, float, bool]:
    if state.terminal:
        raise ValueError("cannot step from a terminal state")
    if state.steps_taken >= cfg.T:
        raise ValueError(f"episode already used its {cfg.T} flips")
    if not 0 <= action < cfg.N:
        raise ValueError(f"action {action} outside [0, {cfg.N})")
    s2, r = transition(cfg, state.syndrome, action)
    nxt = MdpState(s2, state.steps_taken + 1)
    return nxt, r, s2 == 0 or nxt.steps_taken == cfg.T


def episode_return(rewards, gamma: float) -> float:
    total = 0.0
    discount = 1.0
    for r in rewards:
        total += discount * r
        discount *= gamma
    return total
