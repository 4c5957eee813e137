"""Exploration policies: epsilon-greedy and (epsilon, epsilon_g)-goal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_GREEDY = "eps_greedy"
EPS_GOAL = "eps_goal"


@dataclass(frozen=True)
class Schedule:
    """Epsilon as a function of the episode index (0-based)."""

    kind: str = "constant"
    start: float = 0.0
    end: float = 0.0
    episodes: int = 1

    def value(self, episode: int) -> float:
        if self.kind == "constant" or self.episodes <= 0:
            return self.start
        frac = min(episode / self.episodes, 1.0)
        return self.start + (self.end - self.start) * frac

    @classmethod
    def parse(cls, text: str, total_episodes: int) -> Schedule:
        """Parse ``constant:<eps>`` or ``linear:<start>:<end>:<length>``.

        ``length`` may be an integer or a multiple of the total budget such as
        ``0.9K``.
        """
        parts = text.split(":")
        if parts[0] == "constant" and len(parts) == 2:
            v = float(parts[1])
            return cls("constant", v, v, 0)
        if parts[0] == "linear" and len(parts) == 4:
            length = parts[3]
            if length.endswith("K"):
                n = int(round(float(length[:-1] or 1) * total_episodes))
            else:
                n = int(length)
            return cls("linear", float(parts[1]), float(parts[2]), n)
        raise ValueError(f"bad schedule {text!r}; use constant:<eps> or linear:<start>:<end>:<n|xK>")


@dataclass(frozen=True)
class ExploreSpec:
    kind: str = EPS_GOAL
    eps: float = 0.6
    eps_g: float = 0.3
    schedule: Schedule | None = None

    def __post_init__(self):
        if self.kind not in (EPS_GREEDY, EPS_GOAL):
            raise ValueError(f"unknown exploration kind {self.kind!r}")
        if self.eps < 0 or self.eps_g < 0:
            raise ValueError("exploration probabilities must be non-negative")
        if self.kind == EPS_GOAL and self.eps + self.eps_g >= 1:
            raise ValueError("goal exploration needs eps + eps_g < 1")
        if self.kind == EPS_GREEDY and self.eps > 1:
            raise ValueError("eps must be <= 1")

    def eps_at(self, episode: int) -> float:
        return self.eps if self.schedule is None else self.schedule.value(episode)

    @property
    def goal_prob(self) -> float:
        return self.eps_g if self.kind == EPS_GOAL else 0.0


def pick_action(eps: float, eps_g: float, u1: float, u2: float, n: int, support, greedy) -> int:
    """Map two uniforms onto the exploration branches.

    ``u1`` picks the branch, ``u2`` the element; ``greedy`` is a zero-argument
    callable so the greedy action is only computed when needed.
    """
    if u1 < eps:
        return min(int(u2 * n), n - 1)
    if u1 < eps + eps_g and support:
        return support[min(int(u2 * len(support)), len(support) - 1)]
    return greedy()


def explore_action(spec: ExploreSpec, q, s: int, rng: np.random.Generator,
                   error_support=None, episode: int = 0) -> int:
    """Exploratory action for syndrome ``s``.

    ``error_support`` lists the positions still in error (channel errors
    XOR flips so far); it is only consulted by goal exploration and an empty
    support falls through to the greedy branch.
    """
    u1, u2 = rng.random(2)
    support = list(error_support) if error_support is not None else []
    return pick_action(spec.eps_at(episode), spec.goal_prob, u1, u2, q.N, support,
                       lambda: q.greedy(s))
