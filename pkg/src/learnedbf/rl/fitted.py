"""Fitted Q-learning with a one-hidden-layer network.

Episodes run in lockstep across ``n_envs`` independent environments so that
action selection and the Bellman updates are batched matrix products. Every
transition goes into one buffer of capacity B; the moment it is full the
network takes one Adam step and the buffer is emptied. Actions are therefore
always chosen with parameters at most one batch old.
"""

from __future__ import annotations

import numpy as np

from ..evaluation import LearningCurve, record_outcome
from ..gf2 import mod2_matmul
from ..mdp import MdpConfig
from .explore import Schedule
from .network import QNetwork, TransitionBatch, fitted_q_step
from .policy import lbf_decode_batch
from .sources import error_source


def default_hidden(N: int) -> int:
    """Hidden width used for the codes studied: 1500 at N >= 128, else 500."""
    return 1500 if N >= 128 else 500


def train_fitted(code, H, channel_spec, mdp_cfg: MdpConfig, schedule: Schedule, B: int = 100,
                 alpha: float = 3e-5, episodes: int = 100_000, rng: np.random.Generator = None,
                 hidden: int | None = None, net: QNetwork | None = None, eps_g: float = 0.0,
                 n_envs: int | None = None, record_curve: bool = False,
                 dtype=np.float32, loss_log: list | None = None) -> tuple[QNetwork, LearningCurve]:
    """Train a Q-network on ``episodes`` fresh channel words.

    ``schedule`` gives epsilon per episode index. ``eps_g`` optionally adds
    the goal branch (flip a bit that is still in error). With
    ``record_curve`` each new word is first decoded greedily by the current
    network and the outcome logged, as in tabular training.
    """
    if mdp_cfg.H.shape != H.shape:
        raise ValueError("mdp_cfg was built for a different parity-check matrix")
    rng = np.random.default_rng() if rng is None else rng
    M, N = H.shape
    T, gamma = mdp_cfg.T, mdp_cfg.gamma
    if net is None:
        net = QNetwork(M, hidden or default_hidden(N), N, alpha, rng, dtype)
    n_envs = B if n_envs is None else n_envs
    source = error_source(N, channel_spec)
    HT = np.ascontiguousarray(H.dense.T)
    penalty = np.asarray(mdp_cfg.penalty, dtype=float)
    curve = LearningCurve()
    batch = TransitionBatch(B, M)

    S = np.zeros((n_envs, M), dtype=np.uint8)
    resid = np.zeros((n_envs, N), dtype=np.uint8)
    steps = np.zeros(n_envs, dtype=np.int64)
    eps = np.zeros(n_envs)
    live = np.zeros(n_envs, dtype=bool)
    started = 0

    while True:
        free = np.flatnonzero(~live)
        if free.size and started < episodes:
            count = min(free.size, episodes - started)
            E = source.sample(rng, count)
            S0 = mod2_matmul(E, HT)
            if record_curve:
                est = lbf_decode_batch(net, H, E, T).estimates
                for ok in ~est.any(axis=1):
                    record_outcome(curve, bool(ok))
            nz = np.flatnonzero(S0.any(axis=1))
            slots = free[:nz.size]
            S[slots] = S0[nz]
            resid[slots] = E[nz]
            steps[slots] = 0
            eps[slots] = [schedule.value(started + int(i)) for i in nz]
            live[slots] = True
            started += count

        act = np.flatnonzero(live)
        if act.size == 0:
            if started >= episodes:
                break
            continue

        Sa = S[act]
        u = rng.random(act.size)
        a = net.greedy_batch(Sa)
        explore = u < eps[act]
        a[explore] = rng.integers(0, N, int(explore.sum()))
        if eps_g:
            goal = ~explore & (u < eps[act] + eps_g)
            if goal.any():
                keys = rng.random((int(goal.sum()), N)) * resid[act[goal]]
                has = keys.max(axis=1) > 0
                picks = np.argmax(keys, axis=1)
                ga = a[goal]
                ga[has] = picks[has]
                a[goal] = ga

        S2 = Sa ^ HT[a]
        matched = ~S2.any(axis=1)
        r = -penalty[a] + matched
        steps[act] += 1
        done = matched | (steps[act] >= T)

        off = 0
        while off < act.size:
            off += batch.add_many(Sa[off:], a[off:], r[off:], S2[off:], done[off:])
            if batch.full:
                loss = fitted_q_step(net, batch, gamma)
                if loss_log is not None:
                    loss_log.append(loss)

        S[act] = S2
        resid[act, a] ^= 1
        live[act[done]] = False
    return net, curve
