"""One-hidden-layer Q-network (syndrome -> N action values) trained with Adam."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..gf2 import int_to_bits

_MAGIC = b"QNET"


class QNetwork:
    """Linear -> ReLU -> linear. Syndrome bits enter as 0.0 / 1.0."""

    PARAM_NAMES = ("W1", "b1", "W2", "b2")

    def __init__(self, M: int, hidden: int, N: int, learning_rate: float = 3e-5,
                 rng: np.random.Generator | None = None, dtype=np.float64,
                 betas: tuple[float, float] = (0.9, 0.999), adam_eps: float = 1e-8):
        rng = np.random.default_rng(0) if rng is None else rng
        self.M, self.hidden, self.N = M, hidden, N
        self.learning_rate = learning_rate
        self.betas = betas
        self.adam_eps = adam_eps
        self.dtype = np.dtype(dtype)
        shapes = [(M, hidden), (hidden,), (hidden, N), (N,)]
        sizes = [int(np.prod(sh)) for sh in shapes]
        self._flat = np.zeros(sum(sizes), dtype=self.dtype)
        offs = np.cumsum([0] + sizes)
        self.W1, self.b1, self.W2, self.b2 = (
            self._flat[o:o + n].reshape(sh) for o, n, sh in zip(offs, sizes, shapes)
        )
        lim1 = 1.0 / np.sqrt(max(M, 1))
        lim2 = 1.0 / np.sqrt(hidden)
        self.W1[...] = rng.uniform(-lim1, lim1, (M, hidden))
        self.W2[...] = rng.uniform(-lim2, lim2, (hidden, N))
        self.adam_m = np.zeros_like(self._flat)
        self.adam_v = np.zeros_like(self._flat)
        self.adam_t = 0

    @property
    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def forward(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=self.dtype)
        h = np.maximum(S @ self.W1 + self.b1, 0.0)
        return h @ self.W2 + self.b2

    def greedy_batch(self, S) -> np.ndarray:
        return np.argmax(self.forward(np.atleast_2d(S)), axis=1)

    def greedy(self, s: int) -> int:
        return int(np.argmax(self.forward(int_to_bits(s, self.M))))

    def semi_gradient(self, S, A, targets) -> tuple[float, np.ndarray]:
        """Squared error between fixed targets and Q(s, a), with its gradient.

        The gradient comes back flat, in the order W1, b1, W2, b2. Only one
        output per row enters the loss, so the output layer is gathered
        column-wise instead of multiplied in full.
        """
        S = np.asarray(S, dtype=self.dtype)
        A = np.asarray(A)
        pre = S @ self.W1 + self.b1
        h = np.maximum(pre, 0.0)
        w_out = self.W2.T[A]
        q_sa = np.einsum("ij,ij->i", h, w_out) + self.b2[A]
        diff = np.asarray(targets, dtype=self.dtype) - q_sa
        loss = float(diff @ diff)
        coef = (-2.0 * diff).astype(self.dtype)
        grad = np.zeros_like(self._flat)
        gW1, gb1, gW2, gb2 = self.split(grad)
        onehot = np.zeros((len(A), self.N), dtype=self.dtype)
        onehot[np.arange(len(A)), A] = coef
        gW2[...] = h.T @ onehot
        gb2[...] = onehot.sum(axis=0)
        dh = (coef[:, None] * w_out) * (pre > 0)
        gW1[...] = S.T @ dh
        gb1[...] = dh.sum(axis=0)
        return loss, grad

    def split(self, flat: np.ndarray) -> list[np.ndarray]:
        """Views of a flat parameter-shaped vector as [W1, b1, W2, b2]."""
        out, off = [], 0
        for p in self.params:
            out.append(flat[off:off + p.size].reshape(p.shape))
            off += p.size
        return out

    def adam_step(self, grad: np.ndarray) -> None:
        b1, b2 = self.betas
        self.adam_t += 1
        t = self.adam_t
        lr = self.learning_rate * np.sqrt(1 - b2**t) / (1 - b1**t)
        m, v = self.adam_m, self.adam_v
        m *= b1
        m += (1 - b1) * grad
        v *= b2
        v += (1 - b2) * (grad * grad)
        self._flat -= (lr * m / (np.sqrt(v) + self.adam_eps)).astype(self.dtype)

    def save(self, path, include_adam: bool = True) -> None:
        with open(path, "wb") as fh:
            fh.write(_MAGIC + struct.pack("<IIIB", self.M, self.hidden, self.N, int(include_adam)))
            for p in self.params:
                fh.write(np.ascontiguousarray(p, dtype="<f4").tobytes())
            if include_adam:
                fh.write(struct.pack("<Qd", self.adam_t, self.learning_rate))
                for arr in self.split(self.adam_m) + self.split(self.adam_v):
                    fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path, dtype=np.float32) -> QNetwork:
        raw = Path(path).read_bytes()
        if raw[:4] != _MAGIC:
            raise ValueError(f"{path}: not a Q-network file")
        M, hidden, N, has_adam = struct.unpack_from("<IIIB", raw, 4)
        net = cls(M, hidden, N, dtype=dtype)
        off = 4 + 13
        shapes = [(M, hidden), (hidden,), (hidden, N), (N,)]

        def take(shape):
            nonlocal off
            count = int(np.prod(shape))
            arr = np.frombuffer(raw, dtype="<f4", count=count, offset=off).reshape(shape)
            off += 4 * count
            return arr.astype(net.dtype)

        for p, sh in zip(net.params, shapes):
            p[...] = take(sh)
        if has_adam:
            net.adam_t, net.learning_rate = struct.unpack_from("<Qd", raw, off)
            off += 16
            for flat in (net.adam_m, net.adam_v):
                for view, sh in zip(net.split(flat), shapes):
                    view[...] = take(sh)
        if off != len(raw):
            raise ValueError(f"{path}: trailing or missing bytes")
        return net


def net_forward(net: QNetwork, s) -> np.ndarray:
    return net.forward(s)


class TransitionBatch:
    """Buffer of (s, a, r, s', terminal) tuples flushed when it holds B entries."""

    def __init__(self, capacity: int, M: int):
        self.capacity = capacity
        self.M = M
        self.S = np.zeros((capacity, M), dtype=np.uint8)
        self.A = np.zeros(capacity, dtype=np.int64)
        self.R = np.zeros(capacity)
        self.S2 = np.zeros((capacity, M), dtype=np.uint8)
        self.D = np.zeros(capacity, dtype=bool)
        self.size = 0

    def __len__(self) -> int:
        return self.size

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def add(self, s, a, r, s2, done) -> None:
        self.add_many(np.atleast_2d(s), [a], [r], np.atleast_2d(s2), [done])

    def add_many(self, S, A, R, S2, D) -> int:
        """Append as many rows as fit; return how many were taken."""
        k = min(len(A), self.capacity - self.size)
        sl = slice(self.size, self.size + k)
        self.S[sl], self.A[sl], self.R[sl] = S[:k], np.asarray(A)[:k], np.asarray(R)[:k]
        self.S2[sl], self.D[sl] = S2[:k], np.asarray(D)[:k]
        self.size += k
        return k

    def clear(self) -> None:
        self.size = 0


def bellman_targets(net: QNetwork, R, S2, D, gamma: float) -> np.ndarray:
    future = net.forward(S2).max(axis=1)
    return np.asarray(R, dtype=net.dtype) + gamma * np.where(D, 0.0, future)


def fitted_q_step(net: QNetwork, batch: TransitionBatch, gamma: float) -> float:
    """One Adam step on the summed squared Bellman residual of a full batch.

    The bootstrap term max_a' Q(s', a') is treated as a constant. Returns the
    loss before the update and empties the batch.
    """
    n = batch.size
    targets = bellman_targets(net, batch.R[:n], batch.S2[:n], batch.D[:n], gamma)
    loss, grads = net.semi_gradient(batch.S[:n], batch.A[:n], targets)
    net.adam_step(grads)
    batch.clear()
    return loss
