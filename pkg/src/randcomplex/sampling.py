"""Seeded samplers for Y_d(n, p), Y_d(n, m) and the one-face-at-a-time evolution.

Streams are numpy Philox generators keyed by ``SeedSequence(seed,
spawn_key=(trial, ...))``, so trial t of a run draws the same numbers no
matter which worker executes it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .faces import MAX_RANK, Complex

MODELS = ("binomial", "uniform_m", "evolution")


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) % 2 ** 64, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def substream_seed(seed: int, *keys: int) -> int:
    """A 32-bit seed derived from (seed, keys), for generators outside numpy."""
    ss = np.random.SeedSequence(int(seed) % 2 ** 64, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class SampleConfig:
    n: int
    d: int
    p: float | None = None
    c: float | None = None
    seed: int = 0
    model: str = "binomial"
    trial: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.d < 1 or self.n <= self.d + 1:
            raise ValueError("need d >= 1 and n > d + 1")
        if self.c is not None and self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.p is not None and self.c is not None:
            raise ValueError("give p or c, not both")
        p = self.prob
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")

    @property
    def prob(self) -> float:
        if self.p is not None:
            return float(self.p)
        if self.c is not None:
            return float(self.c) / self.n
        return 0.0

    @property
    def total_faces(self) -> int:
        return math.comb(self.n, self.d + 1)

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed, self.trial)


def _check_range(total: int) -> None:
    if total >= MAX_RANK:
        raise OverflowError("C(n, d+1) exceeds the int64 rank range")


def sample_binomial(cfg: SampleConfig) -> Complex:
    """Each d-face independently with probability p, via geometric skips over colex order."""
    total = cfg.total_faces
    _check_range(total)
    p = cfg.prob
    if p <= 0.0:
        return Complex(cfg.n, cfg.d, np.zeros(0, dtype=np.int64))
    if p >= 1.0:
        return Complex(cfg.n, cfg.d, np.arange(total, dtype=np.int64))
    rng = cfg.rng()
    chunks = []
    pos = -1
    batch = int(total * p + 6 * math.sqrt(total * p) + 64)
    while True:
        gaps = rng.geometric(p, size=batch).astype(np.int64)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            chunks.append(idx[idx < total])
            break
        chunks.append(idx)
        pos = int(idx[-1])
        batch = max(64, batch // 4)
    return Complex(cfg.n, cfg.d, np.concatenate(chunks))


def evolution_stream(cfg: SampleConfig) -> Iterator[int]:
    """A uniformly random ordering of all d-face ranks, generated lazily.

    Sparse Fisher-Yates: the virtual identity array is overridden by a dict
    of displaced entries, so a prefix of length m costs O(m) time and memory.
    """
    total = cfg.total_faces
    rng = cfg.rng()
    moved: dict[int, int] = {}
    i = 0
    block = 4096
    while i < total:
        hi = min(total, i + block)
        # j_i uniform on [i, total)
        js = rng.integers(np.arange(i, hi, dtype=np.int64), total)
        for j in js.tolist():
            vi = moved.get(i, i)
            vj = moved.get(j, j)
            moved[j] = vi
            moved.pop(i, None)
            yield vj
            i += 1
        block = min(block * 2, 1 << 20)


def sample_uniform_m(cfg: SampleConfig, m: int) -> Complex:
    """Exactly m distinct uniform d-faces: the length-m prefix of the evolution stream."""
    total = cfg.total_faces
    if not 0 <= m <= total:
        raise ValueError(f"m must lie in [0, {total}]")
    it = evolution_stream(cfg)
    faces = np.fromiter((next(it) for _ in range(m)), dtype=np.int64, count=m)
    return Complex(cfg.n, cfg.d, faces)


def sample(cfg: SampleConfig, m: int | None = None) -> Complex:
    if cfg.model == "binomial":
        return sample_binomial(cfg)
    if m is None:
        m = int(round(cfg.prob * cfg.total_faces))
    return sample_uniform_m(cfg, m)
