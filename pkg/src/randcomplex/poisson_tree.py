"""The Poisson d-tree: sampling, rooted collapse, and the atom-at-zero recursions.

A tree is stored level by level.  Level j holds the (d-1)-face nodes at
distance j from the root; ``counts[j][i]`` is the number of child d-faces
of node i on level j.  The child d-faces of level j are numbered in node
order, and d-face s owns the level j+1 nodes s*d, ..., s*d + d - 1.  A tree
of depth D has counts for levels 0..D-1; the nodes on level D are
truncation leaves whose offspring were never drawn.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .sampling import make_rng, substream_seed


def poisson_cdf_table(c: float, eps: float = 1e-17) -> np.ndarray:
    """Cumulative Poi(c) probabilities up to the point where the tail is below eps."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    pk = math.exp(-c)
    cdf = [pk]
    k = 0
    while 1.0 - cdf[-1] > eps and k < 10 * c + 100:
        k += 1
        pk *= c / k
        cdf.append(cdf[-1] + pk)
    out = np.array(cdf)
    out[-1] = 1.0
    return out


def poisson_inverse(u: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """Poisson draws by inversion of uniforms u in [0, 1)."""
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


@dataclass
class RootedTree:
    d: int
    depth: int
    counts: list = field(default_factory=list)
    root: int = 0

    def __post_init__(self):
        if len(self.counts) != self.depth:
            raise ValueError("need one count array per expanded level")
        size = 1
        for j, m in enumerate(self.counts):
            if m.size != size:
                raise ValueError(f"level {j} has {m.size} counts, expected {size}")
            size = int(m.sum()) * self.d

    def level_size(self, j: int) -> int:
        if j == 0:
            return 1
        return int(self.counts[j - 1].sum()) * self.d

    @property
    def root_degree(self) -> int:
        return int(self.counts[0][0]) if self.depth else 0

    def owners(self, j: int) -> np.ndarray:
        """Parent node (on level j) of each child d-face of level j."""
        m = self.counts[j]
        return np.repeat(np.arange(m.size), m)

    def pruned(self, depth: int) -> "RootedTree":
        if depth > self.depth:
            raise ValueError("cannot prune to a larger depth")
        return RootedTree(self.d, depth, self.counts[:depth])

    @classmethod
    def from_counts(cls, d: int, counts) -> "RootedTree":
        return cls(d, len(counts), [np.asarray(m, dtype=np.int64) for m in counts])


def sample_tree(c: float, d: int, depth: int, seed: int = 0, max_nodes: int = 50_000_000) -> RootedTree:
    """A sample of the Poisson d-tree truncated after ``depth`` generations."""
    if c <= 0 or depth < 0 or d < 1:
        raise ValueError("need c > 0, d >= 1 and depth >= 0")
    rng = make_rng(seed)
    cdf = poisson_cdf_table(c)
    counts = []
    size = 1
    for _ in range(depth):
        if size > max_nodes:
            raise MemoryError(f"tree level exceeds {max_nodes} nodes")
        m = poisson_inverse(rng.random(size), cdf)
        counts.append(m)
        size = int(m.sum()) * d
    return RootedTree(d, depth, counts)


def rooted_collapse_tree(T: RootedTree, k: int) -> int:
    """Degree of the root after k phases of root-protected collapse.

    A child d-face of a node survives k phases iff each of its d child
    (d-1)-faces still has positive degree after k-1 phases.  This reads the
    counts of levels 0..k only, so the tree must have depth at least k + 1.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if T.depth < k + 1:
        raise ValueError(f"k={k} phases need depth >= {k + 1}, tree has depth {T.depth}")
    deg = T.counts[k].copy()
    for j in range(k - 1, -1, -1):
        alive = (deg > 0).reshape(-1, T.d).all(axis=1)
        deg = np.bincount(T.owners(j), weights=alive, minlength=T.counts[j].size).astype(np.int64)
    return int(deg[0])


# lazy simulation: only the part of the tree the answer depends on is drawn

@njit(cache=True)
def _draw_poisson(cdf):
    u = np.random.random()
    k = 0
    while k < cdf.size - 1 and u >= cdf[k]:
        k += 1
    return k


@njit(cache=True)
def _survives(k, d, cdf, rem, pos):
    """Does a fresh node keep positive degree through k phases.

    Depth-first with an explicit stack; frame l has k - l phases left,
    ``rem[l]`` child d-faces still untested and ``pos[l]`` children of the
    current d-face already known to survive.  A d-face is abandoned at its
    first collapsed child and a node returns at its first surviving d-face.
    """
    top = 0
    rem[0] = _draw_poisson(cdf)
    pos[0] = 0
    res = False
    fresh = True
    while True:
        if fresh:
            fresh = False
            if top == k:
                res = rem[top] > 0
            elif rem[top] == 0:
                res = False
            else:
                top += 1
                rem[top] = _draw_poisson(cdf)
                pos[top] = 0
                fresh = True
                continue
            if top == 0:
                return res
            top -= 1
        # res is the verdict on one child of the current d-face at frame top
        if res:
            pos[top] += 1
            if pos[top] == d:
                res = True
                if top == 0:
                    return True
                top -= 1
                continue
        else:
            rem[top] -= 1
            pos[top] = 0
            if rem[top] == 0:
                res = False
                if top == 0:
                    return False
                top -= 1
                continue
        top += 1
        rem[top] = _draw_poisson(cdf)
        pos[top] = 0
        fresh = True


@njit(cache=True)
def _delta_samples(k, d, cdf, trials, seed):
    np.random.seed(seed)
    out = np.empty(trials, dtype=np.int64)
    rem = np.zeros(k + 1, dtype=np.int64)
    pos = np.zeros(k + 1, dtype=np.int64)
    for t in range(trials):
        m = _draw_poisson(cdf)
        if k == 0:
            out[t] = m
            continue
        cnt = 0
        for _ in range(m):
            ok = True
            for _ in range(d):
                if not _survives(k - 1, d, cdf, rem, pos):
                    ok = False
                    break
            if ok:
                cnt += 1
        out[t] = cnt
    return out


def delta_k_samples(c: float, d: int, k: int, trials: int, seed: int = 0) -> np.ndarray:
    """Independent draws of the root degree after k rooted-collapse phases."""
    if trials < 1 or k < 0:
        raise ValueError("need trials >= 1 and k >= 0")
    return _delta_samples(k, d, poisson_cdf_table(c), trials, substream_seed(seed, k))


def survival_pool(c: float, d: int, k: int, pool_size: int, seed: int = 0) -> np.ndarray:
    """Pool approximation of the indicators [delta_k > 0].

    Generation j rebuilds the pool from draws of generation j - 1, the same
    scheme as ``population_dynamics_x`` applied to the survival indicator.
    Cost is linear in k, whereas exact lazy trees grow geometrically in k.
    """
    rng = make_rng(seed, k)
    cdf = poisson_cdf_table(c)
    idx = np.arange(pool_size)
    alive = poisson_inverse(rng.random(pool_size), cdf) > 0
    for _ in range(k):
        m = poisson_inverse(rng.random(pool_size), cdf)
        own = np.repeat(idx, m)
        ok = alive[rng.integers(0, pool_size, size=own.size * d)].reshape(-1, d).all(axis=1)
        alive = np.bincount(own, weights=ok, minlength=pool_size) > 0
    return alive


LAZY_MAX_K = 12


def collapse_probability_empirical(c: float, d: int, k: int, trials: int, seed: int = 0,
                                   method: str = "auto") -> float:
    """Fraction of trees whose root is bare after k phases.

    ``method="tree"`` draws independent lazy trees; ``"pool"`` uses
    ``survival_pool``; ``"auto"`` picks trees for k <= LAZY_MAX_K.
    """
    if method == "auto":
        method = "tree" if k <= LAZY_MAX_K else "pool"
    if method == "tree":
        return float(np.mean(delta_k_samples(c, d, k, trials, seed) == 0))
    if method == "pool":
        return float(np.mean(~survival_pool(c, d, k, trials, seed)))
    raise ValueError("method must be 'auto', 'tree' or 'pool'")


# atom at zero --------------------------------------------------------------

BOUNDARIES = ("zero", "one")


def x_tree(T: RootedTree, boundary: str = "one") -> float:
    """Atom at zero of the root's spectral measure, evaluated bottom-up.

    Truncation leaves take the boundary constant; nodes without children
    take 1.  A d-face whose d children all vanish forces its parent to 0.
    """
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}")
    x = np.full(T.level_size(T.depth), 0.0 if boundary == "zero" else 1.0)
    for j in range(T.depth - 1, -1, -1):
        m = T.counts[j]
        s = x.reshape(-1, T.d).sum(axis=1)
        own = T.owners(j)
        zero_branch = np.bincount(own, weights=s == 0, minlength=m.size) > 0
        inv = np.bincount(own, weights=np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), 0.0), minlength=m.size)
        x = np.where(zero_branch, 0.0, 1.0 / (1.0 + inv))
    return float(x[0])


def h_recursion(T: RootedTree, s: float, boundary: complex = 1.0) -> complex:
    """Resolvent-type value h_T(s), with h (1 + sum_j (is + sum_r h_jr)^-1) = 1."""
    if s == 0:
        raise ValueError("h_recursion is singular at s = 0")
    h = np.full(T.level_size(T.depth), complex(boundary), dtype=np.complex128)
    for j in range(T.depth - 1, -1, -1):
        m = T.counts[j]
        branch = 1.0 / (1j * s + h.reshape(-1, T.d).sum(axis=1))
        own = T.owners(j)
        acc = np.bincount(own, weights=branch.real, minlength=m.size) \
            + 1j * np.bincount(own, weights=branch.imag, minlength=m.size)
        h = 1.0 / (1.0 + acc)
    return complex(h[0])


@dataclass(frozen=True)
class PopulationResult:
    mean_x: float
    p_positive: float
    mean_stderr: float
    positive_stderr: float
    pool: np.ndarray


def population_dynamics_x(c: float, d: int, pool_size: int = 10_000, iterations: int = 200,
                          seed: int = 0, init: str = "zero") -> PopulationResult:
    """Pool estimate of the law of x_T under the tree recursion.

    Each generation rebuilds the whole pool: a new member draws m ~ Poi(c)
    and m*d members of the previous pool and applies the recursion.
    Starting from all zeros the positive fraction follows the collapse
    probabilities t_0, t_1, ... and so settles on the smallest fixed point.
    """
    if init not in ("zero", "one"):
        raise ValueError("init must be 'zero' or 'one'")
    if pool_size < 1 or iterations < 0:
        raise ValueError("need pool_size >= 1 and iterations >= 0")
    rng = make_rng(seed)
    cdf = poisson_cdf_table(c)
    pool = np.full(pool_size, 0.0 if init == "zero" else 1.0)
    idx = np.arange(pool_size)
    for _ in range(iterations):
        m = poisson_inverse(rng.random(pool_size), cdf)
        own = np.repeat(idx, m)
        draws = pool[rng.integers(0, pool_size, size=own.size * d)]
        s = draws.reshape(-1, d).sum(axis=1)
        zero_branch = np.bincount(own, weights=s == 0, minlength=pool_size) > 0
        inv = np.bincount(own, weights=np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), 0.0),
                          minlength=pool_size)
        pool = np.where(zero_branch, 0.0, 1.0 / (1.0 + inv))
    pos = pool > 0
    return PopulationResult(
        mean_x=float(pool.mean()),
        p_positive=float(pos.mean()),
        mean_stderr=float(pool.std(ddof=1) / math.sqrt(pool_size)) if pool_size > 1 else 0.0,
        positive_stderr=float(pos.std(ddof=1) / math.sqrt(pool_size)) if pool_size > 1 else 0.0,
        pool=pool,
    )
