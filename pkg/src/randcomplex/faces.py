"""Faces, complexes and boundary matrices.

A k-face is a k-subset of {0..n-1}, identified by its colex rank
sum_i C(v_i, i+1) over its sorted vertices.  A d-complex always carries the
full (d-1)-skeleton implicitly; only its d-faces are stored, as a sorted
int64 array of ranks.  Orientation is the sorted vertex order, so dropping
vertex i from a d-face contributes sign (-1)^i to the boundary.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_RANK = 2 ** 62


class MalformedFace(ValueError):
    pass


def face_rank(vertices: Sequence[int], n: int) -> int:
    vs = [int(v) for v in vertices]
    if not vs:
        raise MalformedFace("empty face")
    prev = -1
    for v in vs:
        if v <= prev or v >= n:
            raise MalformedFace(f"not a strictly increasing subset of range({n}): {vs}")
        prev = v
    return sum(math.comb(v, i + 1) for i, v in enumerate(vs))


def face_unrank(rank: int, n: int, k: int) -> list[int]:
    rank = int(rank)
    if not 0 <= rank < math.comb(n, k):
        raise IndexError(f"rank {rank} out of range for C({n},{k})")
    out = [0] * k
    hi = n - 1
    for i in range(k, 0, -1):
        # largest v <= hi with C(v, i) <= rank
        lo_v, hi_v = i - 1, hi
        while lo_v < hi_v:
            mid = (lo_v + hi_v + 1) // 2
            if math.comb(mid, i) <= rank:
                lo_v = mid
            else:
                hi_v = mid - 1
        out[i - 1] = lo_v
        rank -= math.comb(lo_v, i)
        hi = lo_v - 1
    return out


@lru_cache(maxsize=64)
def comb_table(n: int, k: int) -> np.ndarray:
    """C(v, k) for v = 0..n as int64 (read-only)."""
    if math.comb(n, k) >= MAX_RANK:
        raise OverflowError(f"C({n},{k}) does not fit the int64 rank range")
    t = np.array([math.comb(v, k) for v in range(n + 1)], dtype=np.int64)
    t.flags.writeable = False
    return t


def ranks_of(vertices: np.ndarray, n: int) -> np.ndarray:
    """Vectorised colex rank of the rows of a sorted (m, k) vertex array."""
    vertices = np.asarray(vertices, dtype=np.int64)
    m, k = vertices.shape
    r = np.zeros(m, dtype=np.int64)
    for i in range(k):
        r += comb_table(n, i + 1)[vertices[:, i]]
    return r


def unrank_array(ranks: np.ndarray, n: int, k: int) -> np.ndarray:
    """Vectorised inverse of ranks_of; returns an (m, k) sorted vertex array."""
    r = np.asarray(ranks, dtype=np.int64).copy()
    out = np.empty((r.size, k), dtype=np.int64)
    for i in range(k, 0, -1):
        t = comb_table(n, i)
        v = np.searchsorted(t, r, side="right") - 1
        out[:, i - 1] = v
        r -= t[v]
    return out


def facet_ranks(vertices: np.ndarray, n: int) -> np.ndarray:
    """Ranks of the d+1 facets of each d-face; column i drops vertex i."""
    vertices = np.asarray(vertices, dtype=np.int64)
    m, k = vertices.shape
    out = np.empty((m, k), dtype=np.int64)
    for i in range(k):
        sub = np.delete(vertices, i, axis=1)
        out[:, i] = ranks_of(sub, n) if k > 1 else 0
    return out


def boundary_faces(sigma: Sequence[int]) -> list[tuple[list[int], int]]:
    s = [int(v) for v in sigma]
    if any(b <= a for a, b in zip(s, s[1:])):
        raise MalformedFace(f"face must be strictly increasing: {s}")
    return [(s[:i] + s[i + 1:], -1 if i % 2 else 1) for i in range(len(s))]


@dataclass(frozen=True)
class Complex:
    """A d-complex with full (d-1)-skeleton on n vertices."""

    n: int
    d: int
    faces: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        f = np.unique(np.asarray(self.faces, dtype=np.int64))
        total = math.comb(self.n, self.d + 1)
        if f.size and (f[0] < 0 or f[-1] >= total):
            raise MalformedFace("face rank out of range")
        f.flags.writeable = False
        object.__setattr__(self, "faces", f)

    @classmethod
    def from_vertex_lists(cls, n: int, d: int, faces: Iterable[Sequence[int]]) -> "Complex":
        fl = [sorted(f) for f in faces]
        for f in fl:
            if len(f) != d + 1:
                raise MalformedFace(f"expected {d + 1} vertices, got {f}")
        return cls(n, d, np.array([face_rank(f, n) for f in fl], dtype=np.int64))

    @property
    def f_d(self) -> int:
        return int(self.faces.size)

    @property
    def f_dminus1(self) -> int:
        return math.comb(self.n, self.d)

    def vertices(self) -> np.ndarray:
        return unrank_array(self.faces, self.n, self.d + 1)

    def facets(self) -> np.ndarray:
        return facet_ranks(self.vertices(), self.n)

    def with_faces(self, extra: Iterable[int]) -> "Complex":
        return Complex(self.n, self.d, np.concatenate([self.faces, np.asarray(list(extra), dtype=np.int64)]))

    def __contains__(self, rank) -> bool:
        i = np.searchsorted(self.faces, rank)
        return bool(i < self.faces.size and self.faces[i] == rank)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Complex):
            return NotImplemented
        return self.n == other.n and self.d == other.d and np.array_equal(self.faces, other.faces)

    def __hash__(self):
        return hash((self.n, self.d, self.faces.tobytes()))

    # serialisation
    def to_json(self) -> str:
        return json.dumps({"n": self.n, "d": self.d, "faces": [int(r) for r in self.faces]})

    @classmethod
    def from_json(cls, text: str) -> "Complex":
        obj = json.loads(text)
        return cls(int(obj["n"]), int(obj["d"]), np.array(obj["faces"], dtype=np.int64))

    def to_text(self) -> str:
        lines = [f"{self.n} {self.d}"]
        lines += [" ".join(map(str, row)) for row in self.vertices().tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Complex":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        n, d = int(rows[0][0]), int(rows[0][1])
        return cls.from_vertex_lists(n, d, ([int(v) for v in r] for r in rows[1:]))


def load_complex(path: str) -> Complex:
    with open(path) as fh:
        text = fh.read()
    return Complex.from_json(text) if text.lstrip().startswith("{") else Complex.from_text(text)


def save_complex(Y: Complex, path: str, fmt: str = "json") -> None:
    with open(path, "w") as fh:
        fh.write(Y.to_json() if fmt == "json" else Y.to_text())


@dataclass
class IncidenceIndex:
    """Mutable incidence state between the d-faces of a complex and their facets.

    ``ridges`` is the sorted array of (d-1)-face ranks of positive initial
    degree; every per-ridge array is indexed by position in ``ridges``.
    Exposed (d-1)-faces of the skeleton are implicit.  ``owner_xor`` holds
    the xor of the indices of alive faces through each ridge, so a ridge of
    degree 1 names its unique containing face in O(1).
    """

    n: int
    d: int
    faces: np.ndarray        # (m,) d-face ranks
    boundary: np.ndarray     # (m, d+1) ridge indices; column i drops vertex i
    ridges: np.ndarray       # (R,) ridge ranks
    alive: np.ndarray        # (m,) bool
    degree: np.ndarray       # (R,) current degree
    owner_xor: np.ndarray    # (R,)
    ptr: np.ndarray          # CSR ridge -> containing faces (static)
    members: np.ndarray
    protected: np.ndarray    # (R,) bool; never used as a free face
    phases: int = 0
    pairs: list = field(default_factory=list)

    def copy(self) -> "IncidenceIndex":
        return IncidenceIndex(
            self.n, self.d, self.faces, self.boundary, self.ridges, self.alive.copy(),
            self.degree.copy(), self.owner_xor.copy(), self.ptr, self.members,
            self.protected.copy(), self.phases, list(self.pairs),
        )

    def ridge_index(self, rank: int) -> int:
        """Position of a (d-1)-face rank in ``ridges`` or -1 if it has degree 0."""
        i = int(np.searchsorted(self.ridges, rank))
        return i if i < self.ridges.size and self.ridges[i] == rank else -1

    def containing(self, ridge: int) -> np.ndarray:
        """All faces (alive or not) that contain ridge index ``ridge``."""
        return self.members[self.ptr[ridge]:self.ptr[ridge + 1]]

    def degree_of(self, rank: int) -> int:
        i = self.ridge_index(rank)
        return 0 if i < 0 else int(self.degree[i])

    def current(self) -> Complex:
        return Complex(self.n, self.d, self.faces[self.alive])

    @property
    def f_d(self) -> int:
        return int(self.alive.sum())


def build_incidence(Y: Complex) -> IncidenceIndex:
    m = Y.f_d
    fr = Y.facets() if m else np.zeros((0, Y.d + 1), dtype=np.int64)
    ridges, inv = np.unique(fr.ravel(), return_inverse=True)
    boundary = inv.reshape(m, Y.d + 1).astype(np.int64)
    R = ridges.size
    degree = np.bincount(boundary.ravel(), minlength=R).astype(np.int64)
    order = np.argsort(boundary.ravel(), kind="stable")
    members = (order // (Y.d + 1)).astype(np.int64)
    ptr = np.zeros(R + 1, dtype=np.int64)
    np.cumsum(degree, out=ptr[1:])
    # every listed ridge has degree >= 1, so reduceat segments are nonempty
    owner = np.bitwise_xor.reduceat(members, ptr[:-1]) if R else np.zeros(0, dtype=np.int64)
    return IncidenceIndex(
        n=Y.n, d=Y.d, faces=Y.faces, boundary=boundary, ridges=ridges,
        alive=np.ones(m, dtype=bool), degree=degree, owner_xor=owner, ptr=ptr,
        members=members, protected=np.zeros(R, dtype=bool),
    )


@dataclass(frozen=True)
class SparseBoundary:
    """Signed incidence matrix of the top boundary map in COO form.

    Row ``i`` is the (d-1)-face ``row_ranks[i]``; column ``j`` is the d-face
    ``col_ranks[j]``.  Every column holds exactly d+1 entries with signs
    (-1)^0..(-1)^d when all its facets are retained.
    """

    n: int
    d: int
    row_ranks: np.ndarray
    col_ranks: np.ndarray
    row: np.ndarray
    col: np.ndarray
    sign: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.row_ranks.size), int(self.col_ranks.size)

    @property
    def nnz(self) -> int:
        return int(self.sign.size)

    def to_dense(self) -> np.ndarray:
        a = np.zeros(self.shape, dtype=np.int64)
        a[self.row, self.col] = self.sign
        return a

    def to_scipy(self):
        from scipy import sparse
        return sparse.csc_matrix((self.sign, (self.row, self.col)), shape=self.shape)


def boundary_matrix(Y: Complex, rows: np.ndarray | str | None = None) -> SparseBoundary:
    """Assemble the boundary matrix of the top dimension.

    ``rows`` selects the retained (d-1)-faces: None keeps all C(n, d) of them,
    "support" keeps those of positive degree, an array keeps the given ranks
    (entries in dropped rows are omitted).
    """
    fr = Y.facets() if Y.f_d else np.zeros((0, Y.d + 1), dtype=np.int64)
    if rows is None:
        row_ranks = np.arange(math.comb(Y.n, Y.d), dtype=np.int64)
    elif isinstance(rows, str):
        if rows != "support":
            raise ValueError(f"unknown row selection {rows!r}")
        row_ranks = np.unique(fr.ravel())
    else:
        row_ranks = np.unique(np.asarray(rows, dtype=np.int64))
    k = Y.d + 1
    col = np.repeat(np.arange(Y.f_d, dtype=np.int64), k)
    sign = np.tile(np.where(np.arange(k) % 2 == 0, 1, -1).astype(np.int64), Y.f_d)
    flat = fr.ravel()
    pos = np.searchsorted(row_ranks, flat)
    pos_c = np.minimum(pos, max(row_ranks.size - 1, 0))
    keep = (pos < row_ranks.size) & (row_ranks[pos_c] == flat) if row_ranks.size else np.zeros(flat.size, bool)
    for a in (row_ranks, Y.faces):
        a.flags.writeable = False
    return SparseBoundary(Y.n, Y.d, row_ranks, Y.faces, pos[keep], col[keep], sign[keep])


def full_skeleton(n: int, d: int) -> Complex:
    return Complex(n, d, np.arange(math.comb(n, d + 1), dtype=np.int64))


def simplex_boundary(vertices: Sequence[int], n: int) -> Complex:
    """All facets of the simplex on ``vertices`` as a (len-2)-complex."""
    vs = sorted(vertices)
    d = len(vs) - 2
    return Complex.from_vertex_lists(n, d, [f for f, _ in boundary_faces(vs)])
