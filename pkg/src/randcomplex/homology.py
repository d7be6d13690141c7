"""Top Betti numbers, regime classification and the R-shadow.

Ranks are exact.  Over a prime field the boundary matrix goes straight into
the sparse/dense eliminator.  Over the rationals we certify a prime-field
rank instead of redoing the work with big integers when we can:

* rank_q <= rank_Q always, and rank_Q <= rows' where rows' is the row count
  after deleting an acyclic set of rows (a spanning forest of the edge graph
  for d = 2, the faces through one vertex otherwise).  Deleting such rows
  never changes the rank over any field, since the column space consists of
  cycles and no nonzero cycle lives on an acyclic set.
* rank_Q <= cols - (independent integer right-kernel vectors verified
  exactly), and likewise rank_Q <= rows' - (verified left-kernel vectors).
  Kernel vectors mod q are lifted by rational reconstruction.

If either bound meets rank_q, rank_Q = rank_q.  Otherwise the matrix is
eliminated fraction-free over the integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree

from .collapse import collapse_to_core, simplex_boundaries
from .faces import Complex, SparseBoundary, boundary_matrix, facet_ranks, unrank_array
from .linalg import FAST_PRIME, PRIME, RATIONAL, FieldChoice, eliminate

REGIMES = ("collapsible_or_gravel", "acyclic_except_gravel", "cyclic")


@dataclass(frozen=True)
class RankResult:
    rank: int
    kernel_dim: int
    cokernel_dim: int
    rows: int
    cols: int
    certified: bool = True
    method: str = ""


def _column_equations(M: SparseBoundary, keep_rows: np.ndarray | None = None) -> tuple[list[dict], int]:
    """One equation per column over the (kept) rows, variables renumbered 0..r'-1."""
    rows = M.row
    cols = M.col
    sign = M.sign
    nrows = M.shape[0]
    if keep_rows is not None:
        newid = np.full(nrows, -1, dtype=np.int64)
        newid[keep_rows] = np.arange(keep_rows.size)
        rows = newid[rows]
        ok = rows >= 0
        rows, cols, sign = rows[ok], cols[ok], sign[ok]
        nrows = keep_rows.size
    eqs = [dict() for _ in range(M.shape[1])]
    for r, c, s in zip(rows.tolist(), cols.tolist(), sign.tolist()):
        eqs[c][r] = s
    return eqs, nrows


def _row_equations(M: SparseBoundary, keep_rows: np.ndarray | None = None) -> list[dict]:
    rows = M.row
    if keep_rows is not None:
        mask = np.zeros(M.shape[0], dtype=bool)
        mask[keep_rows] = True
        sel = mask[rows]
    else:
        sel = np.ones(rows.size, dtype=bool)
    eqs: dict[int, dict] = {}
    for r, c, s in zip(rows[sel].tolist(), M.col[sel].tolist(), M.sign[sel].tolist()):
        eqs.setdefault(r, {})[c] = s
    return list(eqs.values())


def acyclic_rows(M: SparseBoundary) -> np.ndarray:
    """Indices of rows forming an acyclic set among the rows that carry entries."""
    used = np.unique(M.row)
    if used.size == 0:
        return used
    V = unrank_array(M.row_ranks[used], M.n, M.d)
    if M.d == 1:
        # rows are vertices; one vertex per connected component spans nothing
        return np.zeros(0, dtype=np.int64)
    if M.d == 2:
        g = coo_matrix((np.ones(used.size), (V[:, 0], V[:, 1])), shape=(M.n, M.n)).tocsr()
        t = minimum_spanning_tree(g).tocoo()
        a, b = np.minimum(t.row, t.col), np.maximum(t.row, t.col)
        key = a.astype(np.int64) + b.astype(np.int64) * (b.astype(np.int64) - 1) // 2
        pos = np.searchsorted(M.row_ranks[used], key)
        return used[pos]
    counts = np.bincount(V.ravel(), minlength=M.n)
    v = int(np.argmax(counts))
    return used[(V == v).any(axis=1)]


def _rational_reconstruct(a: int, q: int) -> tuple[int, int] | None:
    bound = math.isqrt(q // 2)
    r0, r1, s0, s1 = q, a % q, 0, 1
    while r1 > bound:
        k = r0 // r1
        r0, r1 = r1, r0 - k * r1
        s0, s1 = s1, s0 - k * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return r1, s1


def _lift_kernel_vector(x: np.ndarray, q: int) -> np.ndarray | None:
    nz = np.flatnonzero(x)
    nums, dens = [], []
    for a in x[nz].tolist():
        rs = _rational_reconstruct(int(a), q)
        if rs is None:
            return None
        nums.append(rs[0])
        dens.append(rs[1])
    L = 1
    for dd in dens:
        L = L * dd // math.gcd(L, dd)
    out = np.zeros(x.size, dtype=object)
    out[:] = 0
    for i, nu, dd in zip(nz.tolist(), nums, dens):
        out[i] = nu * (L // dd)
    return out


def _annihilates(src: np.ndarray, dst: np.ndarray, sign: np.ndarray, v: np.ndarray, nout: int) -> bool:
    """Exact check that the matrix with entries (dst, src) -> sign maps v to zero."""
    acc = [0] * nout
    vl = v.tolist()
    for i, o, sg in zip(src.tolist(), dst.tolist(), sign.tolist()):
        if vl[i]:
            acc[o] += sg * vl[i]
    return not any(acc)


KERNEL_LIFT_MAX = 256


def _kernel_certified(el, q: int, check) -> bool:
    """Do integer lifts of all mod-q kernel vectors of ``el`` pass the exact ``check``?

    Each lift is nonzero on its own free variable only, so verified lifts are
    independent over Q and bound the rational kernel from below.
    """
    free = el.free_vars()
    if free.size > KERNEL_LIFT_MAX:
        return False
    X = el.kernel_vectors(np.eye(free.size, dtype=np.int64))
    for i in range(free.size):
        v = _lift_kernel_vector(X[:, i], q)
        if v is None or not check(v):
            return False
    return True


def rank_boundary(M: SparseBoundary, field: FieldChoice = RATIONAL, certify: bool = True) -> RankResult:
    """Exact rank of a boundary matrix over the chosen field."""
    nrows, ncols = M.shape

    def result(rank, method, certified=True):
        return RankResult(rank, ncols - rank, nrows - rank, nrows, ncols, certified, method)

    if M.nnz == 0:
        return result(0, "empty")
    T = acyclic_rows(M)
    used = np.unique(M.row)
    keep = np.setdiff1d(used, T, assume_unique=True)
    if field.kind == "prime":
        eqs, nv = _column_equations(M, keep)
        return result(eliminate(eqs, nv, field.q, record=False).rank, "prime")
    if certify:
        q = FAST_PRIME.q
        newid = np.full(nrows, -1, dtype=np.int64)
        newid[keep] = np.arange(keep.size)
        kr = newid[M.row]
        ok = kr >= 0

        def left_check(y):
            return _annihilates(kr[ok], M.col[ok], M.sign[ok], y, ncols)

        def right_check(x):
            return _annihilates(M.col, M.row, M.sign, x, nrows)

        # eliminate in the orientation whose kernel is expected to be small
        orders = ("left", "right") if keep.size <= ncols else ("right", "left")
        for side in orders:
            if side == "left":
                eqs, nv = _column_equations(M, keep)
                el = eliminate(eqs, nv, q)
            else:
                el = eliminate(_row_equations(M, keep), ncols, q)
            rank_q = el.rank
            if rank_q == keep.size:
                return result(rank_q, "certified-row-bound")
            if rank_q == ncols:
                return result(rank_q, "certified-col-bound")
            if _kernel_certified(el, q, left_check if side == "left" else right_check):
                return result(rank_q, f"certified-{side}-kernel")
    eqs, nv = _column_equations(M, keep)
    return result(eliminate(eqs, nv, None, record=False).rank, "fraction-free")


def betti_d(Y: Complex, field: FieldChoice = RATIONAL) -> int:
    """beta_d = f_d - rank of the top boundary map, on Y as given."""
    if Y.f_d == 0:
        return 0
    return rank_boundary(boundary_matrix(Y, rows="support"), field).kernel_dim


def betti_via_core(Y: Complex, field: FieldChoice = RATIONAL) -> int:
    """beta_d computed on the d-core, which has the same top homology."""
    core = collapse_to_core(Y).core
    if core.f_d == 0:
        return 0
    return betti_d(core, field)


def betti_details(Y: Complex, field: FieldChoice = RATIONAL, via_core: bool = True) -> dict:
    Z = collapse_to_core(Y).core if via_core else Y
    if Z.f_d == 0:
        rr = RankResult(0, 0, 0, 0, 0, True, "empty")
    else:
        rr = rank_boundary(boundary_matrix(Z, rows="support"), field)
    return {"betti": rr.kernel_dim, "rank": rr.rank, "f_d": Y.f_d, "f_dminus1": Y.f_dminus1,
            "method": rr.method}


def left_kernel_sample(Y: Complex, count: int, q: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``count`` uniformly random (d-1)-cochains mod q vanishing on every boundary of Y.

    Returns (row ranks, values) with values of shape (rows, count); rows of
    degree 0 are unconstrained and not listed.
    """
    M = boundary_matrix(Y, rows="support")
    eqs, nv = _column_equations(M)
    el = eliminate(eqs, nv, q)
    free = el.free_vars()
    rng = np.random.default_rng(seed)
    vals = rng.integers(0, q, size=(free.size, count), dtype=np.int64)
    return M.row_ranks, el.kernel_vectors(vals)


def left_kernel_basis_rational(Y: Complex) -> tuple[np.ndarray, np.ndarray]:
    """An integer basis of the left kernel (over Q) on the support rows."""
    M = boundary_matrix(Y, rows="support")
    eqs, nv = _column_equations(M)
    el = eliminate(eqs, nv, None)
    free = el.free_vars()
    X = el.kernel_vectors(np.eye(free.size, dtype=np.int64).astype(object))
    out = np.zeros(X.shape, dtype=object)
    for j in range(X.shape[1]):
        L = 1
        for v in X[:, j]:
            L = L * v.denominator // math.gcd(L, v.denominator)
        out[:, j] = [int(v * L) for v in X[:, j]]
    return M.row_ranks, out


def r_shadow(Y: Complex, field: FieldChoice = PRIME, seed: int = 0, chunk: int = 1 << 20) -> np.ndarray:
    """d-faces sigma outside Y with rank(Y + sigma) = rank(Y), as sorted ranks.

    sigma qualifies iff its boundary lies in the column space, i.e. iff every
    left-kernel vector y has y . boundary(sigma) = 0.  Over GF(q) two random
    kernel vectors decide this up to probability q^-2 per candidate; over Q a
    full integer basis is used.
    """
    n, d = Y.n, Y.d
    total = math.comb(n, d + 1)
    if Y.f_d == 0:
        return np.zeros(0, dtype=np.int64)
    if field.kind == "prime":
        rows, Yv = left_kernel_sample(Y, 2, field.q, seed)
        q = field.q
    else:
        rows, Yv = left_kernel_basis_rational(Y)
        q = None
    mask = np.ones(total, dtype=bool)
    mask[Y.faces] = False
    cand_all = np.flatnonzero(mask)
    signs = np.where(np.arange(d + 1) % 2 == 0, 1, -1)
    out = []
    for s in range(0, cand_all.size, chunk):
        cand = cand_all[s:s + chunk]
        fr = facet_ranks(unrank_array(cand, n, d + 1), n)
        pos = np.searchsorted(rows, fr)
        posc = np.minimum(pos, rows.size - 1)
        inside = (rows[posc] == fr).all(axis=1)
        cand, posc = cand[inside], posc[inside]
        if q is not None:
            acc = np.zeros((cand.size, Yv.shape[1]), dtype=np.int64)
            for i in range(d + 1):
                acc = (acc + signs[i] * Yv[posc[:, i]]) % q
            ok = (acc == 0).all(axis=1)
        else:
            acc = np.zeros((cand.size, Yv.shape[1]), dtype=object)
            acc[:] = 0
            for i in range(d + 1):
                acc = acc + signs[i] * Yv[posc[:, i]]
            ok = (acc == 0).all(axis=1) if Yv.shape[1] else np.ones(cand.size, dtype=bool)
        out.append(cand[ok])
    return np.sort(np.concatenate(out)) if out else np.zeros(0, dtype=np.int64)


def classify_regime(Y: Complex, field: FieldChoice = RATIONAL) -> str:
    """Which of the three behaviours Y shows.

    ``acyclic_except_gravel``: the core is not a gravel, yet every d-cycle
    comes from copies of the boundary of a (d+1)-simplex, i.e. beta_d equals
    their number.
    """
    res = collapse_to_core(Y)
    if res.is_gravel:
        return "collapsible_or_gravel"
    beta = betti_d(res.core, field)
    return "acyclic_except_gravel" if beta == len(simplex_boundaries(res.core)) else "cyclic"
