"""Exact sparse elimination over GF(q) or the rationals.

A system is a list of equations, each a dict {variable: coefficient}.  The
sparse phase pivots greedily on the (variable, equation) pair of smallest
Markowitz cost (count(var) - 1) * (len(eq) - 1), ties going to the smallest
index; a variable occurring once is a zero-fill pivot.  Over GF(q), once
every remaining pivot is expensive the leftover block is finished densely
with blocked elimination built on float64 BLAS products, kept exact by
splitting operands into 16-bit limbs.  Over the rationals elimination is
fraction-free: rows are combined as a*g - b*e and divided by their content.

Pivots are recorded, so kernel vectors of the system (assignments of the
variables annihilated by every equation) come out by back-substitution.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

DEFAULT_PRIME = 2147483647


@dataclass(frozen=True)
class FieldChoice:
    kind: str = "prime"  # "prime" or "rational"
    q: int = DEFAULT_PRIME

    def __post_init__(self):
        if self.kind not in ("prime", "rational"):
            raise ValueError("field kind must be 'prime' or 'rational'")
        if self.kind == "prime":
            from sympy import isprime
            if not (2 <= self.q < 2 ** 31 and isprime(self.q)):
                raise ValueError(f"modulus {self.q} is not a prime below 2^31")

    @property
    def modulus(self) -> int | None:
        return self.q if self.kind == "prime" else None

    @classmethod
    def parse(cls, text: str) -> "FieldChoice":
        if text in ("rational", "rationals", "Q"):
            return cls("rational")
        if text == "prime":
            return cls("prime")
        if text.startswith("prime:"):
            return cls("prime", int(text.split(":", 1)[1]))
        raise ValueError(f"unknown field {text!r}")


RATIONAL = FieldChoice("rational")
PRIME = FieldChoice("prime")
# small enough that a float64 product of two dense panels is exact
FAST_PRIME = FieldChoice("prime", 4194301)


# dense modular products ------------------------------------------------------

_LIMB = 1 << 16


@njit(cache=True)
def _finish(hi, mid, lo, q, base, sub):
    """(base - x) mod q (sub) or x mod q, x = hi*2^32 + (mid-hi-lo)*2^16 + lo."""
    r, c = hi.shape
    out = np.empty((r, c), dtype=np.int64)
    s32 = (1 << 32) % q
    for i in range(r):
        for j in range(c):
            h = np.int64(hi[i, j])
            lw = np.int64(lo[i, j])
            md = np.int64(mid[i, j]) - h - lw
            # < 2^62 + 2^47 + 2^53, no overflow
            v = ((h % q) * s32 + (md % q) * 65536 + lw) % q
            if sub:
                v = base[i, j] - v
                if v < 0:
                    v += q
            out[i, j] = v
    return out


def _limb_products(a: np.ndarray, b: np.ndarray):
    a1, a0 = np.divmod(a, _LIMB)
    b1, b0 = np.divmod(b, _LIMB)
    fa1, fa0, fb1, fb0 = (x.astype(np.float64) for x in (a1, a0, b1, b0))
    return fa1 @ fb1, (fa1 + fa0) @ (fb1 + fb0), fa0 @ fb0


def matmul_mod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """(a @ b) mod q for int64 operands in [0, q), q < 2^31, exactly.

    Karatsuba on 16-bit limbs: three float64 products whose entries stay
    below 2^53 as long as the inner dimension is at most 2^19.
    """
    k = a.shape[1]
    if k == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if k > 1 << 19:
        mid = k // 2
        return (matmul_mod(a[:, :mid], b[:mid], q) + matmul_mod(a[:, mid:], b[mid:], q)) % q
    if _single_product_ok(k, q):
        return _float_mod(a.astype(np.float64) @ b.astype(np.float64), q)
    hi, md, lo = _limb_products(a, b)
    return _finish(hi, md, lo, q, _EMPTY, False)


def submul_mod(base: np.ndarray, a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """(base - a @ b) mod q, exact, for inner dimension at most 2^19."""
    if a.shape[1] == 0:
        return base % q
    if _single_product_ok(a.shape[1], q):
        prod = a.astype(np.float64) @ b.astype(np.float64)
        return _float_mod(base.astype(np.float64) - prod, q)
    hi, md, lo = _limb_products(a, b)
    return _finish(hi, md, lo, q, np.ascontiguousarray(base), True)


def _single_product_ok(k: int, q: int) -> bool:
    # every partial sum of k products below q^2 is exact in float64
    return (k + 1) * (q - 1) * (q - 1) < 1 << 53


@njit(cache=True)
def _float_mod(x, q):
    r, c = x.shape
    out = np.empty((r, c), dtype=np.int64)
    inv = 1.0 / q
    for i in range(r):
        for j in range(c):
            v = x[i, j]
            v -= np.floor(v * inv) * q
            if v < 0:
                v += q
            elif v >= q:
                v -= q
            out[i, j] = np.int64(v)
    return out


_EMPTY = np.zeros((0, 0), dtype=np.int64)


@njit(cache=True)
def _powmod(a, e, q):
    r = 1
    a %= q
    while e > 0:
        if e & 1:
            r = r * a % q
        a = a * a % q
        e >>= 1
    return r


@njit(cache=True)
def _inv_mod_matrix(t, q):
    """Inverse of a square matrix mod q by Gauss-Jordan (the matrix must be invertible)."""
    k = t.shape[0]
    aug = np.zeros((k, 2 * k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            aug[i, j] = t[i, j] % q
        aug[i, k + i] = 1
    for i in range(k):
        p = i
        while aug[p, i] == 0:
            p += 1
        if p != i:
            for j in range(2 * k):
                tmp = aug[i, j]
                aug[i, j] = aug[p, j]
                aug[p, j] = tmp
        inv = _powmod(aug[i, i], q - 2, q)
        for j in range(2 * k):
            aug[i, j] = aug[i, j] * inv % q
        for r in range(k):
            if r != i and aug[r, i] != 0:
                f = aug[r, i]
                for j in range(i, 2 * k):
                    aug[r, j] = (aug[r, j] - f * aug[i, j]) % q
    return aug[:, k:].copy()


@njit(cache=True)
def _greedy_pivots_nb(p, q, rows, cols):
    R, b = p.shape
    n = 0
    for j in range(b):
        r = -1
        for i in range(R):
            if p[i, j] != 0:
                r = i
                break
        if r < 0:
            continue
        rows[n] = r
        cols[n] = j
        n += 1
        inv = _powmod(p[r, j], q - 2, q)
        for i in range(R):
            if i != r and p[i, j] != 0:
                f = p[i, j] * inv % q
                for jj in range(j, b):
                    p[i, jj] = (p[i, jj] - f * p[r, jj]) % q
        for jj in range(j, b):
            p[r, jj] = 0
    return n


def _greedy_pivots(p: np.ndarray, q: int) -> tuple[list[int], list[int]]:
    """Pivot rows/cols of a small block by plain elimination mod q."""
    rows = np.empty(p.shape[1], dtype=np.int64)
    cols = np.empty(p.shape[1], dtype=np.int64)
    k = _greedy_pivots_nb(np.array(p, dtype=np.int64), q, rows, cols)
    return rows[:k].tolist(), cols[:k].tolist()


def _panel_pivots(p: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows S, columns C with p[S, C] invertible and rank(p) = |S|; also inv(p[S, C]).

    Pivots are searched on a short slice of the rows still nonzero after
    projecting out the pivots found so far; a tall panel usually needs a
    single round.
    """
    R, b = p.shape
    rows: list[int] = []
    cols: list[int] = []
    inv = np.zeros((0, 0), dtype=np.int64)
    resid = p
    while True:
        nzr = np.flatnonzero(resid.any(axis=1))
        if nzr.size == 0:
            break
        sub = nzr[:2 * b]
        rr, cc = _greedy_pivots(resid[sub], q)
        rows += sub[rr].tolist()
        cols += cc
        S, C = np.array(rows), np.array(cols)
        inv = _inv_mod_matrix(p[np.ix_(S, C)], q)
        if C.size == b:
            break  # full panel rank, nothing left to find
        resid = submul_mod(p, p[:, C], matmul_mod(inv, p[S], q), q)
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), inv


@dataclass
class DenseBlock:
    vars: np.ndarray   # dense variable ids (global), column order of ``rows``
    pivot_cols: list   # per block: array of column positions
    pivot_rows: list   # per block: rows (k, ncols) normalised to identity on pivot_cols


def dense_echelon(m: np.ndarray, q: int, block: int = 192) -> tuple[int, list, list]:
    """Row-echelon reduction of m mod q, one column panel at a time.

    Returns the rank and, per panel, the pivot columns and pivot rows (over
    all columns, identity on the panel's pivot columns).  Only the rows not
    yet used as pivots are carried along, restricted to unprocessed columns.
    """
    r, c = m.shape
    work = m % q
    piv_cols, piv_rows = [], []
    rank = 0
    for c0 in range(0, c, block):
        if work.shape[0] == 0:
            break
        b = min(block, c - c0)
        rr, cc, inv = _panel_pivots(work[:, :b], q)
        if rr.size:
            top = matmul_mod(inv, work[rr], q)
            row = np.zeros((rr.size, c), dtype=np.int64)
            row[:, c0:] = top
            piv_cols.append(cc + c0)
            piv_rows.append(row)
            rank += rr.size
            keep = np.ones(work.shape[0], dtype=bool)
            keep[rr] = False
            rest = work[keep]
            # the panel part of the remaining rows vanishes after this step
            work = submul_mod(rest[:, b:], rest[:, cc], top[:, b:], q)
        else:
            work = work[:, b:]
    return rank, piv_cols, piv_rows


# sparse elimination ----------------------------------------------------------

@dataclass
class Elimination:
    nvars: int
    q: int | None
    rank: int = 0
    pivots: list = field(default_factory=list)   # (var, keys array, coeffs array) in pivot order
    dense: DenseBlock | None = None
    dependent: int = 0                            # equations reduced to zero

    def pivot_vars(self) -> np.ndarray:
        pv = [p[0] for p in self.pivots]
        if self.dense is not None:
            for C in self.dense.pivot_cols:
                pv.extend(self.dense.vars[C].tolist())
        return np.array(sorted(pv), dtype=np.int64)

    def free_vars(self) -> np.ndarray:
        mask = np.ones(self.nvars, dtype=bool)
        mask[self.pivot_vars()] = False
        return np.flatnonzero(mask)

    def kernel_vectors(self, free_values: np.ndarray) -> np.ndarray:
        """Complete assignments of the free variables to kernel vectors.

        ``free_values`` has shape (nfree, B); returns (nvars, B).  Over GF(q)
        arithmetic is mod q; over the rationals entries are Fractions.
        """
        free = self.free_vars()
        B = free_values.shape[1]
        if self.q is None:
            x = np.zeros((self.nvars, B), dtype=object)
            x[:] = Fraction(0)
            x[free] = free_values
            for v, keys, coef in reversed(self.pivots):
                a = int(coef[keys == v][0])
                acc = np.zeros(B, dtype=object)
                acc[:] = Fraction(0)
                for u, cu in zip(keys.tolist(), coef.tolist()):
                    if u != v:
                        acc = acc + x[u] * cu
                x[v] = -acc / a
            return x
        q = self.q
        x = np.zeros((self.nvars, B), dtype=np.int64)
        x[free] = np.asarray(free_values, dtype=np.int64) % q
        if self.dense is not None:
            dv = self.dense.vars
            for C, rows in zip(reversed(self.dense.pivot_cols), reversed(self.dense.pivot_rows)):
                xd = x[dv]
                xd[C] = 0
                val = matmul_mod(rows, xd, q)   # identity on C removed above
                x[dv[C]] = (-val) % q
        for v, keys, coef in reversed(self.pivots):
            # x[v] is still 0 here, so it drops out of the sum
            a = int(coef[keys == v][0])
            tot = ((coef[:, None] * x[keys]) % q).sum(axis=0) % q
            x[v] = (-tot) % q * pow(a, q - 2, q) % q
        return x


def _content(vals) -> int:
    g = 0
    for v in vals:
        g = math.gcd(g, v)
        if g == 1:
            return 1
    return g


def eliminate(eqs: list[dict], nvars: int, q: int | None, *, cost_cap: int = 4096,
              dense_max: int = 60_000_000, record: bool = True) -> Elimination:
    """Eliminate the system ``eqs`` (mutated) over GF(q), or over Q if q is None."""
    res = Elimination(nvars=nvars, q=q)
    neq = len(eqs)
    occ: list[set] = [set() for _ in range(nvars)]
    for i, e in enumerate(eqs):
        if q is not None:
            for u in list(e):
                e[u] %= q
                if e[u] == 0:
                    del e[u]
        for u in e:
            occ[u].add(i)
    alive_eq = [bool(e) for e in eqs]
    res.dependent = sum(1 for a in alive_eq if not a)
    vheap = [(len(s), u) for u, s in enumerate(occ) if s]
    eheap = [(len(e), i) for i, e in enumerate(eqs) if e]
    heapq.heapify(vheap)
    heapq.heapify(eheap)
    active_vars = len(vheap)
    active_eqs = len(eheap)

    def top_var():
        while vheap:
            cnt, u = vheap[0]
            if len(occ[u]) == cnt and cnt > 0:
                return cnt, u
            heapq.heappop(vheap)
        return None

    def top_eq():
        while eheap:
            ln, i = eheap[0]
            if alive_eq[i] and len(eqs[i]) == ln:
                return ln, i
            heapq.heappop(eheap)
        return None

    while True:
        tv, te = top_var(), top_eq()
        if tv is None or te is None:
            break
        cv, v = tv
        se, ei = te
        # option A: scarcest variable, its shortest equation
        ea = min(occ[v], key=lambda i: (len(eqs[i]), i))
        cost_a = (cv - 1) * (len(eqs[ea]) - 1)
        # option B: shortest equation, its scarcest variable
        vb = min(eqs[ei], key=lambda u: (len(occ[u]), u))
        cost_b = (se - 1) * (len(occ[vb]) - 1)
        if cost_a <= cost_b:
            pv, pe, cost = v, ea, cost_a
        else:
            pv, pe, cost = vb, ei, cost_b
        if q is not None and cost > cost_cap and active_vars * active_eqs <= dense_max:
            break
        e = eqs[pe]
        a = e[pv]
        others = [g for g in occ[pv] if g != pe]
        if q is not None:
            inv = pow(a, q - 2, q)
        for g in others:
            gd = eqs[g]
            b = gd[pv]
            if q is not None:
                f = b * inv % q
                for u, cu in e.items():
                    nv = (gd.get(u, 0) - f * cu) % q
                    if nv:
                        if u not in gd:
                            occ[u].add(g)
                            heapq.heappush(vheap, (len(occ[u]), u))
                        gd[u] = nv
                    elif u in gd:
                        del gd[u]
                        occ[u].discard(g)
                        heapq.heappush(vheap, (len(occ[u]), u))
            else:
                # g <- a*g - b*e, then divide out the content
                new = {u: a * cu for u, cu in gd.items()}
                for u, cu in e.items():
                    nv = new.get(u, 0) - b * cu
                    if nv:
                        new[u] = nv
                    else:
                        new.pop(u, None)
                cont = _content(abs(x) for x in new.values()) if new else 1
                if cont > 1:
                    new = {u: x // cont for u, x in new.items()}
                for u in gd.keys() - new.keys():
                    occ[u].discard(g)
                    heapq.heappush(vheap, (len(occ[u]), u))
                for u in new.keys() - gd.keys():
                    occ[u].add(g)
                    heapq.heappush(vheap, (len(occ[u]), u))
                eqs[g] = gd = new
            if not gd:
                alive_eq[g] = False
                res.dependent += 1
                active_eqs -= 1
            else:
                heapq.heappush(eheap, (len(gd), g))
        # retire the pivot equation
        for u in e:
            occ[u].discard(pe)
            if occ[u]:
                heapq.heappush(vheap, (len(occ[u]), u))
            else:
                active_vars -= 1
        alive_eq[pe] = False
        active_eqs -= 1
        res.rank += 1
        if record:
            keys = np.fromiter(e.keys(), dtype=np.int64, count=len(e))
            if q is not None:
                coef = np.fromiter(e.values(), dtype=np.int64, count=len(e))
            else:
                coef = np.array(list(e.values()), dtype=object)
            res.pivots.append((pv, keys, coef))
        eqs[pe] = None

    # dense remainder (prime fields only)
    rem_eqs = [i for i in range(neq) if alive_eq[i] and eqs[i]]
    if rem_eqs:
        if q is None:
            raise AssertionError("rational elimination leaves no remainder")
        dvars = np.array(sorted({u for i in rem_eqs for u in eqs[i]}), dtype=np.int64)
        col = {int(u): j for j, u in enumerate(dvars.tolist())}
        m = np.zeros((len(rem_eqs), dvars.size), dtype=np.int64)
        for r, i in enumerate(rem_eqs):
            for u, cu in eqs[i].items():
                m[r, col[u]] = cu
        rk, pc, pr = dense_echelon(m, q)
        res.rank += rk
        res.dependent += len(rem_eqs) - rk
        res.dense = DenseBlock(dvars, pc, pr)
    return res
