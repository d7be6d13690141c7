"""d-collapse: phases, cores, rooted collapse, gravel detection and the C-shadow.

A phase freezes the set of free (d-1)-faces (degree exactly 1, not protected)
at its start and removes every d-face that contains one of them.  Which free
face is paired with a contested d-face only affects the recorded pairs, never
the surviving face set, so each phase is a handful of vectorised updates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.sparse import csgraph, coo_matrix

from .faces import Complex, IncidenceIndex, build_incidence, face_rank, facet_ranks, ranks_of, unrank_array

NEVER = np.iinfo(np.int64).max


def collapse_phase(state: IncidenceIndex, tie_break: str = "smallest") -> IncidenceIndex:
    """Advance ``state`` by one phase in place and return it."""
    free = np.flatnonzero((state.degree == 1) & ~state.protected)
    if free.size == 0:
        return state
    if tie_break == "largest":
        free = free[::-1]
    elif tie_break != "smallest":
        raise ValueError("tie_break must be 'smallest' or 'largest'")
    owners = state.owner_xor[free]
    victims, first = np.unique(owners, return_index=True)
    state.pairs.append(np.stack([state.ridges[free[first]], state.faces[victims]], axis=1))
    state.alive[victims] = False
    b = state.boundary[victims]
    state.degree -= np.bincount(b.ravel(), minlength=state.degree.size)
    for i in range(b.shape[1]):
        np.bitwise_xor.at(state.owner_xor, b[:, i], victims)
    state.phases += 1
    return state


def run_phases(state: IncidenceIndex, k: int | None = None, tie_break: str = "smallest") -> IncidenceIndex:
    """Apply min(k, phases to the fixed point) phases (k=None runs to the fixed point)."""
    done = 0
    while k is None or done < k:
        before = state.phases
        collapse_phase(state, tie_break)
        if state.phases == before:
            break
        done += 1
    return state


def collapse_phases(Y: Complex, k: int | None) -> Complex:
    """R_k(Y); k=None gives the fixed point R_inf(Y)."""
    if k is not None and k < 0:
        raise ValueError("k must be >= 0")
    return run_phases(build_incidence(Y), k).current()


def strip_exposed(Y: Complex) -> tuple[int, int]:
    """(f_{d-1}, f_d) of Y after removing its exposed (d-1)-faces."""
    if Y.f_d == 0:
        return 0, 0
    return int(np.unique(Y.facets().ravel()).size), Y.f_d


def removal_phases(Y: Complex) -> tuple[IncidenceIndex, np.ndarray, int]:
    """Run the unrooted process to its fixed point, recording when each face goes.

    Returns the initial incidence index, the phase number (1-based) at which
    each d-face is removed (NEVER for core faces) and the number of phases.
    """
    base = build_incidence(Y)
    st = base.copy()
    when = np.full(Y.f_d, NEVER, dtype=np.int64)
    while True:
        alive_before = st.alive.copy()
        collapse_phase(st)
        gone = alive_before & ~st.alive
        if not gone.any():
            break
        when[gone] = st.phases
    return base, when, st.phases


@dataclass
class CoreResult:
    core: Complex
    core_dminus1_count: int
    phases_used: int
    collapsed_pairs: np.ndarray = field(repr=False)
    is_collapsible: bool
    is_gravel: bool
    gravel: list = field(default_factory=list)


def collapse_to_core(Y: Complex, tie_break: str = "smallest") -> CoreResult:
    st = run_phases(build_incidence(Y), None, tie_break)
    core = st.current()
    f1 = int(np.count_nonzero(st.degree))
    pairs = np.concatenate(st.pairs) if st.pairs else np.zeros((0, 2), dtype=np.int64)
    grav, comps = is_gravel(core)
    return CoreResult(core, f1, st.phases, pairs, core.f_d == 0, grav, comps)


def elementary_collapse_core(Y: Complex, order: str = "smallest", seed: int | None = None) -> Complex:
    """Reference core by single elementary collapses, one at a time.

    ``order`` picks the free face used at each step: the smallest rank, the
    largest rank, or ("random") a uniformly random one.  Slow; used to check
    that the phase engine's core does not depend on the collapse order.
    """
    st = build_incidence(Y)
    rng = np.random.default_rng(seed)
    while True:
        free = np.flatnonzero(st.degree == 1)
        if free.size == 0:
            break
        if order == "smallest":
            r = free[0]
        elif order == "largest":
            r = free[-1]
        else:
            r = free[rng.integers(free.size)]
        f = st.owner_xor[r]
        st.alive[f] = False
        for e in st.boundary[f]:
            st.degree[e] -= 1
            st.owner_xor[e] ^= f
    return st.current()


# rooted collapse -------------------------------------------------------------

class RootedCollapser:
    """Rooted / protected collapse of one complex, for many roots.

    Protecting a set S of (d-1)-faces only ever keeps d-faces alive, so the
    protected process B_j contains the unrooted A_j at every phase.  We keep
    the global removal times of the unrooted run and track only the rescued
    set B_j \\ A_j, which stays local to S.
    """

    def __init__(self, Y: Complex):
        self.Y = Y
        self.index, self.when, self.total_phases = removal_phases(Y)

    def _deg(self, e: int, j: int, rescued: set) -> int:
        ix = self.index
        fs = ix.members[ix.ptr[e]:ix.ptr[e + 1]]
        w = self.when[fs]
        return int(np.count_nonzero(w > j)) + sum(1 for f in fs.tolist() if f in rescued)

    def run(self, S: list[int], k: int | None) -> set:
        """Faces globally removed by phase k that survive k S-protected phases."""
        ix = self.index
        Sset = set(S)
        rescued: set = set()
        j = 0
        while k is None or j < k:
            j += 1
            touched = set(Sset)
            for f in rescued:
                touched.update(ix.boundary[f].tolist())
            cand = set(rescued)
            for e in touched:
                fs = ix.members[ix.ptr[e]:ix.ptr[e + 1]]
                cand.update(fs[self.when[fs] > j - 1].tolist())
            new = set()
            for f in cand:
                if self.when[f] > j:
                    continue  # survives phase j globally, hence also here
                removed = False
                for e in ix.boundary[f].tolist():
                    if e not in Sset and self._deg(e, j - 1, rescued) == 1:
                        removed = True
                        break
                if not removed:
                    new.add(f)
            if j > self.total_phases and new == rescued:
                break
            rescued = new
        self._last_phase = j
        return rescued

    def degree(self, tau: int, k: int | None = None) -> int:
        """Degree of the (d-1)-face of rank ``tau`` after k tau-rooted phases."""
        e = self.index.ridge_index(tau)
        if e < 0:
            return 0
        rescued = self.run([e], k)
        jj = self.total_phases + 1 if k is None else k
        return self._deg(e, jj, rescued)

    def protected_degrees(self, taus: list[int], k: int | None = None) -> list[int]:
        """Degrees of each face of ``taus`` after k phases protecting all of them."""
        es = [self.index.ridge_index(t) for t in taus]
        rescued = self.run([e for e in es if e >= 0], k)
        jj = self.total_phases + 1 if k is None else k
        return [0 if e < 0 else self._deg(e, jj, rescued) for e in es]


def rooted_collapse(Y: Complex, tau: int, k: int | None) -> int:
    """Degree of tau in R_k(Y, tau), the process that never collapses tau."""
    return RootedCollapser(Y).degree(tau, k)


def rooted_collapse_direct(Y: Complex, taus, k: int | None) -> list[int]:
    """Same quantity by running the whole protected process (reference implementation)."""
    st = build_incidence(Y)
    idx = [st.ridge_index(t) for t in np.atleast_1d(taus)]
    for i in idx:
        if i >= 0:
            st.protected[i] = True
    run_phases(st, k)
    return [0 if i < 0 else int(st.degree[i]) for i in idx]


# gravel ----------------------------------------------------------------------

def _components(n_nodes: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    g = coo_matrix((np.ones(a.size, dtype=np.int8), (a, b)), shape=(n_nodes, n_nodes))
    return csgraph.connected_components(g, directed=False)[1]


def is_gravel(Y: Complex) -> tuple[bool, list[list[int]]]:
    """Is Y a vertex-disjoint union of boundaries of (d+1)-simplices?"""
    if Y.f_d == 0:
        return True, []
    V = Y.vertices()
    k = Y.d + 1
    a = np.repeat(V[:, 0], k - 1)
    b = V[:, 1:].ravel()
    lab = _components(Y.n, a, b)
    face_lab = lab[V[:, 0]]
    used = np.unique(V.ravel())
    comps = []
    ok = True
    for c in np.unique(face_lab):
        verts = used[lab[used] == c]
        nf = int(np.count_nonzero(face_lab == c))
        if verts.size != Y.d + 2 or nf != Y.d + 2:
            ok = False
        comps.append(verts.tolist())
    return (ok, comps) if ok else (False, [])


def gravel_components(Y: Complex) -> list[list[int]]:
    """Components of Y (faces joined through shared (d-1)-faces) that are simplex boundaries."""
    if Y.f_d == 0:
        return []
    ix = build_incidence(Y)
    m = Y.f_d
    # faces adjacent through a ridge: link each face to the first face on each of its ridges
    first = ix.members[ix.ptr[:-1]]
    a = np.repeat(np.arange(m), Y.d + 1)
    b = first[ix.boundary.ravel()]
    lab = _components(m, a, b)
    counts = np.bincount(lab)
    V = Y.vertices()
    out = []
    for c in np.flatnonzero(counts == Y.d + 2):
        verts = np.unique(V[lab == c])
        if verts.size == Y.d + 2:
            out.append(verts.tolist())
    return out


def simplex_boundaries(Y: Complex) -> np.ndarray:
    """Vertex sets (rows, sorted) of all copies of the boundary of a (d+1)-simplex in Y.

    In such a copy every (d-1)-face lies in exactly two of its d-faces, so
    each copy is the union of some pair of faces sharing a (d-1)-face.
    """
    d = Y.d
    if Y.f_d < d + 2:
        return np.zeros((0, d + 2), dtype=np.int64)
    ix = build_incidence(Y)
    deg = np.diff(ix.ptr)
    V = Y.vertices()
    firsts, seconds = [], []
    for D in np.unique(deg[deg >= 2]).tolist():
        rows = np.flatnonzero(deg == D)
        M = ix.members[ix.ptr[rows][:, None] + np.arange(D)]
        for a in range(D):
            for b in range(a + 1, D):
                firsts.append(M[:, a])
                seconds.append(M[:, b])
    if not firsts:
        return np.zeros((0, d + 2), dtype=np.int64)
    f1, f2 = np.concatenate(firsts), np.concatenate(seconds)
    both = np.sort(np.concatenate([V[f1], V[f2]], axis=1), axis=1)
    keep = np.ones(both.shape, dtype=bool)
    keep[:, 1:] = both[:, 1:] != both[:, :-1]
    W = both[keep].reshape(-1, d + 2)
    W = unrank_array(np.unique(ranks_of(W, Y.n)), Y.n, d + 2)
    fr = facet_ranks(W, Y.n)
    pos = np.minimum(np.searchsorted(Y.faces, fr), Y.faces.size - 1)
    return W[(Y.faces[pos] == fr).all(axis=1)]


@njit(cache=True)
def _protected_peel(region_faces, boundary, ptr, members, solid, protected, degree, alive,
                    in_core, face_region, peeled, S, out):
    """Queue peel of one non-core region with the ridges S protected.

    Mutates degree/alive while peeling and restores both before returning
    (undo log), so the shared base state is never observed modified.
    """
    k = boundary.shape[1]
    for s in S:
        protected[s] = True
    stack = np.empty(region_faces.size * k + 1, dtype=np.int64)
    top = 0
    for f in region_faces:
        for i in range(k):
            e = boundary[f, i]
            if degree[e] == 1 and not solid[e] and not protected[e]:
                stack[top] = e
                top += 1
    removed = np.empty(region_faces.size, dtype=np.int64)
    nr = 0
    while top > 0:
        top -= 1
        e = stack[top]
        if degree[e] != 1:
            continue
        f = -1
        for q in range(ptr[e], ptr[e + 1]):
            if alive[members[q]]:
                f = members[q]
                break
        alive[f] = False
        removed[nr] = f
        nr += 1
        for i in range(k):
            e2 = boundary[f, i]
            degree[e2] -= 1
            if degree[e2] == 1 and not solid[e2] and not protected[e2]:
                stack[top] = e2
                top += 1
    for i in range(S.size):
        e = S[i]
        cnt = 0
        for q in range(ptr[e], ptr[e + 1]):
            f = members[q]
            if alive[f] and (in_core[f] or peeled[face_region[f]]):
                cnt += 1
        out[i] = cnt
    for r in range(nr):
        f = removed[r]
        alive[f] = True
        for i in range(k):
            degree[boundary[f, i]] += 1
    for s in S:
        protected[s] = False


class ProtectedPeeler:
    """Fixed points of collapse with a protected set of (d-1)-faces.

    The fixed point does not depend on the collapse order, and protection can
    only rescue faces in the non-core regions (faces outside the core joined
    through non-core ridges) that contain a protected ridge.  Each query
    peels just those regions.
    """

    def __init__(self, Y: Complex):
        self.Y = Y
        ix = build_incidence(Y)
        self.index = ix
        st = run_phases(ix.copy(), None)
        self.in_core = st.alive.copy()
        core_deg = np.bincount(ix.boundary[self.in_core].ravel(), minlength=ix.ridges.size)
        self.solid = core_deg > 0
        nc = np.flatnonzero(~self.in_core)
        self.ridge_region = np.full(ix.ridges.size, -1, dtype=np.int64)
        if nc.size:
            loc = np.full(ix.faces.size, -1, dtype=np.int64)
            loc[nc] = np.arange(nc.size)
            first = ix.members[ix.ptr[:-1]]
            bnd = ix.boundary[nc]
            a = np.repeat(np.arange(nc.size), Y.d + 1)
            b = loc[first[bnd.ravel()]]
            keep = ~self.solid[bnd.ravel()]
            lab = _components(nc.size, a[keep], b[keep])
            dang = np.flatnonzero(~self.solid)
            # a non-core ridge lies only in non-core faces, all in one region
            self.ridge_region[dang] = lab[loc[first[dang]]]
            order = np.argsort(lab, kind="stable")
            self.region_faces = nc[order]
            self.region_ptr = np.zeros(lab.max() + 2, dtype=np.int64)
            np.cumsum(np.bincount(lab), out=self.region_ptr[1:])
            self.face_region = np.zeros(ix.faces.size, dtype=np.int64)
            self.face_region[nc] = lab
        else:
            self.region_faces = np.zeros(0, dtype=np.int64)
            self.region_ptr = np.zeros(1, dtype=np.int64)
            self.face_region = np.zeros(ix.faces.size, dtype=np.int64)
        self._peeled = np.zeros(self.region_ptr.size, dtype=bool)
        self._degree = ix.degree.copy()
        self._alive = np.ones(ix.faces.size, dtype=bool)
        self._prot = np.zeros(ix.ridges.size, dtype=bool)

    def degrees_local(self, S: np.ndarray) -> np.ndarray:
        """Fixed-point degrees of ridge indices S when all of S is protected."""
        S = np.asarray(S, dtype=np.int64)
        out = np.zeros(S.size, dtype=np.int64)
        regs = np.unique(self.ridge_region[S])
        regs = regs[regs >= 0]
        faces = np.concatenate([self.region_faces[self.region_ptr[r]:self.region_ptr[r + 1]] for r in regs]) \
            if regs.size else np.zeros(0, dtype=np.int64)
        ix = self.index
        self._peeled[regs] = True
        _protected_peel(faces, ix.boundary, ix.ptr, ix.members, self.solid, self._prot,
                        self._degree, self._alive, self.in_core, self.face_region, self._peeled, S, out)
        self._peeled[regs] = False
        return out

    def degrees(self, taus) -> list[int]:
        """Fixed-point degrees of the (d-1)-faces ``taus`` (ranks), all protected."""
        es = [self.index.ridge_index(t) for t in taus]
        valid = np.array([e for e in es if e >= 0], dtype=np.int64)
        vals = dict(zip(valid.tolist(), self.degrees_local(valid).tolist())) if valid.size else {}
        return [0 if e < 0 else vals[e] for e in es]


# C-shadow --------------------------------------------------------------------

def all_faces(n: int, k: int) -> np.ndarray:
    return np.arange(math.comb(n, k), dtype=np.int64)


def _non_members(Y: Complex) -> np.ndarray:
    universe = all_faces(Y.n, Y.d + 1)
    mask = np.ones(universe.size, dtype=bool)
    mask[Y.faces] = False
    return universe[mask]


def c_shadow_oracle(Y: Complex) -> np.ndarray:
    """{sigma not in Y : core(Y + sigma) != core(Y)} by direct core comparison."""
    base = collapse_to_core(Y).core
    out = [s for s in _non_members(Y).tolist() if collapse_to_core(Y.with_faces([s])).core != base]
    return np.array(out, dtype=np.int64)


def c_shadow(Y: Complex, oracle: bool = False, chunk: int = 1 << 20) -> np.ndarray:
    """d-faces outside Y whose addition enlarges the core (sorted ranks).

    sigma enlarges the core iff every facet of sigma keeps positive degree in
    the fixed point of Y collapsed with the facets of sigma protected.  Facets
    in the core always do; facets of degree 0 never do.  A non-core facet is
    first tested alone; several facets only interact when they lie in one
    non-core region, and just those candidates get an exact joint peel.
    """
    if oracle:
        return c_shadow_oracle(Y)
    n, d = Y.n, Y.d
    R_all = math.comb(n, d)
    pp = ProtectedPeeler(Y)
    ix = pp.index
    # ridge status over all (d-1)-face ranks: 0 absent, 1 non-core, 2 in the core
    status = np.zeros(R_all, dtype=np.int8)
    status[ix.ridges] = np.where(pp.solid, 2, 1)
    loc = np.full(R_all, -1, dtype=np.int64)
    loc[ix.ridges] = np.arange(ix.ridges.size)
    single = np.zeros(R_all, dtype=bool)
    one = np.zeros(1, dtype=np.int64)
    for e in np.flatnonzero(~pp.solid).tolist():
        one[0] = e
        single[ix.ridges[e]] = pp.degrees_local(one)[0] > 0
    region = np.full(R_all, -1, dtype=np.int64)
    region[ix.ridges] = pp.ridge_region
    out = []
    cand_all = _non_members(Y)
    for s in range(0, cand_all.size, chunk):
        cand = cand_all[s:s + chunk]
        fr = facet_ranks(unrank_array(cand, n, d + 1), n)
        st = status[fr]
        ok = (st > 0).all(axis=1)
        fr, st, cand = fr[ok], st[ok], cand[ok]
        accept = ((st == 2) | single[fr]).all(axis=1)
        out.append(cand[accept])
        rest = ~accept
        fr, st, cand = fr[rest], st[rest], cand[rest]
        reg = np.where(st == 1, region[fr], -1)
        shared = np.zeros(cand.size, dtype=bool)
        for i in range(d + 1):
            lonely_fail = (st[:, i] == 1) & ~single[fr[:, i]]
            for j in range(d + 1):
                if i != j:
                    shared |= lonely_fail & (reg[:, i] == reg[:, j])
        for ci in np.flatnonzero(shared).tolist():
            S = loc[fr[ci][st[ci] == 1]]
            if (pp.degrees_local(S) > 0).all():
                out.append(cand[ci:ci + 1])
    return np.sort(np.concatenate(out)) if out else np.zeros(0, dtype=np.int64)
