import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from randcomplex.collapse import c_shadow, collapse_to_core, simplex_boundaries
from randcomplex.faces import Complex, boundary_matrix, simplex_boundary
from randcomplex.homology import (
    acyclic_rows, betti_d, betti_details, betti_via_core, classify_regime, left_kernel_sample,
    r_shadow, rank_boundary,
)
from randcomplex.linalg import FAST_PRIME, PRIME, RATIONAL, FieldChoice, eliminate
from randcomplex.sampling import SampleConfig, sample

RP2 = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
       [1, 2, 4], [2, 3, 5], [1, 3, 4], [2, 4, 5], [1, 3, 5]]
TORUS = [sorted({i, (i + 1) % 7, (i + 3) % 7}) for i in range(7)] + \
        [sorted({i, (i + 2) % 7, (i + 3) % 7}) for i in range(7)]
OCTAHEDRON = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 1, 4], [5, 1, 2], [5, 2, 3], [5, 3, 4], [5, 1, 4]]


@st.composite
def small_complexes(draw):
    n = draw(st.integers(4, 9))
    d = draw(st.sampled_from([1, 2, 3]))
    total = math.comb(n, d + 1)
    faces = draw(st.lists(st.integers(0, total - 1), max_size=min(total, 45), unique=True))
    return Complex(n, d, np.array(faces, dtype=np.int64))


def sympy_rank(Y):
    if Y.f_d == 0:
        return 0
    return sympy.Matrix(boundary_matrix(Y).to_dense()).rank()


def test_known_surfaces():
    rp2 = Complex.from_vertex_lists(6, 2, RP2)
    assert betti_d(rp2, RATIONAL) == 0
    assert betti_d(rp2, FieldChoice("prime", 2)) == 1
    assert betti_d(rp2, PRIME) == 0
    torus = Complex.from_vertex_lists(7, 2, TORUS)
    assert torus.f_d == 14
    for f in (RATIONAL, PRIME, FieldChoice("prime", 2)):
        assert betti_d(torus, f) == 1
    assert betti_d(Complex.from_vertex_lists(6, 2, OCTAHEDRON)) == 1


def test_simplex_boundaries_are_cycles():
    Y = simplex_boundary([0, 1, 2, 3], 9)
    assert betti_d(Y) == 1
    two = Complex(9, 2, np.concatenate([Y.faces, simplex_boundary([4, 5, 6, 7], 9).faces]))
    assert betti_d(two) == 2
    assert betti_d(simplex_boundary([0, 1, 2, 3, 4], 7)) == 1


def test_field_must_be_prime():
    with pytest.raises(ValueError):
        FieldChoice("prime", 15)
    with pytest.raises(ValueError):
        FieldChoice("complex")


@settings(max_examples=60, deadline=None)
@given(small_complexes())
def test_rank_matches_sympy_and_rank_nullity(Y):
    if Y.f_d == 0:
        return
    M = boundary_matrix(Y)
    ref = sympy_rank(Y)
    for f in (RATIONAL, PRIME):
        r = rank_boundary(M, f)
        assert r.rank == ref
        assert r.kernel_dim + r.rank == M.shape[1]
        assert r.cokernel_dim + r.rank == M.shape[0]
    assert rank_boundary(M, RATIONAL, certify=False).rank == ref


@settings(max_examples=40, deadline=None)
@given(small_complexes())
def test_betti_equals_betti_of_core(Y):
    assert betti_d(Y) == betti_via_core(Y)


def test_betti_of_core_on_random_complexes():
    for s in range(20):
        Y = sample(SampleConfig(n=14 + s % 7, d=2, c=3.0 + 0.5 * (s % 3), seed=s))
        assert betti_d(Y) == betti_via_core(Y)


def test_acyclic_rows_do_not_change_rank():
    for s in range(10):
        Y = sample(SampleConfig(n=12, d=2 + s % 2, c=4.0, seed=s))
        M = boundary_matrix(Y, rows="support")
        T = acyclic_rows(M)
        A = M.to_dense()
        keep = np.setdiff1d(np.arange(A.shape[0]), T)
        assert sympy.Matrix(A[keep]).rank() == sympy.Matrix(A).rank()


def test_prime_rank_agrees_with_rational_on_random_instances():
    agree = 0
    total = 0
    for s in range(40):
        Y = sample(SampleConfig(n=20, d=2, c=3.5, seed=50 + s))
        M = boundary_matrix(Y, rows="support")
        rq = rank_boundary(M, RATIONAL).rank
        for f in (PRIME, FAST_PRIME):
            rp = rank_boundary(M, f).rank
            assert rp <= rq
            agree += rp == rq
            total += 1
    assert agree >= 0.99 * total


def test_certified_methods_are_reported():
    Y = sample(SampleConfig(n=30, d=2, c=3.0, seed=4))
    core = collapse_to_core(Y).core
    r = rank_boundary(boundary_matrix(core, rows="support"), RATIONAL)
    assert r.certified and r.method.startswith("certified")


def test_eliminate_dense_and_sparse_agree_with_kernel():
    rng = np.random.default_rng(0)
    for t in range(20):
        r, c = rng.integers(5, 35, 2)
        A = rng.integers(-2, 3, (r, c)) * (rng.random((r, c)) < 0.4)
        ref = sympy.Matrix(A).rank()
        for q in (FAST_PRIME.q, PRIME.q, None):
            for cap in (0, 4096):
                eqs = [{j: int(A[i, j]) for j in range(c) if A[i, j]} for i in range(r)]
                el = eliminate(eqs, int(c), q, cost_cap=cap)
                assert el.rank == ref
                free = el.free_vars()
                E = np.eye(free.size, dtype=np.int64)
                X = el.kernel_vectors(E if q else E.astype(object))
                R = A.astype(object) @ X.astype(object)
                if q:
                    R = R % q
                assert not any(v != 0 for v in np.ravel(R))


def test_left_kernel_sample_annihilates_columns():
    Y = sample(SampleConfig(n=15, d=2, c=4.0, seed=8))
    rows, V = left_kernel_sample(Y, 3, PRIME.q, seed=1)
    M = boundary_matrix(Y, rows=rows).to_dense()
    assert not ((V.T.astype(object) @ M.astype(object)) % PRIME.q).any()


def test_r_shadow_of_tetrahedron_minus_face():
    full = simplex_boundary([0, 1, 2, 3], 6)
    Y = Complex(6, 2, full.faces[1:])
    for f in (RATIONAL, PRIME):
        assert r_shadow(Y, f).tolist() == [int(full.faces[0])]


def test_r_shadow_inside_c_shadow_and_fields_agree():
    for s in range(12):
        Y = sample(SampleConfig(n=12, d=2, c=3.0 + 0.5 * (s % 3), seed=70 + s))
        rq = r_shadow(Y, RATIONAL)
        assert np.array_equal(rq, r_shadow(Y, PRIME, seed=s))
        assert set(rq.tolist()) <= set(c_shadow(Y).tolist())
        # each shadow face really keeps the rank
        base = rank_boundary(boundary_matrix(Y)).rank
        for sigma in rq[:5].tolist():
            assert rank_boundary(boundary_matrix(Y.with_faces([sigma]))).rank == base


def test_betti_details_keys():
    info = betti_details(simplex_boundary([0, 1, 2, 3], 5))
    assert info["betti"] == 1 and {"rank", "f_d", "f_dminus1", "method"} <= set(info)


def test_classify_regime_examples():
    assert classify_regime(Complex(6, 2, np.zeros(0, dtype=np.int64))) == "collapsible_or_gravel"
    assert classify_regime(simplex_boundary([0, 1, 2, 3], 6)) == "collapsible_or_gravel"
    assert classify_regime(Complex.from_vertex_lists(6, 2, OCTAHEDRON)) == "cyclic"
    assert classify_regime(Complex.from_vertex_lists(6, 2, RP2)) == "acyclic_except_gravel"


def test_acyclic_except_gravel_on_random_samples():
    seen = 0
    for s in range(15):
        Y = sample(SampleConfig(n=150, d=2, c=2.6, seed=s))
        if classify_regime(Y) == "acyclic_except_gravel":
            core = collapse_to_core(Y).core
            assert not collapse_to_core(Y).is_gravel
            assert betti_d(core) == len(simplex_boundaries(core))
            seen += 1
    assert seen >= 10
