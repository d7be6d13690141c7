import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcomplex.collapse import (
    ProtectedPeeler, RootedCollapser, c_shadow, c_shadow_oracle, collapse_phase, collapse_phases,
    collapse_to_core, elementary_collapse_core, gravel_components, is_gravel, removal_phases,
    rooted_collapse, rooted_collapse_direct, simplex_boundaries, strip_exposed,
)
from randcomplex.faces import Complex, build_incidence, face_rank, simplex_boundary
from randcomplex.sampling import SampleConfig, sample
from randcomplex.thresholds import poisson_tail, t_sequence


def random_complex(n, c, seed, d=2):
    return sample(SampleConfig(n=n, d=d, c=c, seed=seed))


@st.composite
def small_complexes(draw, max_n=9):
    n = draw(st.integers(4, max_n))
    d = draw(st.sampled_from([1, 2, 3]))
    total = math.comb(n, d + 1)
    faces = draw(st.lists(st.integers(0, total - 1), max_size=min(total, 40), unique=True))
    return Complex(n, d, np.array(faces, dtype=np.int64))


def test_single_face_collapses_in_one_phase():
    Y = Complex.from_vertex_lists(5, 2, [[0, 1, 2]])
    st_ = collapse_phase(build_incidence(Y))
    assert st_.f_d == 0 and st_.phases == 1
    res = collapse_to_core(Y)
    assert res.is_collapsible and res.phases_used == 1


def test_phase_removes_all_faces_with_a_free_facet():
    # two triangles sharing an edge: both have free edges at phase start
    Y = Complex.from_vertex_lists(5, 2, [[0, 1, 2], [1, 2, 3]])
    assert collapse_phases(Y, 1).f_d == 0
    assert collapse_phases(Y, 0) == Y


OCTAHEDRON = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 1, 4], [5, 1, 2], [5, 2, 3], [5, 3, 4], [5, 1, 4]]


def test_phase_count_for_punctured_octahedron():
    # removing one face frees three edges; the collapse then sweeps across in 3 phases
    Y = Complex.from_vertex_lists(6, 2, OCTAHEDRON[1:])
    assert collapse_phases(Y, 1).f_d == 4
    assert collapse_phases(Y, 2).f_d == 1
    res = collapse_to_core(Y)
    assert res.is_collapsible and res.phases_used == 3


def test_simplex_boundary_is_its_own_core():
    Y = simplex_boundary([1, 3, 4, 6], 8)
    res = collapse_to_core(Y)
    assert res.core == Y and not res.is_collapsible and res.is_gravel
    assert gravel_components(Y) == [[1, 3, 4, 6]]
    assert simplex_boundaries(Y).tolist() == [[1, 3, 4, 6]]


def test_gravel_detection():
    two = Complex(10, 2, np.concatenate([simplex_boundary([0, 1, 2, 3], 10).faces,
                                         simplex_boundary([5, 6, 7, 8], 10).faces]))
    ok, comps = is_gravel(two)
    assert ok and sorted(comps) == [[0, 1, 2, 3], [5, 6, 7, 8]]
    touching = Complex(10, 2, np.concatenate([simplex_boundary([0, 1, 2, 3], 10).faces,
                                              simplex_boundary([3, 6, 7, 8], 10).faces]))
    assert not is_gravel(touching)[0]
    assert len(simplex_boundaries(touching)) == 2


def test_attached_simplex_boundary_is_found():
    # a tetrahedron boundary sharing an edge with a larger cycle is not a gravel component
    Y = Complex.from_vertex_lists(9, 2, OCTAHEDRON + [list(f) for f in
                                  simplex_boundary([1, 2, 7, 8], 9).vertices().tolist()])
    assert gravel_components(collapse_to_core(Y).core) == []
    assert simplex_boundaries(Y).tolist() == [[1, 2, 7, 8]]


def test_strip_exposed():
    Y = Complex.from_vertex_lists(6, 2, [[0, 1, 2], [1, 2, 3]])
    assert strip_exposed(Y) == (5, 2)
    assert strip_exposed(Complex(6, 2, np.zeros(0, dtype=np.int64))) == (0, 0)


def test_negative_phase_count_rejected():
    with pytest.raises(ValueError):
        collapse_phases(Complex(5, 2, np.array([0])), -1)


@settings(max_examples=60, deadline=None)
@given(small_complexes())
def test_core_is_order_independent_and_has_no_free_face(Y):
    core = collapse_to_core(Y).core
    for order in ("smallest", "largest", "random"):
        assert elementary_collapse_core(Y, order=order, seed=1) == core
    assert collapse_to_core(Y, tie_break="largest").core == core
    if core.f_d:
        deg = np.bincount(np.unique(core.facets(), return_inverse=True)[1].ravel())
        assert deg.min() >= 2


def test_core_order_independence_hundred_instances():
    for s in range(100):
        n = 8 + s % 13
        Y = random_complex(n, 2.0 + (s % 5) * 0.5, s)
        core = collapse_to_core(Y).core
        assert elementary_collapse_core(Y, "random", seed=s) == core
        assert elementary_collapse_core(Y, "largest") == core


@settings(max_examples=40, deadline=None)
@given(small_complexes(max_n=8))
def test_phases_are_monotone(Y):
    prev = Y
    for k in range(1, 6):
        cur = collapse_phases(Y, k)
        assert set(cur.faces.tolist()) <= set(prev.faces.tolist())
        prev = cur
    assert collapse_phases(Y, 50) == collapse_to_core(Y).core


def test_removal_phases_consistent():
    Y = random_complex(40, 2.8, 3)
    _, when, total = removal_phases(Y)
    for k in range(total + 1):
        alive = Y.faces[when > k]
        assert np.array_equal(collapse_phases(Y, k).faces, alive)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 5, None])
def test_rooted_collapse_matches_direct_process(k):
    for s in range(15):
        Y = random_complex(25, 2.5 + 0.25 * (s % 4), 100 + s)
        rc = RootedCollapser(Y)
        rng = np.random.default_rng(s)
        for tau in rng.choice(math.comb(25, 2), size=6, replace=False).tolist():
            assert rc.degree(tau, k) == rooted_collapse_direct(Y, [tau], k)[0]


def test_protected_sets_match_direct_process():
    for s in range(10):
        Y = random_complex(20, 2.6, 200 + s)
        rc = RootedCollapser(Y)
        taus = np.random.default_rng(s).choice(190, size=3, replace=False).tolist()
        for k in (1, 3, None):
            assert rc.protected_degrees(taus, k) == rooted_collapse_direct(Y, taus, k)


def test_peeler_matches_direct_fixed_point():
    for s in range(10):
        Y = random_complex(22, 2.7, 300 + s)
        pp = ProtectedPeeler(Y)
        taus = np.random.default_rng(s).choice(231, size=12, replace=False).tolist()
        assert pp.degrees(taus) == rooted_collapse_direct(Y, taus, None)
        assert [pp.degrees([t])[0] for t in taus] == [rooted_collapse_direct(Y, [t], None)[0] for t in taus]


def test_rooted_root_without_faces():
    Y = Complex.from_vertex_lists(6, 2, [[0, 1, 2]])
    assert rooted_collapse(Y, face_rank([3, 4], 6), 2) == 0
    # the other two edges are still free, so protection does not help
    assert rooted_collapse(Y, face_rank([0, 1], 6), 0) == 1
    assert rooted_collapse(Y, face_rank([0, 1], 6), 3) == 0


def test_c_shadow_fast_path_matches_oracle():
    for s in range(25):
        n = 9 + s % 6
        Y = random_complex(n, 2.2 + 0.2 * (s % 6), 400 + s)
        assert np.array_equal(c_shadow(Y), c_shadow_oracle(Y))


def test_c_shadow_of_tetrahedron_minus_face():
    full = simplex_boundary([0, 1, 2, 3], 6)
    missing = int(full.faces[0])
    Y = Complex(6, 2, full.faces[1:])
    assert missing in c_shadow(Y).tolist()
    assert c_shadow(Y).tolist() == c_shadow_oracle(Y).tolist()


def test_local_limit_degree_two_fraction():
    # degree >= 2 after k phases is the same event for rooted and plain collapse
    n, c, k = 2000, 3.0, 15
    Y = sample(SampleConfig(n=n, d=2, c=c, seed=11))
    st_ = collapse_phase(build_incidence(Y))
    for _ in range(k - 1):
        collapse_phase(st_)
    frac = np.count_nonzero(st_.degree >= 2) / math.comb(n, 2)
    lam = c * (1 - t_sequence(c, 2, k - 1)[-1]) ** 2
    assert abs(frac - poisson_tail(2, lam)) < 0.01
