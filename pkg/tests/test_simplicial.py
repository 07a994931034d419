import random
from itertools import combinations

import pytest

from surgerykit.corpus import (
    cp2_9,
    interval,
    point,
    rp2_6,
    simplex_boundary,
    torus_7,
    wedge_s1_s2,
)
from surgerykit.chainalg import AbelianGroup
from surgerykit.simplicial import (
    Disconnected,
    EmptyComplex,
    IntChain,
    NotASubcomplex,
    NotOrientable,
    NotPseudomanifold,
    ParseError,
    SimplicialComplex,
    UnknownSimplex,
    barycentric_subdivision,
    dual_cell,
    fundamental_cycle,
    parse_complex,
    relative_chain_complex,
    subdivision_chain,
    supplement,
)


# -- independent oracles ------------------------------------------------------


def closure_count(facets):
    """Exhaustive closure of a facet list: f-vector by brute force."""
    seen = set()
    for f in facets:
        f = tuple(sorted(f))
        for k in range(1, len(f) + 1):
            seen.update(combinations(f, k))
    dims = {}
    for s in seen:
        dims[len(s) - 1] = dims.get(len(s) - 1, 0) + 1
    return tuple(dims[d] for d in range(max(dims) + 1))


def poset_chain_fvector(K):
    """f-vector of the barycentric subdivision by brute-force chain
    enumeration in the face poset."""
    simplices = list(K.all_simplices())
    counts = {}

    def grow(chain):
        counts[len(chain) - 1] = counts.get(len(chain) - 1, 0) + 1
        last = chain[-1]
        for t in simplices:
            if len(t) > len(last) and set(last) < set(t):
                grow(chain + [t])

    for s in simplices:
        grow([s])
    return tuple(counts[d] for d in range(max(counts) + 1))


def brute_orientation_search(K):
    """Try all +-1 colorings of the facets; return True iff one is coherent."""
    n = K.dim
    facets = list(K.simplices[n])
    ridge_map = {}
    for fi, f in enumerate(facets):
        for i in range(len(f)):
            ridge = f[:i] + f[i + 1:]
            ridge_map.setdefault(ridge, []).append((fi, (-1) ** i))
    for bits in range(1 << (len(facets) - 1)):
        signs = [1] + [1 if (bits >> k) & 1 else -1
                       for k in range(len(facets) - 1)]
        ok = True
        for inc in ridge_map.values():
            if len(inc) == 2:
                (a, sa), (b, sb) = inc
                if signs[a] * sa + signs[b] * sb != 0:
                    ok = False
                    break
        if ok:
            return True
    return False


# -- parsing ------------------------------------------------------------------


def test_parse_boundary_of_3_simplex():
    K = parse_complex("0 1 2\n0 1 3\n0 2 3\n1 2 3\n")
    assert K.f_vector() == (4, 6, 4)
    assert K.dim == 2
    assert len(K.facets) == 4


def test_parse_single_point():
    K = parse_complex("0\n")
    assert K.f_vector() == (1,)
    assert list(K.all_simplices()) == [(0,)]


def test_parse_torus_fvector_matches_closure_oracle():
    T = torus_7()
    facets = [tuple(f) for f in T.facets]
    assert T.f_vector() == (7, 21, 14)
    assert closure_count(facets) == (7, 21, 14)


def test_parse_json_and_comments():
    K = parse_complex('{"vertices": [5, 7, 9], "facets": [[5, 7], [7, 9]]}')
    assert K.f_vector() == (3, 2)
    K2 = parse_complex("# a comment\n0 1\n\n1 2  # trailing\n")
    assert K2.f_vector() == (3, 2)


def test_parse_errors():
    with pytest.raises(EmptyComplex):
        parse_complex("# nothing here\n")
    with pytest.raises(ParseError):
        parse_complex("0 x 2\n")
    with pytest.raises(ParseError):
        parse_complex("0 0 1\n")
    with pytest.raises(ParseError):
        parse_complex('{"facets": "nope"}')


def test_facet_maximality_and_closure_idempotence():
    K = parse_complex("0 1 2\n0 1\n2\n")
    assert K.facets == ((0, 1, 2),)
    K2 = SimplicialComplex([s for s in K.all_simplices()])
    assert K2 == K


# -- barycentric subdivision ---------------------------------------------------


def test_subdivision_interval():
    K = interval()
    Kp, prov = barycentric_subdivision(K)
    assert Kp.f_vector() == (3, 2)
    assert set(prov.values()) == {(0,), (1,), (0, 1)}


def test_subdivision_point_fixed():
    K = point()
    Kp, _ = barycentric_subdivision(K)
    assert Kp.f_vector() == (1,)


def test_subdivision_sphere_fvector_matches_poset_oracle():
    K = simplex_boundary(2)
    Kp, _ = barycentric_subdivision(K)
    assert Kp.f_vector() == (14, 36, 24)
    assert poset_chain_fvector(K) == (14, 36, 24)


def test_subdivision_vertex_order_refines_dimension():
    K = simplex_boundary(2)
    Kp, prov = barycentric_subdivision(K)
    dims = [len(prov[i]) for i in range(Kp.n_vertices)]
    assert dims == sorted(dims)


@pytest.mark.parametrize("seed", range(6))
def test_subdivision_preserves_homology(seed):
    rng = random.Random(seed)
    verts = list(range(6))
    facets = set()
    for _ in range(rng.randint(2, 5)):
        k = rng.randint(1, 3)
        facets.add(tuple(sorted(rng.sample(verts, k + 1))))
    K = SimplicialComplex(sorted(facets))
    Kp, _ = barycentric_subdivision(K)
    assert relative_chain_complex(K).homology() == \
        relative_chain_complex(Kp).homology()


# -- dual cells -----------------------------------------------------------------


def test_dual_cell_top_simplex_is_barycenter():
    K = simplex_boundary(2)
    pair = dual_cell(K, (0, 1, 2))
    assert pair.total.f_vector() == (1,)
    assert pair.boundary is None


def test_dual_cell_edge_of_interval():
    K = interval()
    pair = dual_cell(K, (0, 1))
    assert pair.total.f_vector() == (1,)
    assert pair.boundary is None


def test_dual_cell_vertex_of_sphere():
    K = simplex_boundary(2)
    pair = dual_cell(K, (0,))
    # D(v) is acyclic, its boundary has the homology of S^1
    ht = relative_chain_complex(pair.total).homology()
    assert dict(ht) == {0: AbelianGroup(1, ())}
    hb = relative_chain_complex(pair.boundary).homology()
    assert dict(hb) == {0: AbelianGroup(1, ()), 1: AbelianGroup(1, ())}


def test_dual_cell_vertex_matches_bruteforce_poset():
    K = simplex_boundary(2)
    pair = dual_cell(K, (0,))
    # brute force: chains with all members containing vertex 0
    _, prov = barycentric_subdivision(K)
    vert_of = {s: i for i, s in prov.items()}
    simplices = [s for s in K.all_simplices() if 0 in s]
    chains = []

    def grow(chain):
        chains.append(tuple(vert_of[s] for s in chain))
        for t in simplices:
            if len(t) > len(chain[-1]) and set(chain[-1]) < set(t):
                grow(chain + [t])

    for s in simplices:
        grow([s])
    got = set()
    for d, ss in pair.total.simplices.items():
        got.update(ss)
    assert got == set(chains)


def test_dual_cell_unknown_simplex():
    with pytest.raises(UnknownSimplex):
        dual_cell(simplex_boundary(2), (0, 1, 2, 3))


def test_dual_cells_partition_top_simplices():
    K = torus_7()
    sub = barycentric_subdivision(K)
    Kp, prov = sub
    top = set(Kp.simplices[Kp.dim])
    seen = {}
    for v in K.simplices[0]:
        pair = dual_cell(K, v, subdivision=sub)
        for s in pair.total.simplices.get(Kp.dim, ()):
            # facet of K' lies in D(v) iff v is the minimal chain element
            seen.setdefault(s, set()).add(v)
    assert set(seen) == top
    for s, owners in seen.items():
        minimal = prov[s[0]]
        assert owners == {(w,) for w in minimal}


# -- supplement ------------------------------------------------------------------


def test_supplement_of_everything_is_empty():
    K = simplex_boundary(2)
    assert supplement(K, K) is None


def test_supplement_of_empty_is_all():
    K = simplex_boundary(2)
    Kp, _ = barycentric_subdivision(K)
    S = supplement(K, None)
    assert S.f_vector() == Kp.f_vector()


def test_supplement_of_vertex_retracts_to_opposite_edge():
    K = simplex_boundary(1)  # triangle boundary? dim 1: use full 2-simplex
    K = SimplicialComplex([[0, 1, 2]])
    A = SimplicialComplex([[0]])
    S = supplement(K, A)
    h = relative_chain_complex(S).homology()
    assert dict(h) == {0: AbelianGroup(1, ())}


def test_supplement_not_subcomplex():
    K = simplex_boundary(2)
    A = SimplicialComplex([[0, 1, 2, 3]])
    with pytest.raises(NotASubcomplex):
        supplement(K, A)


def test_supplement_dichotomy():
    # the open dual cells of K-simplices (chains whose minimum lies in K,
    # equivalently: L'-simplices with a face in K') and the supplement are
    # disjoint and jointly cover L'
    L = simplex_boundary(2)
    K = SimplicialComplex([[0, 1]])
    sub = barycentric_subdivision(L)
    Lp, prov = sub
    S = supplement(L, K, subdivision=sub)
    covered = set()
    for s in K.all_simplices():
        pair = dual_cell(L, s, subdivision=sub)
        bdry = set()
        if pair.boundary is not None:
            for d, ss in pair.boundary.simplices.items():
                bdry.update(ss)
        for d, ss in pair.total.simplices.items():
            covered.update(set(ss) - bdry)
    supp = set()
    for d, ss in S.simplices.items():
        supp.update(ss)
    assert not (covered & supp)
    allp = set()
    for d, ss in Lp.simplices.items():
        allp.update(ss)
    assert covered | supp == allp
    # face-condition dichotomy: covered = simplices with a face in K'
    kverts = {i for i, s in prov.items() if s in K}
    for s in covered:
        assert any(v in kverts for v in s)
    for s in supp:
        assert not any(v in kverts for v in s)


# -- fundamental cycles -----------------------------------------------------------


def test_fundamental_cycle_sphere():
    K = simplex_boundary(2)
    xi = fundamental_cycle(K)
    assert set(xi.terms.values()) <= {1, -1}
    assert xi.terms[(0, 1, 2)] == 1
    assert xi.is_cycle()
    # alternating signs of the standard simplex boundary
    assert xi.terms == {(0, 1, 2): 1, (0, 1, 3): -1, (0, 2, 3): 1,
                        (1, 2, 3): -1}


def test_fundamental_cycle_rp2_not_orientable():
    K = rp2_6()
    assert not brute_orientation_search(K)
    with pytest.raises(NotOrientable):
        fundamental_cycle(K)


def test_fundamental_cycle_torus():
    K = torus_7()
    xi = fundamental_cycle(K)
    assert len(xi.terms) == 14
    assert set(xi.terms.values()) <= {1, -1}
    vec = xi.to_vector()
    C = relative_chain_complex(K)
    assert (C.differential(2) @ vec).is_zero()


def test_fundamental_cycle_cp2():
    K = cp2_9()
    assert K.f_vector() == (9, 36, 84, 90, 36)
    xi = fundamental_cycle(K)
    assert xi.is_cycle()
    h = relative_chain_complex(K).homology()
    assert dict(h) == {0: AbelianGroup(1, ()), 2: AbelianGroup(1, ()),
                       4: AbelianGroup(1, ())}


def test_fundamental_cycle_errors():
    with pytest.raises(NotPseudomanifold):
        fundamental_cycle(wedge_s1_s2())
    # ridge in three facets
    with pytest.raises(NotPseudomanifold):
        fundamental_cycle(SimplicialComplex([[0, 1, 2], [0, 1, 3], [0, 1, 4]]))
    two_spheres = SimplicialComplex(
        [list(f) for f in simplex_boundary(2).facets] +
        [[v + 4, w + 4, u + 4] for (v, w, u) in simplex_boundary(2).facets])
    with pytest.raises(Disconnected):
        fundamental_cycle(two_spheres)


# -- relative chain complexes -------------------------------------------------------


def test_relative_interval_mod_boundary():
    K = interval()
    A = SimplicialComplex([[0], [1]])
    C = relative_chain_complex(K, A)
    assert C.ranks == {1: 1}
    assert dict(C.homology()) == {1: AbelianGroup(1, ())}


def test_relative_sphere_absolute():
    C = relative_chain_complex(simplex_boundary(2))
    assert [C.rank(r) for r in (0, 1, 2)] == [4, 6, 4]
    assert (C.differential(1) @ C.differential(2)).is_zero()


def test_relative_dual_cell_lefschetz():
    K = simplex_boundary(2)
    pair = dual_cell(K, (0,))
    C = relative_chain_complex(pair.total, pair.boundary)
    h = C.homology()
    assert dict(h) == {2: AbelianGroup(1, ())}


def test_relative_not_subcomplex():
    K = simplex_boundary(2)
    A = SimplicialComplex([[0, 1, 2], [3, 4, 5]])  # (3,4,5) is not in K
    with pytest.raises(NotASubcomplex):
        relative_chain_complex(K, A)


def test_d_squared_zero_everywhere():
    for K in (rp2_6(), torus_7(), wedge_s1_s2()):
        C = relative_chain_complex(K)
        for r in C.degrees():
            assert (C.differential(r) @ C.differential(r + 1)).is_zero()


def test_subdivision_chain_is_cycle_map():
    K = torus_7()
    sub = barycentric_subdivision(K)
    xi = fundamental_cycle(K)
    xi_p = subdivision_chain(xi, K, sub)
    assert xi_p.is_cycle()
    assert set(xi_p.terms.values()) <= {1, -1}
    # 14 triangles * 6 flags each
    assert len(xi_p.terms) == 84
