"""The small-complex zoo used across tests, scripts, and docs.

All facet lists are classical triangulations; each is certified by the test
suite (f-vectors, homology, orientability, local duality where applicable).
"""

from __future__ import annotations

from itertools import combinations

from .simplicial import IntChain, SimplicialComplex


def simplex_boundary(n: int) -> SimplicialComplex:
    """The boundary of an (n+1)-simplex: a triangulated n-sphere."""
    verts = range(n + 2)
    return SimplicialComplex(list(combinations(verts, n + 1)))


def point() -> SimplicialComplex:
    return SimplicialComplex([[0]])


def interval() -> SimplicialComplex:
    return SimplicialComplex([[0, 1]])


def circle(k: int = 3) -> SimplicialComplex:
    return SimplicialComplex([[i, (i + 1) % k] for i in range(k)]
                             if k > 2 else [[0, 1], [1, 2], [0, 2]])


def rp2_6() -> SimplicialComplex:
    """6-vertex real projective plane (antipodal icosahedron quotient)."""
    facets = [
        (0, 1, 3), (0, 1, 4), (0, 2, 3), (0, 2, 5), (0, 4, 5),
        (1, 2, 4), (1, 2, 5), (1, 3, 5), (2, 3, 4), (3, 4, 5),
    ]
    return SimplicialComplex(facets)


def torus_7() -> SimplicialComplex:
    """7-vertex 2-torus: facets {i, i+1, i+3} and {i, i+2, i+3} mod 7."""
    facets = []
    for i in range(7):
        facets.append(tuple(sorted(((i) % 7, (i + 1) % 7, (i + 3) % 7))))
        facets.append(tuple(sorted(((i) % 7, (i + 2) % 7, (i + 3) % 7))))
    return SimplicialComplex(facets)


#: 9-vertex triangulation of the complex projective plane.  Constructed as a
#: union of four Z3 x Z3 orbits of 5-subsets of the 3x3 vertex grid; the test
#: suite certifies f-vector (9, 36, 84, 90, 36), homology (Z, 0, Z, 0, Z),
#: orientability, sphere links, and middle signature +1.
CP2_9_FACETS = (
    (0, 1, 2, 3, 4), (0, 1, 2, 3, 5), (0, 1, 2, 4, 5), (0, 1, 3, 4, 6),
    (0, 1, 3, 5, 7), (0, 1, 3, 6, 7), (0, 1, 4, 5, 6), (0, 1, 5, 6, 8),
    (0, 1, 5, 7, 8), (0, 1, 6, 7, 8), (0, 2, 3, 4, 8), (0, 2, 3, 5, 8),
    (0, 2, 4, 5, 6), (0, 2, 4, 6, 7), (0, 2, 4, 7, 8), (0, 2, 5, 6, 8),
    (0, 2, 6, 7, 8), (0, 3, 4, 6, 7), (0, 3, 4, 7, 8), (0, 3, 5, 7, 8),
    (1, 2, 3, 4, 8), (1, 2, 3, 5, 7), (1, 2, 3, 6, 7), (1, 2, 3, 6, 8),
    (1, 2, 4, 5, 7), (1, 2, 4, 7, 8), (1, 2, 6, 7, 8), (1, 3, 4, 6, 8),
    (1, 4, 5, 6, 8), (1, 4, 5, 7, 8), (2, 3, 5, 6, 7), (2, 3, 5, 6, 8),
    (2, 4, 5, 6, 7), (3, 4, 5, 6, 7), (3, 4, 5, 6, 8), (3, 4, 5, 7, 8),
)


def cp2_9() -> SimplicialComplex:
    """9-vertex complex projective plane."""
    return SimplicialComplex(CP2_9_FACETS)


def wedge_s1_s2() -> SimplicialComplex:
    """S^1 v S^2 glued at vertex 0: a circle 0-1-2 and the boundary of the
    3-simplex on {0, 3, 4, 5}."""
    facets = [
        (0, 1), (1, 2), (0, 2),
        (0, 3, 4), (0, 3, 5), (0, 4, 5), (3, 4, 5),
    ]
    return SimplicialComplex(facets)


def wedge_s2_cycle(K: SimplicialComplex) -> IntChain:
    """The 2-sphere fundamental cycle inside wedge_s1_s2()."""
    terms = {(0, 3, 4): 1, (0, 3, 5): -1, (0, 4, 5): 1, (3, 4, 5): -1}
    return IntChain(K, 2, terms)
