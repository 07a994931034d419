"""Finite abstract simplicial complexes, subdivision, dual cells, orientation.

Orientation convention: every simplex is stored with strictly ascending
vertex labels and all boundary signs derive from that ordering.  Barycentric
vertices are ordered by (dimension of the underlying simplex, lexicographic),
so chains of faces are automatically ascending.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

from .chainalg import IntegerChainComplex
from .intmatrix import IntMatrix


class SimplicialError(Exception):
    pass


class ParseError(SimplicialError):
    pass


class EmptyComplex(SimplicialError):
    pass


class NotASubcomplex(SimplicialError):
    pass


class UnknownSimplex(SimplicialError):
    pass


class NotPseudomanifold(SimplicialError):
    pass


class NotOrientable(SimplicialError):
    pass


class Disconnected(SimplicialError):
    pass


class SimplicialComplex:
    """Closure of a facet list; vertices normalized to 0..v-1.

    ``simplices[d]`` is the lexicographically sorted tuple of d-simplices,
    each a strictly ascending vertex tuple.
    """

    def __init__(self, facets, vertex_labels=None):
        facets = [tuple(sorted(set(f))) for f in facets]
        if not facets:
            raise EmptyComplex("no facets")
        raw_vertices = []
        seen = set()
        if vertex_labels is not None:
            for v in vertex_labels:
                if v not in seen:
                    seen.add(v)
                    raw_vertices.append(v)
        for f in facets:
            for v in f:
                if v not in seen:
                    seen.add(v)
                    raw_vertices.append(v)
        self.vertex_labels = tuple(raw_vertices)
        index = {v: i for i, v in enumerate(raw_vertices)}
        facets = [tuple(sorted(index[v] for v in f)) for f in facets]
        # closure under faces
        by_dim: dict = {}
        allsimp = set()
        for f in facets:
            for k in range(1, len(f) + 1):
                for s in combinations(f, k):
                    allsimp.add(s)
        for s in allsimp:
            by_dim.setdefault(len(s) - 1, set()).add(s)
        self.simplices = {d: tuple(sorted(ss)) for d, ss in by_dim.items()}
        # facets = maximal simplices
        maximal = []
        for s in sorted(allsimp, key=lambda s: (-len(s), s)):
            if not any(set(s) < set(t) for t in maximal):
                maximal.append(s)
        self.facets = tuple(sorted(maximal, key=lambda s: (len(s), s)))
        self._index = {s: i for d, ss in self.simplices.items()
                       for i, s in enumerate(ss)}

    # -- queries ---------------------------------------------------------------

    @property
    def dim(self) -> int:
        return max(self.simplices)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_labels)

    def f_vector(self):
        return tuple(len(self.simplices.get(d, ()))
                     for d in range(self.dim + 1))

    def all_simplices(self):
        for d in sorted(self.simplices):
            yield from self.simplices[d]

    def __contains__(self, simplex) -> bool:
        return tuple(simplex) in self._index

    def index(self, simplex) -> int:
        return self._index[tuple(simplex)]

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return all(s in other for s in self.all_simplices())

    def contains_all(self, simplices) -> bool:
        return all(tuple(s) in self._index for s in simplices)

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self.simplices == other.simplices

    def __repr__(self):
        return f"SimplicialComplex(f={self.f_vector()})"

    def is_pure(self) -> bool:
        return all(len(f) - 1 == self.dim for f in self.facets)


@dataclass(frozen=True)
class SubcomplexPair:
    """boundary <= total <= ambient, each closed under faces."""

    ambient: SimplicialComplex
    total: SimplicialComplex | None
    boundary: SimplicialComplex | None

    def __post_init__(self):
        if self.total is not None and not self.total.is_subcomplex_of(self.ambient):
            raise NotASubcomplex("total not inside ambient")
        if self.boundary is not None:
            if self.total is None or not self.boundary.is_subcomplex_of(self.total):
                raise NotASubcomplex("boundary not inside total")


@dataclass
class IntChain:
    """Formal integer combination of equidimensional simplices."""

    complex: SimplicialComplex
    degree: int
    terms: dict

    def __post_init__(self):
        clean = {}
        for s, c in self.terms.items():
            s = tuple(s)
            if not c:
                continue
            if len(s) - 1 != self.degree:
                raise SimplicialError(f"term {s} has wrong dimension")
            if s not in self.complex:
                raise UnknownSimplex(f"{s} not in complex")
            clean[s] = int(c)
        self.terms = clean

    def boundary(self) -> "IntChain":
        out: dict = {}
        for s, c in self.terms.items():
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                if not face:
                    continue
                v = out.get(face, 0) + c * (-1) ** i
                if v:
                    out[face] = v
                else:
                    del out[face]
        return IntChain(self.complex, self.degree - 1, out)

    def is_cycle(self) -> bool:
        return self.degree == 0 or not self.boundary().terms

    def scale(self, c: int) -> "IntChain":
        return IntChain(self.complex, self.degree,
                        {s: c * v for s, v in self.terms.items()})

    def to_vector(self, K: SimplicialComplex | None = None,
                  A=None) -> IntMatrix:
        """Column vector in the basis of relative_chain_complex(K, A)."""
        K = K or self.complex
        basis = chain_basis(K, A)[self.degree]
        idx = {s: i for i, s in enumerate(basis)}
        col: dict = {}
        for s, c in self.terms.items():
            col[idx[s]] = {0: c}
        return IntMatrix(len(basis), 1, col)


# -- parsing -----------------------------------------------------------------


def parse_complex(text: str) -> SimplicialComplex:
    """Parse a facet-list document (whitespace or JSON form)."""
    stripped = text.strip()
    if not stripped:
        raise EmptyComplex("empty document")
    if stripped[0] == "{":
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e}") from None
        if "facets" not in doc:
            raise ParseError("JSON document lacks 'facets'")
        facets = doc["facets"]
        if not isinstance(facets, list) or \
                not all(isinstance(f, list) and f for f in facets):
            raise ParseError("'facets' must be a list of nonempty lists")
        if not facets:
            raise EmptyComplex("no facets")
        return SimplicialComplex(facets, vertex_labels=doc.get("vertices"))
    facets = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            verts = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"line {lineno}: vertex labels must be integers")
        if len(set(verts)) != len(verts):
            raise ParseError(f"line {lineno}: repeated vertex in facet")
        facets.append(verts)
    if not facets:
        raise EmptyComplex("no facets")
    return SimplicialComplex(facets)


# -- barycentric subdivision and dual cells -----------------------------------


def barycentric_subdivision(K: SimplicialComplex):
    """(K', provenance) where provenance maps K'-vertex index -> K-simplex."""
    simplices = [s for s in K.all_simplices()]
    simplices.sort(key=lambda s: (len(s), s))
    vert_of = {s: i for i, s in enumerate(simplices)}
    facets = []
    for top in K.facets:
        for chain in _maximal_chains(top):
            facets.append([vert_of[s] for s in chain])
    Kp = SimplicialComplex(facets,
                           vertex_labels=list(range(len(simplices))))
    provenance = {i: s for s, i in vert_of.items()}
    return Kp, provenance


def _maximal_chains(top):
    """All complete flags s_0 < s_1 < ... < top with |s_i| = i+1."""
    if len(top) == 1:
        return [[top]]
    out = []
    for f in combinations(top, len(top) - 1):
        for c in _maximal_chains(f):
            out.append(c + [top])
    return out


def _chains_in(K: SimplicialComplex):
    """All strict chains of simplices of K (as tuples of simplices)."""
    simplices = sorted(K.all_simplices(), key=lambda s: (len(s), s))
    below: dict = {s: [] for s in simplices}
    for s in simplices:
        ss = set(s)
        for t in simplices:
            if len(t) < len(s) and set(t) < ss:
                below[s].append(t)
    chains = []

    def grow(chain):
        chains.append(tuple(chain))
        last = chain[-1]
        for t in uppers[last]:
            grow(chain + [t])

    uppers: dict = {s: [] for s in simplices}
    for s in simplices:
        for t in below[s]:
            uppers[t].append(s)
    for s in simplices:
        grow([s])
    return chains


def dual_cell(K: SimplicialComplex, sigma,
              subdivision=None) -> SubcomplexPair:
    """D(sigma, K) and its boundary inside K'.

    D(sigma,K) is spanned by chains sigma <= s_0 < ... < s_p; the boundary
    consists of the chains with sigma < s_0.
    """
    sigma = tuple(sorted(sigma))
    if sigma not in K:
        raise UnknownSimplex(f"{sigma} not in complex")
    if subdivision is None:
        subdivision = barycentric_subdivision(K)
    Kp, prov = subdivision
    vert_of = {s: i for i, s in prov.items()}
    sset = set(sigma)

    total_facets = []
    boundary_facets = []
    # enumerate K'-simplices by scanning K'-facets' subsets is wasteful;
    # instead collect all chains with s_0 >= sigma directly
    for chain in _chains_in(K):
        if not sset <= set(chain[0]):
            continue
        total_facets.append([vert_of[s] for s in chain])
        if chain[0] != sigma:
            boundary_facets.append([vert_of[s] for s in chain])
    total = _RelabeledSubcomplex(Kp, total_facets)
    bdry = _RelabeledSubcomplex(Kp, boundary_facets) if boundary_facets \
        else None
    return SubcomplexPair(Kp, total, bdry)


class _RelabeledSubcomplex(SimplicialComplex):
    """Subcomplex keeping the ambient's vertex labels."""

    def __init__(self, ambient: SimplicialComplex, facets):
        by_dim: dict = {}
        allsimp = set()
        for f in facets:
            f = tuple(sorted(f))
            for k in range(1, len(f) + 1):
                for s in combinations(f, k):
                    allsimp.add(s)
        if not allsimp:
            raise EmptyComplex("no facets")
        for s in allsimp:
            if s not in ambient:
                raise NotASubcomplex(f"{s} not in ambient")
            by_dim.setdefault(len(s) - 1, set()).add(s)
        self.vertex_labels = ambient.vertex_labels
        self.simplices = {d: tuple(sorted(ss)) for d, ss in by_dim.items()}
        maximal = []
        for s in sorted(allsimp, key=lambda s: (-len(s), s)):
            if not any(set(s) < set(t) for t in maximal):
                maximal.append(s)
        self.facets = tuple(sorted(maximal, key=lambda s: (len(s), s)))
        self._index = {s: i for d, ss in self.simplices.items()
                       for i, s in enumerate(ss)}

    @property
    def n_vertices(self) -> int:
        return len(self.simplices.get(0, ()))


def supplement(L: SimplicialComplex, K: SimplicialComplex | None,
               subdivision=None):
    """Subcomplex of L' of simplices with no face in K'."""
    if subdivision is None:
        subdivision = barycentric_subdivision(L)
    Lp, prov = subdivision
    if K is not None and not K.is_subcomplex_of(L):
        raise NotASubcomplex("K is not a subcomplex of L")
    vert_of = {s: i for i, s in prov.items()}
    kset = set()
    if K is not None:
        kset = {tuple(s) for s in K.all_simplices()}
    facets = []
    for chain in _chains_in(L):
        if any(s in kset for s in chain):
            continue
        facets.append([vert_of[s] for s in chain])
    if not facets:
        return None
    return _RelabeledSubcomplex(Lp, facets)


# -- orientations ---------------------------------------------------------------


def fundamental_cycle(K: SimplicialComplex) -> IntChain:
    """Coherently oriented +-1 top cycle of a closed oriented pseudomanifold.

    Sign normalization: the lexicographically first facet gets +1.
    """
    n = K.dim
    if not K.is_pure():
        raise NotPseudomanifold("complex is not pure")
    facets = list(K.simplices[n])
    if n == 0:
        if len(facets) > 1:
            raise Disconnected("multiple components")
        return IntChain(K, 0, {facets[0]: 1})
    # ridge incidence
    ridge_map: dict = {}
    for fi, f in enumerate(facets):
        for i in range(len(f)):
            ridge = f[:i] + f[i + 1:]
            ridge_map.setdefault(ridge, []).append((fi, (-1) ** i))
    for ridge, inc in ridge_map.items():
        if len(inc) != 2:
            raise NotPseudomanifold(
                f"ridge {ridge} lies in {len(inc)} facets")
    # connectivity of the facet adjacency graph
    adj: dict = {i: [] for i in range(len(facets))}
    for ridge, ((a, sa), (b, sb)) in ridge_map.items():
        adj[a].append((b, sa, sb))
        adj[b].append((a, sb, sa))
    sign = {0: 1}
    stack = [0]
    while stack:
        cur = stack.pop()
        for nb, scur, snb in adj[cur]:
            # coherent: scur*sign[cur] + snb*sign[nb] == 0
            want = -scur * sign[cur] * snb
            if nb in sign:
                if sign[nb] != want:
                    raise NotOrientable("no coherent orientation exists")
            else:
                sign[nb] = want
                stack.append(nb)
    if len(sign) != len(facets):
        raise Disconnected("facet adjacency graph is disconnected")
    chain = IntChain(K, n, {f: sign[i] for i, f in enumerate(facets)})
    if not chain.is_cycle():
        raise NotOrientable("orientation search produced a non-cycle")
    return chain


# -- chain complexes -------------------------------------------------------------


def chain_basis(K: SimplicialComplex, A: SimplicialComplex | None = None):
    """degree -> ordered tuple of simplices of K not in A."""
    if A is not None and not A.is_subcomplex_of(K):
        raise NotASubcomplex("A is not a subcomplex of K")
    out = {}
    for d, ss in K.simplices.items():
        basis = tuple(s for s in ss if A is None or s not in A)
        if basis:
            out[d] = basis
    return out


def relative_chain_complex(K: SimplicialComplex,
                           A: SimplicialComplex | None = None
                           ) -> IntegerChainComplex:
    """Simplicial chains of (K, A) with lexicographic bases."""
    basis = chain_basis(K, A)
    ranks = {d: len(b) for d, b in basis.items()}
    index = {d: {s: i for i, s in enumerate(b)} for d, b in basis.items()}
    diffs = {}
    for d, b in basis.items():
        if d == 0 or (d - 1) not in basis:
            continue
        entries = []
        tgt = index[d - 1]
        for j, s in enumerate(b):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                k = tgt.get(face)
                if k is not None:
                    entries.append((k, j, (-1) ** i))
        M = IntMatrix.from_entries(len(basis[d - 1]), len(b), entries)
        if not M.is_zero():
            diffs[d] = M
    return IntegerChainComplex(ranks, diffs, check=False)


def subdivision_chain(chain: IntChain, K: SimplicialComplex,
                      subdivision) -> IntChain:
    """Push a chain of K into K' via the barycentric subdivision operator.

    sd(v) = v; sd(s) = (-1)^{|s|} (barycenter of s) * sd(ds), with the cone
    vertex appended last (barycentric vertex order refines dimension order).
    """
    Kp, prov = subdivision
    vert_of = {s: i for i, s in prov.items()}

    memo = {}

    def sd(simplex):
        if simplex in memo:
            return memo[simplex]
        if len(simplex) == 1:
            out = {(vert_of[simplex],): 1}
        else:
            b = vert_of[simplex]
            out = {}
            p = len(simplex) - 1
            # boundary of the simplex
            for i in range(len(simplex)):
                face = simplex[:i] + simplex[i + 1:]
                sgn = (-1) ** i
                for t, c in sd(face).items():
                    key = t + (b,)
                    v = out.get(key, 0) + sgn * c * (-1) ** p
                    if v:
                        out[key] = v
                    else:
                        del out[key]
        memo[simplex] = out
        return out

    terms: dict = {}
    for s, c in chain.terms.items():
        for t, v in sd(s).items():
            w = terms.get(t, 0) + c * v
            if w:
                terms[t] = w
            else:
                del terms[t]
    return IntChain(Kp, chain.degree, terms)
