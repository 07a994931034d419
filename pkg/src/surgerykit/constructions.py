"""Equivariant diagonal approximations and symmetric constructions.

The diagonal family Delta_s is built once per simplex dimension on the
standard model (the full complex of the N-simplex) and transported to an
arbitrary ordered simplex by relabeling, which makes every value
support-local and natural under order-preserving inclusions by construction.

Delta_0 is the front/back Alexander-Whitney coproduct.  For s >= 1 the value
on the top simplex is produced by an explicit cone contraction of the tensor
square of the standard model, solving the higher-homotopy identity

    d(Delta_s x) = Delta_s(dx) + (-1)^{|x|} (Delta_{s-1} x
                                             + (-1)^s T Delta_{s-1} x)

degreewise.  The identity is re-verified by integer arithmetic each time a
new (dimension, s) pair is materialized; a failure raises IdentityViolation
and indicates an implementation bug, never bad user input.
"""

from __future__ import annotations

from itertools import combinations

from .chainalg import ChainMap, IntegerChainComplex
from .intmatrix import IntMatrix
from .simplicial import (
    IntChain,
    SimplicialComplex,
    SimplicialError,
    chain_basis,
    relative_chain_complex,
)
from .structures import (
    GElement,
    NotACycle,
    SymmetricStructure,
)


class IdentityViolation(SimplicialError):
    """Internal consistency failure in the diagonal recursion."""


class NotRelativeCycle(SimplicialError):
    pass


# -- tensor arithmetic on the standard model ----------------------------------
#
# a tensor is a dict {(a, b): coeff} with a, b ascending vertex tuples


def _tensor_add(acc, key, val):
    if not val:
        return
    cur = acc.get(key, 0) + val
    if cur:
        acc[key] = cur
    else:
        del acc[key]


def _tensor_d(t):
    out: dict = {}
    for (a, b), c in t.items():
        for i in range(len(a)):
            if len(a) > 1:
                _tensor_add(out, (a[:i] + a[i + 1:], b), c * (-1) ** i)
        p = len(a) - 1
        for i in range(len(b)):
            if len(b) > 1:
                _tensor_add(out, (a, b[:i] + b[i + 1:]),
                            c * (-1) ** (p + i))
    return out


def _tensor_T(t):
    out: dict = {}
    for (a, b), c in t.items():
        pq = (len(a) - 1) * (len(b) - 1)
        _tensor_add(out, (b, a), c * (-1 if pq % 2 else 1))
    return out


def _cone(a):
    """Join with vertex 0: zero if 0 is already a vertex."""
    if a[0] == 0:
        return None
    return (0,) + a


def _tensor_h(t):
    """Contraction of the tensor square of a cone on vertex 0:
    h = c (x) 1 + (eta eps) (x) c."""
    out: dict = {}
    for (a, b), c in t.items():
        ca = _cone(a)
        if ca is not None:
            _tensor_add(out, (ca, b), c)
        if len(a) == 1:
            cb = _cone(b)
            if cb is not None:
                _tensor_add(out, ((0,), cb), c)
    return out


def _aw(top):
    out = {}
    for i in range(len(top)):
        out[(top[:i + 1], top[i:])] = 1
    return out


class DiagonalFamily:
    """Memoized standard-model values of the higher diagonals."""

    def __init__(self):
        self._memo = {}

    def value(self, n_dim: int, s: int):
        """Delta_s of the standard n_dim-simplex (vertices 0..n_dim)."""
        key = (n_dim, s)
        got = self._memo.get(key)
        if got is not None:
            return got
        top = tuple(range(n_dim + 1))
        if s == 0:
            val = _aw(top)
        else:
            # RHS = Delta_s(d top) + (-1)^n (D_{s-1} + (-1)^s T D_{s-1})(top)
            rhs: dict = {}
            for i in range(len(top)):
                if len(top) == 1:
                    break
                face = top[:i] + top[i + 1:]
                sgn = (-1) ** i
                for (a, b), c in self.evaluate(s, face).items():
                    _tensor_add(rhs, (a, b), sgn * c)
            prev = self.value(n_dim, s - 1)
            tprev = _tensor_T(prev)
            nsgn = (-1) ** n_dim
            ssgn = (-1) ** s
            for (a, b), c in prev.items():
                _tensor_add(rhs, (a, b), nsgn * c)
            for (a, b), c in tprev.items():
                _tensor_add(rhs, (a, b), nsgn * ssgn * c)
            if _tensor_d(rhs):
                raise IdentityViolation(
                    f"diagonal recursion lost exactness at dim {n_dim}, "
                    f"s={s}")
            val = _tensor_h(rhs)
            # solution check: d val == rhs (degree of rhs is positive here
            # except in the trivial vanishing cases)
            diff = _tensor_d(val)
            for k, c in rhs.items():
                _tensor_add(diff, k, -c)
            if diff:
                raise IdentityViolation(
                    f"contraction failed at dim {n_dim}, s={s}")
        self._memo[key] = val
        return val

    def evaluate(self, s: int, simplex) -> dict:
        """Delta_s on an ordered simplex, by relabeling the standard value."""
        n_dim = len(simplex) - 1
        val = self.value(n_dim, s)
        out = {}
        for (a, b), c in val.items():
            ra = tuple(simplex[i] for i in a)
            rb = tuple(simplex[i] for i in b)
            out[(ra, rb)] = c
        return out

    def check_identity(self, n_dim: int, s: int) -> bool:
        """Re-verify the higher-homotopy identity on the standard simplex."""
        top = tuple(range(n_dim + 1))
        lhs = _tensor_d(self.value(n_dim, s))
        rhs: dict = {}
        if s >= 1 or True:
            for i in range(len(top)):
                if len(top) == 1:
                    break
                face = top[:i] + top[i + 1:]
                sgn = (-1) ** i
                for k, c in self.evaluate(s, face).items():
                    _tensor_add(rhs, k, sgn * c)
        if s >= 1:
            prev = self.value(n_dim, s - 1)
            nsgn = (-1) ** n_dim
            for k, c in prev.items():
                _tensor_add(rhs, k, nsgn * c)
            for k, c in _tensor_T(prev).items():
                _tensor_add(rhs, k, nsgn * ((-1) ** s) * c)
        for k, c in rhs.items():
            _tensor_add(lhs, k, -c)
        return not lhs


_DIAGONAL = DiagonalFamily()


def diagonal_family() -> DiagonalFamily:
    return _DIAGONAL


def diagonal_gelement(K: SimplicialComplex, chain: IntChain, s: int,
                      C: IntegerChainComplex | None = None) -> GElement:
    """Delta_s(chain) as a block-matrix element of G(C(K))."""
    if C is None:
        C = relative_chain_complex(K)
    basis = chain_basis(K)
    index = {d: {t: i for i, t in enumerate(b)} for d, b in basis.items()}
    m = chain.degree + s
    acc: dict = {}
    fam = diagonal_family()
    for simplex, coeff in chain.terms.items():
        for (a, b), c in fam.evaluate(s, simplex).items():
            p = len(a) - 1
            blk = acc.setdefault(p, {})
            ij = (index[p][a], index[len(b) - 1][b])
            blk[ij] = blk.get(ij, 0) + coeff * c
    blocks = {}
    for p, entries in acc.items():
        M = IntMatrix.from_entries(C.rank(p), C.rank(m - p),
                                   [(i, j, v) for (i, j), v in entries.items()])
        if not M.is_zero():
            blocks[p] = M
    return GElement(C, m, blocks)


def symmetric_construction(K: SimplicialComplex, xi: IntChain,
                           s_max: int | None = None) -> SymmetricStructure:
    """The symmetric structure of a cycle: phi_s = Delta_s(xi).

    phi_0 is the cap product with xi; the output always passes is_cycle.
    """
    if not xi.is_cycle():
        raise NotACycle("the fundamental chain is not a cycle")
    C = relative_chain_complex(K)
    n = xi.degree
    if s_max is None:
        s_max = K.dim + 1
    comps = {}
    for s in range(s_max + 1):
        x = diagonal_gelement(K, xi, s, C)
        if not x.is_zero():
            comps[s] = x
    phi = SymmetricStructure(C, n, comps)
    if not phi.is_cycle():
        raise IdentityViolation("symmetric construction is not a cycle")
    return phi


def inclusion_chain_map(K: SimplicialComplex, A: SimplicialComplex,
                        CA: IntegerChainComplex | None = None,
                        CK: IntegerChainComplex | None = None) -> ChainMap:
    """C(A) -> C(K) on lexicographic bases."""
    CA = CA if CA is not None else relative_chain_complex(A)
    CK = CK if CK is not None else relative_chain_complex(K)
    abasis = chain_basis(A)
    kindex = {d: {t: i for i, t in enumerate(b)}
              for d, b in chain_basis(K).items()}
    comps = {}
    for d, bs in abasis.items():
        entries = []
        for j, t in enumerate(bs):
            entries.append((kindex[d][t], j, 1))
        comps[d] = IntMatrix.from_entries(CK.rank(d), CA.rank(d), entries)
    return ChainMap(CA, CK, 0, comps)


def relative_symmetric_construction(K: SimplicialComplex,
                                    A: SimplicialComplex | None,
                                    xi: IntChain,
                                    s_max: int | None = None):
    """Symmetric pair of the relative cycle xi: returns (f, delta_phi, phi).

    f : C(A) -> C(K); the pair element (delta_phi, phi) is a cycle in the
    mapping cone of f-percent: d(delta_phi) = -f_percent(phi), with phi the
    (n-1)-structure of the boundary restriction of xi.
    """
    n = xi.degree
    if s_max is None:
        s_max = K.dim + 1
    if A is None:
        phi = symmetric_construction(K, xi, s_max)
        return None, phi, None
    boundary = xi.boundary()
    if any(t not in A for t in boundary.terms):
        raise NotRelativeCycle("boundary of xi does not lie in A")
    CA = relative_chain_complex(A)
    CK = relative_chain_complex(K)
    f = inclusion_chain_map(K, A, CA, CK)
    delta_comps = {}
    for s in range(s_max + 1):
        x = diagonal_gelement(K, xi, s, CK)
        if not x.is_zero():
            delta_comps[s] = x
    delta_phi = SymmetricStructure(CK, n, delta_comps)
    bchain = IntChain(A, n - 1, dict(boundary.terms))
    phi = -symmetric_construction(A, bchain, s_max)
    # pair cycle condition
    from .structures import family_differential, SYMMETRIC
    d_delta = family_differential(CK, n, delta_phi.comps, SYMMETRIC)
    push = {s: x.push(f, CK) for s, x in phi.comps.items()}
    for s in set(d_delta) | set(push):
        a = d_delta.get(s, GElement.zero(CK, n - 1 + s))
        b = push.get(s, GElement.zero(CK, n - 1 + s))
        if not (a + b).is_zero():
            raise IdentityViolation("pair cycle condition failed")
    return f, delta_phi, phi
