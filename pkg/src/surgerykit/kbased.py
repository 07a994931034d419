"""Complexes graded over a simplicial complex: the lower-star category,
its duality, assembly, local/global Poincare predicates, and the
obstruction-certificate pipeline.

A K-based complex carries one local chain complex per simplex (anchor) of K
plus cross differentials that only increase the anchor (the lower-star
support rule).  The fundamental example is the simplicial chain complex of
the barycentric subdivision X' graded by dual cells: the block at sigma is
the relative complex of (D(sigma), boundary D(sigma)), whose basis consists
of the flags with minimal element exactly sigma.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import SIGN_LEDGER_VERSION
from .chainalg import ChainMap, IntegerChainComplex, mapping_cone
from .constructions import IdentityViolation, diagonal_family, \
    symmetric_construction
from .intmatrix import IntMatrix
from .simplicial import (
    IntChain,
    SimplicialComplex,
    barycentric_subdivision,
    fundamental_cycle,
    subdivision_chain,
)
from .structures import NotACycle, SymmetricStructure
from .surgery import is_poincare


class SupportRuleViolation(IdentityViolation):
    pass


def _anchor_order(K: SimplicialComplex):
    return sorted(K.all_simplices(), key=lambda s: (len(s), s))


class KBasedComplex:
    """Per-anchor local complexes plus anchor-increasing cross terms."""

    def __init__(self, base: SimplicialComplex, locals_: dict, cross: dict,
                 check: bool = True):
        self.base = base
        self.locals = locals_
        # cross[(to_anchor, from_anchor)][r] : C(from)_r -> C(to)_{r-1}
        self.cross = {k: {int(r): M for r, M in v.items() if not M.is_zero()}
                      for k, v in cross.items()}
        self.cross = {k: v for k, v in self.cross.items() if v}
        self.anchors = tuple(a for a in _anchor_order(base))
        self._assembled = None
        self._offsets = None
        if check:
            self.validate()

    def local(self, anchor) -> IntegerChainComplex:
        return self.locals.get(anchor, IntegerChainComplex.zero())

    def validate(self):
        for (to_a, from_a) in self.cross:
            if to_a == from_a or not set(from_a) < set(to_a):
                raise SupportRuleViolation(
                    f"cross component {from_a} -> {to_a} breaks the "
                    "lower-star support rule")
        A, _ = self.assemble_with_offsets()
        A.validate()

    @property
    def support(self):
        los, his = [], []
        for L in self.locals.values():
            if L.ranks:
                lo, hi = L.support
                los.append(lo)
                his.append(hi)
        if not los:
            return (0, -1)
        return (min(los), max(his))

    def assemble_with_offsets(self):
        if self._assembled is not None:
            return self._assembled, self._offsets
        lo, hi = self.support
        offsets = {}
        ranks = {}
        for r in range(lo, hi + 1):
            off = 0
            for a in self.anchors:
                offsets[(a, r)] = off
                off += self.local(a).rank(r)
            if off:
                ranks[r] = off
        diffs = {}
        for r in range(lo, hi + 2):
            if not (ranks.get(r) and ranks.get(r - 1)):
                continue
            M = IntMatrix.zeros(ranks[r - 1], ranks[r])
            for a in self.anchors:
                L = self.local(a)
                d = L.differential(r)
                ro, co = offsets[(a, r - 1)], offsets[(a, r)]
                for i, row in d.rows.items():
                    M.rows.setdefault(ro + i, {}).update(
                        {co + j: v for j, v in row.items()})
            for (to_a, from_a), comps in self.cross.items():
                d = comps.get(r)
                if d is None:
                    continue
                ro, co = offsets[(to_a, r - 1)], offsets[(from_a, r)]
                for i, row in d.rows.items():
                    dst = M.rows.setdefault(ro + i, {})
                    for j, v in row.items():
                        w = dst.get(co + j, 0) + v
                        if w:
                            dst[co + j] = w
                        else:
                            del dst[co + j]
            if not M.is_zero():
                diffs[r] = M
        self._assembled = IntegerChainComplex(ranks, diffs, check=False)
        self._offsets = offsets
        return self._assembled, self._offsets

    def assemble(self) -> IntegerChainComplex:
        return self.assemble_with_offsets()[0]


# ---------------------------------------------------------------------------
# The dissection of the subdivision
# ---------------------------------------------------------------------------


@dataclass
class Dissection:
    """Bookkeeping for Delta(X') graded by dual cells."""

    X: SimplicialComplex
    Xp: SimplicialComplex
    provenance: dict                 # X'-vertex -> X-simplex
    kbased: KBasedComplex
    rel_basis: dict                  # anchor -> degree -> tuple of simplices
    local_index: dict                # X'-simplex -> (anchor, degree, index)

    def anchor_of(self, simplex):
        return self.provenance[simplex[0]]


def dissect(X: SimplicialComplex, subdivision=None) -> Dissection:
    """Grade Delta(X') by the minimal flag element (the dual-cell anchors)."""
    if subdivision is None:
        subdivision = barycentric_subdivision(X)
    Xp, prov = subdivision
    anchors = _anchor_order(X)
    rel_basis: dict = {a: {} for a in anchors}
    for d, ss in Xp.simplices.items():
        for s in ss:
            a = prov[s[0]]
            rel_basis[a].setdefault(d, []).append(s)
    local_index = {}
    locals_: dict = {}
    for a in anchors:
        ranks = {}
        for d, basis in rel_basis[a].items():
            basis.sort()
            ranks[d] = len(basis)
            for i, s in enumerate(basis):
                local_index[s] = (a, d, i)
        locals_[a] = IntegerChainComplex(ranks, {}, check=False)
    # differentials: face of a flag keeps the anchor unless the minimal
    # element is dropped, in which case the anchor strictly increases
    local_diffs: dict = {a: {} for a in anchors}
    cross: dict = {}
    for d, ss in Xp.simplices.items():
        if d == 0:
            continue
        for s in ss:
            a_from, _, j = local_index[s]
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                a_to, dd, k = local_index[face]
                sgn = (-1) ** i
                if a_to == a_from:
                    mat = local_diffs[a_from].setdefault(
                        d, IntMatrix.zeros(locals_[a_from].rank(d - 1),
                                           locals_[a_from].rank(d)))
                    mat.rows.setdefault(k, {})[j] = sgn
                else:
                    comp = cross.setdefault((a_to, a_from), {})
                    mat = comp.setdefault(
                        d, IntMatrix.zeros(locals_[a_to].rank(d - 1),
                                           locals_[a_from].rank(d)))
                    mat.rows.setdefault(k, {})[j] = sgn
    for a in anchors:
        locals_[a] = IntegerChainComplex(dict(locals_[a].ranks),
                                         local_diffs[a], check=False)
    kb = KBasedComplex(X, locals_, cross, check=False)
    diss = Dissection(X=X, Xp=Xp, provenance=prov, kbased=kb,
                      rel_basis={a: {d: tuple(b) for d, b in bs.items()}
                                 for a, bs in rel_basis.items()},
                      local_index=local_index)
    return diss


# ---------------------------------------------------------------------------
# The lower-star duality
# ---------------------------------------------------------------------------


def _upset(base: SimplicialComplex, anchor):
    aset = set(anchor)
    return [t for t in _anchor_order(base) if aset <= set(t)]


def upset_complex(C: KBasedComplex, anchor):
    """The assembled complex over the anchors >= anchor (with its basis
    bookkeeping: degree -> list of (anchor, index))."""
    ups = _upset(C.base, anchor)
    upset_set = set(ups)
    lo, hi = C.support
    basis = {}
    ranks = {}
    for r in range(lo, hi + 1):
        bb = []
        for a in ups:
            for i in range(C.local(a).rank(r)):
                bb.append((a, i))
        if bb:
            basis[r] = bb
            ranks[r] = len(bb)
    index = {r: {c: k for k, c in enumerate(b)} for r, b in basis.items()}
    diffs = {}
    for r in range(lo, hi + 2):
        if not (ranks.get(r) and ranks.get(r - 1)):
            continue
        entries = []
        for a in ups:
            d = C.local(a).differential(r)
            for i, row in d.rows.items():
                for j, v in row.items():
                    entries.append((index[r - 1][(a, i)],
                                    index[r][(a, j)], v))
        for (to_a, from_a), comps in C.cross.items():
            if to_a not in upset_set or from_a not in upset_set:
                continue
            d = comps.get(r)
            if d is None:
                continue
            for i, row in d.rows.items():
                for j, v in row.items():
                    entries.append((index[r - 1][(to_a, i)],
                                    index[r][(from_a, j)], v))
        M = IntMatrix.from_entries(ranks[r - 1], ranks[r], entries)
        if not M.is_zero():
            diffs[r] = M
    return IntegerChainComplex(ranks, diffs, check=False), basis, index


def k_dual(C: KBasedComplex, n: int) -> KBasedComplex:
    """The n-shifted lower-star dual: the block at an anchor is the shifted
    dual of the assembled complex over its up-set; the cross terms are the
    coboundary restriction maps."""
    base = C.base
    ups_data = {a: upset_complex(C, a) for a in _anchor_order(base)}
    locals_: dict = {}
    dual_basis: dict = {}
    for a, (U, basis, index) in ups_data.items():
        # degree r holds the dual of U at degree n - r - |a|
        asz = len(a) - 1
        ranks = {}
        for q, b in basis.items():
            r = n - q - asz
            ranks[r] = len(b)
            dual_basis[(a, r)] = b
        diffs = {}
        for r in ranks:
            if r - 1 not in ranks:
                continue
            # (b)-part: (-1)^r (transpose of U's differential into degree
            # n-r-|a|+1)
            q = n - r - asz
            D = U.differential(q + 1).transpose()
            if r % 2:
                D = -D
            if not D.is_zero():
                diffs[r] = D
        locals_[a] = IntegerChainComplex(ranks, diffs, check=False)
    # cross terms: anchor a -> coface t = a + {v}: restriction of the up-set
    # with the simplicial coboundary sign
    cross: dict = {}
    for a in _anchor_order(base):
        aset = set(a)
        U_a, basis_a, index_a = ups_data[a]
        asz = len(a) - 1
        for t in _anchor_order(base):
            if len(t) != len(a) + 1 or not aset < set(t):
                continue
            v = next(iter(set(t) - aset))
            sign = (-1) ** t.index(v)
            U_t, basis_t, index_t = ups_data[t]
            comp = {}
            for q, bb in basis_a.items():
                r = n - q - asz           # degree in the a-block
                # target degree is r - 1; the t-block at degree r - 1 holds
                # duals of degree n - (r-1) - |t| = q
                tgt = index_t.get(q)
                if tgt is None:
                    continue
                entries = []
                for k, c in enumerate(bb):
                    kk = tgt.get(c)
                    if kk is not None:
                        entries.append((kk, k, sign))
                M = IntMatrix.from_entries(len(basis_t[q]), len(bb), entries)
                if not M.is_zero():
                    comp[r] = M
            if comp:
                cross[(t, a)] = comp
    return KBasedComplex(base, locals_, cross, check=False)


def double_dual_projection(C: KBasedComplex, n: int,
                           TT: KBasedComplex | None = None) -> ChainMap:
    """The collapse T_*(T_* C) -> C onto the (anchor, anchor) coordinates,
    assembled; its mapping cone is the double-duality comparison."""
    if TT is None:
        TT = k_dual(k_dual(C, n), n)
    A, offs_tt = TT.assemble_with_offsets()
    B, offs_c = C.assemble_with_offsets()
    # block at anchor a of TT in degree r: duals of the (T_*C)-up-set at
    # degree n - r - |a|; its basis entries are pairs (t, i) with t >= a and
    # i indexing the t-block of T_*C in that degree, whose basis entries are
    # in turn pairs (tt, ii) with tt >= t.  The collapse keeps t == a and
    # tt == a.
    T1 = k_dual(C, n)
    ups1 = {a: upset_complex(C, a) for a in C.anchors}
    ups2 = {a: upset_complex(T1, a) for a in C.anchors}
    comps = {}
    lo, hi = A.support
    for r in range(lo, hi + 1):
        entries = []
        for a in TT.anchors:
            asz = len(a) - 1
            q = n - r - asz          # degree in T1's up-set over a
            _U2, basis2, _index2 = ups2[a]
            bb = basis2.get(q)
            if bb is None:
                continue
            off = offs_tt[(a, r)]
            for k, (t, i) in enumerate(bb):
                if t != a:
                    continue
                # i indexes the a-block of T1 at degree q; that block's
                # basis is the up-set of C over a at degree n - q - |a| = r
                _U1, basis1, _index1 = ups1[a]
                (tt, ii) = basis1[r][i]
                if tt != a:
                    continue
                entries.append((offs_c[(a, r)] + ii, off + k, 1))
        M = IntMatrix.from_entries(B.rank(r), A.rank(r), entries)
        if not M.is_zero():
            comps[r] = M
    return ChainMap(A, B, 0, comps, check=True)
