"""Bounded chain complexes of finitely generated free Z-modules.

Conventions (the package-wide sign ledger; every other module imports these
rather than re-deriving signs):

* differential ``d_r : C_r -> C_{r-1}`` is a matrix of shape
  ``rank(r-1) x rank(r)``;
* suspension ``(S C)_r = C_{r-1}`` keeps the differentials unchanged;
* the n-dual ``C^{n-*}`` has ``(C^{n-*})_r = (C_{n-r})^*`` with differential
  ``(-1)^r d^T``; applying it twice with the same n gives back C on the nose;
* the mapping cone of a degree-0 chain map ``f : C -> D`` is
  ``cone(f)_r = D_r (+) C_{r-1}`` with differential ``[[d_D, f], [0, -d_C]]``;
* a degree-k chain map satisfies ``d f = (-1)^k f d``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .intmatrix import (
    IntMatrix,
    invariant_factors,
    smith_normal_form,
    solve,
)


class ChainAlgebraError(Exception):
    """Base error for structural violations."""


class DegreeMismatch(ChainAlgebraError):
    pass


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated abelian group: free rank plus torsion chain."""

    free_rank: int
    torsion: tuple

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


TRIVIAL_GROUP = AbelianGroup(0, ())


class HomologySummary(dict):
    """degree -> AbelianGroup, trivial degrees omitted."""

    def group(self, n: int) -> AbelianGroup:
        return self.get(n, TRIVIAL_GROUP)

    def is_trivial(self) -> bool:
        return all(g.is_trivial() for g in self.values())

    def to_json(self):
        return {str(n): {"free": g.free_rank, "torsion": list(g.torsion)}
                for n, g in sorted(self.items())}


class IntegerChainComplex:
    """Bounded complex of f.g. free Z-modules given by integer matrices."""

    def __init__(self, ranks: dict, differentials: dict, check: bool = True):
        self.ranks = {int(r): int(k) for r, k in ranks.items() if k}
        self.diffs = {}
        for r, M in differentials.items():
            r = int(r)
            if M is not None and not M.is_zero():
                self.diffs[r] = M
        if check:
            self.validate()

    # -- structure -----------------------------------------------------------

    def rank(self, r: int) -> int:
        return self.ranks.get(r, 0)

    @property
    def support(self):
        if not self.ranks:
            return (0, -1)
        return (min(self.ranks), max(self.ranks))

    def degrees(self):
        lo, hi = self.support
        return range(lo, hi + 1)

    def total_rank(self) -> int:
        return sum(self.ranks.values())

    def differential(self, r: int) -> IntMatrix:
        M = self.diffs.get(r)
        if M is None:
            return IntMatrix.zeros(self.rank(r - 1), self.rank(r))
        return M

    def validate(self):
        for r, M in self.diffs.items():
            if M.shape != (self.rank(r - 1), self.rank(r)):
                raise ChainAlgebraError(
                    f"differential at degree {r} has shape {M.shape}, "
                    f"expected {(self.rank(r - 1), self.rank(r))}")
        for r in list(self.diffs):
            if r + 1 in self.diffs:
                if not (self.differential(r) @ self.differential(r + 1)).is_zero():
                    raise ChainAlgebraError(f"d^2 != 0 at degree {r + 1}")

    def __eq__(self, other):
        if not isinstance(other, IntegerChainComplex):
            return NotImplemented
        return self.ranks == other.ranks and \
            {r: M.rows for r, M in self.diffs.items()} == \
            {r: M.rows for r, M in other.diffs.items()}

    def __repr__(self):
        lo, hi = self.support
        return "IntegerChainComplex(" + ", ".join(
            f"{r}:{self.rank(r)}" for r in range(lo, hi + 1)) + ")"

    # -- constructions -------------------------------------------------------

    @classmethod
    def zero(cls) -> "IntegerChainComplex":
        return cls({}, {})

    @classmethod
    def free_module(cls, rank: int, degree: int = 0) -> "IntegerChainComplex":
        return cls({degree: rank}, {})

    def shift(self, k: int) -> "IntegerChainComplex":
        """Suspension: (shift(k))_r = C_{r-k}; differentials unchanged."""
        return IntegerChainComplex(
            {r + k: n for r, n in self.ranks.items()},
            {r + k: M for r, M in self.diffs.items()}, check=False)

    def dual(self, n: int) -> "IntegerChainComplex":
        """C^{n-*}: degree r holds (C_{n-r})^*, differential (-1)^r d^T."""
        ranks = {n - r: k for r, k in self.ranks.items()}
        diffs = {}
        for r, k in ranks.items():
            M = self.diffs.get(n - r + 1)
            if M is not None:
                D = M.transpose()
                if r % 2:
                    D = -D
                diffs[r] = D
        return IntegerChainComplex(ranks, diffs, check=False)

    def direct_sum(self, other: "IntegerChainComplex") -> "IntegerChainComplex":
        ranks = dict(self.ranks)
        for r, k in other.ranks.items():
            ranks[r] = ranks.get(r, 0) + k
        diffs = {}
        for r in set(self.diffs) | set(other.diffs):
            diffs[r] = IntMatrix.block([
                [self.differential(r), None],
                [None, other.differential(r)]])
        return IntegerChainComplex(ranks, diffs, check=False)

    # -- homology -------------------------------------------------------------

    def homology_at(self, n: int) -> AbelianGroup:
        dn = self.differential(n)
        dn1 = self.differential(n + 1)
        r_in = smith_normal_form(dn1)
        r_out = smith_normal_form(dn).rank if not dn.is_zero() else 0
        free = self.rank(n) - r_out - r_in.rank
        torsion = tuple(t for t in r_in.diag if t > 1)
        return AbelianGroup(free, torsion)

    def homology(self) -> HomologySummary:
        out = HomologySummary()
        if not self.ranks:
            return out
        lo, hi = self.support
        for n in range(lo, hi + 1):
            g = self.homology_at(n)
            if not g.is_trivial():
                out[n] = g
        return out

    def is_contractible(self) -> bool:
        return self.homology().is_trivial()

    def euler_characteristic(self) -> int:
        return sum((-1) ** r * k for r, k in self.ranks.items())

    # -- serialization ---------------------------------------------------------

    def to_json(self):
        lo, hi = self.support
        return {
            "support": [lo, hi],
            "ranks": {str(r): k for r, k in sorted(self.ranks.items())},
            "differentials": {str(r): M.to_rows()
                              for r, M in sorted(self.diffs.items())},
        }

    @classmethod
    def from_json(cls, doc) -> "IntegerChainComplex":
        ranks = {int(r): k for r, k in doc.get("ranks", {}).items()}
        diffs = {}
        for r, rows in doc.get("differentials", {}).items():
            r = int(r)
            nr = ranks.get(r - 1, 0)
            nc = ranks.get(r, 0)
            diffs[r] = IntMatrix.from_rows(rows, nr, nc)
        return cls(ranks, diffs)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class GradedMap:
    """Degree-k family of matrices comps[r] : src_r -> dst_{r+k}.

    No chain compatibility is assumed; ChainMap adds that.
    """

    def __init__(self, src, dst, degree, comps: dict):
        self.src = src
        self.dst = dst
        self.degree = degree
        self.comps = {int(r): M for r, M in comps.items() if not M.is_zero()}
        for r, M in self.comps.items():
            want = (dst.rank(r + degree), src.rank(r))
            if M.shape != want:
                raise ChainAlgebraError(
                    f"component at {r} has shape {M.shape}, expected {want}")

    def component(self, r: int) -> IntMatrix:
        M = self.comps.get(r)
        if M is None:
            return IntMatrix.zeros(self.dst.rank(r + self.degree), self.src.rank(r))
        return M

    def is_zero(self) -> bool:
        return not self.comps

    def __add__(self, other):
        assert self.degree == other.degree
        comps = {}
        for r in set(self.comps) | set(other.comps):
            comps[r] = self.component(r) + other.component(r)
        return type(self)._raw(self.src, self.dst, self.degree, comps)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        return type(self)._raw(self.src, self.dst, self.degree,
                               {r: M.scale(c) for r, M in self.comps.items()})

    @classmethod
    def _raw(cls, src, dst, degree, comps):
        out = GradedMap.__new__(GradedMap)
        out.src, out.dst, out.degree = src, dst, degree
        out.comps = {r: M for r, M in comps.items() if not M.is_zero()}
        return out

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self after other."""
        comps = {}
        for r, M in other.comps.items():
            N = self.comps.get(r + other.degree)
            if N is None:
                continue
            P = N @ M
            if not P.is_zero():
                comps[r] = P
        return GradedMap._raw(other.src, self.dst,
                              self.degree + other.degree, comps)

    def __eq__(self, other):
        if not isinstance(other, GradedMap):
            return NotImplemented
        if self.degree != other.degree:
            return False
        return (self - other).is_zero()


class ChainMap(GradedMap):
    """Chain map of degree k: d f = (-1)^k f d."""

    def __init__(self, src, dst, degree, comps, check: bool = True):
        super().__init__(src, dst, degree, comps)
        if check:
            self.validate()

    def validate(self):
        k = self.degree
        lo, hi = self.src.support
        for r in range(lo, hi + 1):
            left = self.dst.differential(r + k) @ self.component(r)
            right = self.component(r - 1) @ self.src.differential(r)
            if k % 2:
                right = -right
            if left != right:
                raise ChainAlgebraError(f"not a chain map at degree {r}")

    @classmethod
    def identity(cls, C) -> "ChainMap":
        return cls(C, C, 0,
                   {r: IntMatrix.identity(k) for r, k in C.ranks.items()},
                   check=False)

    @classmethod
    def zero(cls, src, dst, degree=0) -> "ChainMap":
        return cls(src, dst, degree, {}, check=False)

    def dual(self, n: int) -> "ChainMap":
        """For degree-0 f: C -> D, the dual D^{n-*} -> C^{n-*}."""
        if self.degree != 0:
            raise DegreeMismatch("dual only for degree-0 maps")
        comps = {}
        for r, M in self.comps.items():
            comps[n - r] = M.transpose()
        return ChainMap(self.dst.dual(n), self.src.dual(n), 0, comps,
                        check=False)


def double_dual_identification(C: IntegerChainComplex, n: int) -> ChainMap:
    """Canonical isomorphism C.dual(n).dual(n) -> C.

    The double dual has differential (-1)^{n+1} d, so the identification is
    the diagonal sign (-1)^{r(n+1)} in degree r.
    """
    DD = C.dual(n).dual(n)
    comps = {}
    for r, k in C.ranks.items():
        M = IntMatrix.identity(k)
        if (r * (n + 1)) % 2:
            M = -M
        comps[r] = M
    return ChainMap(DD, C, 0, comps)


def mapping_cone(f: ChainMap) -> IntegerChainComplex:
    """cone(f)_r = D_r (+) C_{r-1}, d = [[d_D, f], [0, -d_C]]."""
    if f.degree != 0:
        raise DegreeMismatch("mapping cone needs a degree-0 chain map")
    C, D = f.src, f.dst
    ranks = {}
    for r, k in D.ranks.items():
        ranks[r] = ranks.get(r, 0) + k
    for r, k in C.ranks.items():
        ranks[r + 1] = ranks.get(r + 1, 0) + k
    diffs = {}
    for r in set(ranks) | {r + 1 for r in ranks}:
        blocks = [[D.differential(r), f.component(r - 1)],
                  [None, -C.differential(r - 1)]]
        M = IntMatrix.block(blocks)
        if not M.is_zero():
            diffs[r] = M
    return IntegerChainComplex({r: k for r, k in ranks.items() if k},
                               diffs, check=False)


def cone_inclusion(f: ChainMap, E: IntegerChainComplex) -> ChainMap:
    """The canonical inclusion D -> cone(f)."""
    D = f.dst
    C = f.src
    comps = {}
    for r, k in D.ranks.items():
        M = IntMatrix.zeros(E.rank(r), k)
        for i in range(k):
            M.rows.setdefault(i, {})[i] = 1
        comps[r] = M
    return ChainMap(D, E, 0, comps, check=False)


def cone_null_homotopy(f: ChainMap, E: IntegerChainComplex) -> GradedMap:
    """H : C_* -> E_{*+1} with dH + Hd = incl . f  (degree +1)."""
    C, D = f.src, f.dst
    comps = {}
    for r, k in C.ranks.items():
        M = IntMatrix.zeros(E.rank(r + 1), k)
        off = D.rank(r + 1)
        for i in range(k):
            M.rows.setdefault(off + i, {})[i] = 1
        comps[r] = M
    return GradedMap(C, E, 1, comps)


def is_equivalence(f: ChainMap) -> bool:
    if f.degree != 0:
        raise DegreeMismatch("equivalence test needs a degree-0 chain map")
    return mapping_cone(f).is_contractible()


def contraction(C: IntegerChainComplex) -> GradedMap:
    """Chain contraction G (degree +1) of a contractible complex:
    dG + Gd = 1.  Raises if C has nonzero homology.
    """
    lo, hi = C.support
    P = {}  # P_r : ker d_r -> C_{r+1} with d_{r+1} P_r = incl
    kernels = {}
    for r in range(lo, hi + 1):
        dn = C.differential(r)
        if C.rank(r) == 0:
            kernels[r] = IntMatrix.zeros(0, 0)
            continue
        if dn.is_zero():
            kernels[r] = IntMatrix.identity(C.rank(r))
        else:
            from .intmatrix import kernel_basis
            kernels[r] = kernel_basis(dn)
    for r in range(lo, hi + 1):
        K = kernels[r]
        if K.ncols == 0:
            P[r] = IntMatrix.zeros(C.rank(r + 1), 0)
            continue
        X = solve(C.differential(r + 1), K)
        if X is None:
            raise ChainAlgebraError("complex is not contractible")
        P[r] = X
    # G_r = P_r . coords_r(1 - P_{r-1} . coords_{r-1}(d_r)):
    # project onto the kernel along the chosen splitting, then lift.
    comps = {}

    def kernel_coords(r, M):
        K = kernels[r]
        if K.ncols == 0:
            return IntMatrix.zeros(0, M.ncols)
        X = solve(K, M)
        if X is None:
            raise ChainAlgebraError("vector not in kernel lattice")
        return X
    for r in range(lo, hi + 1):
        n = C.rank(r)
        if n == 0:
            continue
        one = IntMatrix.identity(n)
        if r - 1 >= lo and C.rank(r - 1) and kernels[r - 1].ncols:
            img = kernel_coords(r - 1, C.differential(r))
            proj = one - P[r - 1] @ img
        else:
            proj = one
        G = P[r] @ kernel_coords(r, proj) if kernels[r].ncols else \
            IntMatrix.zeros(C.rank(r + 1), n)
        if not G.is_zero():
            comps[r] = G
    return GradedMap(C, C, 1, comps)


def homotopy_inverse(f: ChainMap):
    """(g, alpha, delta) for a chain equivalence f : C -> D.

    g : D -> C chain map; 1_D - f g = d alpha + alpha d;
    g f - 1_C = d delta + delta d.
    """
    E = mapping_cone(f)
    L = contraction(E)  # d L + L d = 1
    C, D = f.src, f.dst
    g_comps = {}
    a_comps = {}
    s_comps = {}
    for r in D.ranks:
        Lr = L.component(r)  # E_r -> E_{r+1}
        # blocks: E_r = D_r (+) C_{r-1}; E_{r+1} = D_{r+1} (+) C_r
        dr, cr = D.rank(r), C.rank(r - 1)
        gamma = IntMatrix.zeros(C.rank(r), dr)
        alpha = IntMatrix.zeros(D.rank(r + 1), dr)
        for i, row in Lr.rows.items():
            for j, v in row.items():
                if j < dr:
                    if i < D.rank(r + 1):
                        alpha.rows.setdefault(i, {})[j] = v
                    else:
                        gamma.rows.setdefault(i - D.rank(r + 1), {})[j] = v
        if not gamma.is_zero():
            g_comps[r] = gamma
        if not alpha.is_zero():
            a_comps[r] = alpha
    for r in C.ranks:
        Lr1 = L.component(r + 1)
        dr1, cr = D.rank(r + 1), C.rank(r)
        delta = IntMatrix.zeros(C.rank(r + 1), cr)
        for i, row in Lr1.rows.items():
            if i < D.rank(r + 2):
                continue
            for j, v in row.items():
                if j >= dr1:
                    delta.rows.setdefault(i - D.rank(r + 2), {})[j - dr1] = v
        if not delta.is_zero():
            s_comps[r] = delta
    g = ChainMap(D, C, 0, g_comps)
    alpha = GradedMap(D, D, 1, a_comps)
    delta = GradedMap(C, C, 1, s_comps)
    return g, alpha, delta


def standard_model(C: IntegerChainComplex):
    """(M, f) with M the minimal complex realizing the homology of C and
    f : M -> C a chain equivalence (free generators map to representative
    cycles, torsion generators carry explicit bounding chains).

    Bounded free complexes over the integers are classified up to chain
    equivalence by their homology, so models of equal homology coincide.
    """
    from .intmatrix import kernel_basis, smith_normal_form_with_transforms
    ranks: dict = {}
    diffs: dict = {}
    comps: dict = {}
    pieces = []  # (degree, kind, data)
    lo, hi = C.support if C.ranks else (0, -1)
    for r in range(lo, hi + 1):
        dn = C.differential(r)
        if C.rank(r) == 0:
            continue
        Z = kernel_basis(dn) if not dn.is_zero() \
            else IntMatrix.identity(C.rank(r))
        if Z.ncols == 0:
            continue
        B = C.differential(r + 1)
        if B.is_zero():
            coords = IntMatrix.zeros(Z.ncols, 0)
        else:
            coords = solve(Z, B)
            if coords is None:
                raise ChainAlgebraError("boundaries escape the cycle lattice")
        res = smith_normal_form_with_transforms(coords) if coords.ncols \
            else None
        k = Z.ncols
        if res is None:
            rank_d = 0
            diag = []
            Uinv = IntMatrix.identity(k)
        else:
            rank_d = res.rank
            diag = res.diag
            Uinv = solve(res.U, IntMatrix.identity(k))
        for i in range(k):
            x = Z @ Uinv.col(i)
            if i < rank_d:
                t = diag[i]
                if t == 1:
                    continue
                y = solve(C.differential(r + 1), x.scale(t))
                if y is None:
                    raise ChainAlgebraError("missing torsion bounding chain")
                pieces.append((r, t, x, y))
            else:
                pieces.append((r, 0, x, None))
    # lay out the model
    counts: dict = {}
    layout = []
    for (r, t, x, y) in pieces:
        i = counts.get(r, 0)
        counts[r] = i + 1
        layout.append((r, i, t, x, y))
        ranks[r] = ranks.get(r, 0) + 1
        if t:
            ranks[r + 1] = ranks.get(r + 1, 0) + 1
    # second pass: torsion tops
    tops: dict = {}
    for (r, i, t, x, y) in layout:
        if t:
            j = counts.get(r + 1, 0)
            counts[r + 1] = j + 1
            tops[(r, i)] = j
    dmat: dict = {}
    for (r, i, t, x, y) in layout:
        if t:
            j = tops[(r, i)]
            dmat.setdefault(r + 1, {}).setdefault(i, {})[j] = t
    diffs = {}
    for r, rows in dmat.items():
        M = IntMatrix(ranks.get(r - 1, 0), ranks.get(r, 0))
        for i, row in rows.items():
            M.rows[i] = dict(row)
        diffs[r] = M
    M = IntegerChainComplex(ranks, diffs, check=False)
    fcomps: dict = {}
    for (r, i, t, x, y) in layout:
        Mr = fcomps.setdefault(r, IntMatrix.zeros(C.rank(r), ranks.get(r, 0)))
        for row, rr in x.rows.items():
            v = rr.get(0)
            if v:
                Mr.rows.setdefault(row, {})[i] = v
        if t:
            j = tops[(r, i)]
            Mr1 = fcomps.setdefault(
                r + 1, IntMatrix.zeros(C.rank(r + 1), ranks.get(r + 1, 0)))
            for row, rr in y.rows.items():
                v = rr.get(0)
                if v:
                    Mr1.rows.setdefault(row, {})[j] = v
    f = ChainMap(M, C, 0, {r: Mm for r, Mm in fcomps.items()
                           if not Mm.is_zero()})
    return M, f


def equivalent_by_classification(A: IntegerChainComplex,
                                 B: IntegerChainComplex):
    """A verified zigzag equivalence A <- M -> B through the standard
    model, or None when the homologies differ."""
    if A.homology() != B.homology():
        return None
    MA, fA = standard_model(A)
    MB, fB = standard_model(B)
    if MA != MB:
        return None
    if not (is_equivalence(fA) and is_equivalence(fB)):
        return None
    return MA, fA, fB


def random_complex(rng, max_len=4, max_rank=3, twists=2):
    """Random bounded complex built from elementary pieces conjugated by
    random unimodular basis changes; exercised heavily by property tests."""
    lo = rng.randint(-2, 1)
    pieces = []
    n_pieces = rng.randint(1, 3)
    for _ in range(n_pieces):
        k = rng.randint(lo, lo + max_len - 1)
        if rng.random() < 0.4:
            pieces.append(IntegerChainComplex.free_module(
                rng.randint(1, max_rank), k))
        else:
            a = rng.choice([1, 2, 3, -2, 5])
            pieces.append(IntegerChainComplex(
                {k: 1, k + 1: 1}, {k + 1: IntMatrix.from_rows([[a]])}))
    C = pieces[0]
    for p in pieces[1:]:
        C = C.direct_sum(p)
    return unimodular_twist(rng, C, twists)


def unimodular_twist(rng, C: IntegerChainComplex, steps=2):
    """Conjugate the basis in each degree by random elementary matrices."""
    lo, hi = C.support
    base = {}
    inv = {}
    for r in range(lo, hi + 1):
        n = C.rank(r)
        U = IntMatrix.identity(n)
        Uinv = IntMatrix.identity(n)
        for _ in range(steps):
            if n < 2:
                break
            i, j = rng.sample(range(n), 2)
            c = rng.randint(-2, 2)
            E = IntMatrix.identity(n)
            E.rows.setdefault(i, {})[j] = c
            Einv = IntMatrix.identity(n)
            Einv.rows.setdefault(i, {})[j] = -c
            if c == 0:
                continue
            U = E @ U
            Uinv = Uinv @ Einv
        base[r] = U
        inv[r] = Uinv
    diffs = {}
    for r in range(lo, hi + 2):
        M = C.differential(r)
        if M.is_zero():
            continue
        A = base.get(r - 1, IntMatrix.identity(C.rank(r - 1)))
        B = inv.get(r, IntMatrix.identity(C.rank(r)))
        diffs[r] = A @ M @ B
    return IntegerChainComplex(dict(C.ranks), diffs, check=False)
