"""Symmetric, quadratic, and hyperquadratic structures on chain complexes.

The whole calculus runs over the tensor square G(C) = C (x) C of a bounded
free complex, identified once and for all with block matrix families:

    an element of G(C)_m is a family  x_p : (C_{m-p})^* -> C_p  of integer
    matrices, one per degree p.

This file is the package's sign ledger.  Everything downstream imports these
identities instead of re-deriving signs:

* differential     [d x]_p = d_{p+1} x_{p+1} + (-1)^p x_p d^T_{m-p}
* involution       [T x]_p = (-1)^{p(m-p)} (x_{m-p})^T
* symmetric / hyperquadratic differential on component families of degree n:
      (d phi)_s = d(phi_s) - (-1)^n (phi_{s-1} + (-1)^s T phi_{s-1})
* quadratic differential:
      (d psi)_t = d(psi_t) + (-1)^n (psi_{t+1} + (-1)^{t+1} T psi_{t+1})
* suspension relabel R : G(C)_m -> G(SC)_{m+2} multiplies the degree-p block
  by (-1)^p and shifts it to block p+1; R conjugates (d, T) to (-d, -T), and
  component families suspend by (S phi)_k = R(phi_{k-1}).

A degree-n 0-component cycle is the same thing as a chain map
C^{n-*} -> C (with the dual differential (-1)^r d^T from chainalg).

``is_cycle`` is the single source of truth: every operation that produces a
structure is tested against it rather than against external conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chainalg import (
    ChainMap,
    GradedMap,
    IntegerChainComplex,
    AbelianGroup,
    HomologySummary,
)
from .intmatrix import (
    IntMatrix,
    kernel_basis,
    lattice_equal,
    smith_normal_form,
    solve,
)


class StructureError(Exception):
    pass


class NotACycle(StructureError):
    pass


class NormalEquationViolated(StructureError):
    pass


# ---------------------------------------------------------------------------
# Elements of the tensor square
# ---------------------------------------------------------------------------


class GElement:
    """Element of (C (x) C)_m as a block family p -> IntMatrix."""

    __slots__ = ("C", "m", "blocks")

    def __init__(self, C: IntegerChainComplex, m: int, blocks: dict | None = None):
        self.C = C
        self.m = m
        self.blocks = {}
        if blocks:
            for p, M in blocks.items():
                if M.is_zero():
                    continue
                want = (C.rank(p), C.rank(m - p))
                if M.shape != want:
                    raise StructureError(
                        f"block {p} of G-degree {m}: shape {M.shape}, "
                        f"expected {want}")
                self.blocks[p] = M

    @classmethod
    def zero(cls, C, m) -> "GElement":
        return cls(C, m)

    def block(self, p: int) -> IntMatrix:
        M = self.blocks.get(p)
        if M is None:
            return IntMatrix.zeros(self.C.rank(p), self.C.rank(self.m - p))
        return M

    def is_zero(self) -> bool:
        return not self.blocks

    def __add__(self, other: "GElement") -> "GElement":
        assert self.m == other.m
        out = {}
        for p in set(self.blocks) | set(other.blocks):
            out[p] = self.block(p) + other.block(p)
        return GElement(self.C, self.m, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c: int) -> "GElement":
        return GElement(self.C, self.m,
                        {p: M.scale(c) for p, M in self.blocks.items()})

    def __eq__(self, other):
        if not isinstance(other, GElement):
            return NotImplemented
        return self.m == other.m and (self - other).is_zero()

    def dG(self) -> "GElement":
        """[d x]_p = d_{p+1} x_{p+1} + (-1)^p x_p d^T_{m-p}."""
        C, m = self.C, self.m
        out: dict = {}
        for p, M in self.blocks.items():
            A = C.differential(p) @ M
            if not A.is_zero():
                out[p - 1] = out.get(p - 1, IntMatrix.zeros(
                    C.rank(p - 1), C.rank(m - p))) + A
            B = M @ C.differential(m - p).transpose()
            if p % 2:
                B = -B
            if not B.is_zero():
                out[p] = out.get(p, IntMatrix.zeros(
                    C.rank(p), C.rank(m - p - 1))) + B
        return GElement(C, m - 1, out)

    def T(self) -> "GElement":
        """[T x]_p = (-1)^{p(m-p)} (x_{m-p})^T."""
        out = {}
        for p, M in self.blocks.items():
            q = self.m - p
            N = M.transpose()
            if (p * q) % 2:
                N = -N
            out[q] = N
        return GElement(self.C, self.m, out)

    def push(self, f, target: IntegerChainComplex) -> "GElement":
        """Conjugation f x f^T for a degree-0 map f : C -> target."""
        out = {}
        for p, M in self.blocks.items():
            N = f.component(p) @ M @ f.component(self.m - p).transpose()
            if not N.is_zero():
                out[p] = N
        return GElement(target, self.m, out)

    def suspend(self, CS: IntegerChainComplex) -> "GElement":
        """R : block p gets sign (-1)^p and moves to block p+1 over SC."""
        out = {}
        for p, M in self.blocks.items():
            out[p + 1] = M if p % 2 == 0 else -M
        return GElement(CS, self.m + 2, out)

    def desuspend(self, CD: IntegerChainComplex) -> "GElement":
        out = {}
        for p, M in self.blocks.items():
            out[p - 1] = M if (p - 1) % 2 == 0 else -M
        return GElement(CD, self.m - 2, out)

    def as_chain_map(self) -> ChainMap:
        """A 0-cycle of degree m is a chain map C^{m-*} -> C."""
        dual = self.C.dual(self.m)
        return ChainMap(dual, self.C, 0, dict(self.blocks), check=True)


def g_from_chain_map(f: ChainMap, C: IntegerChainComplex, m: int) -> GElement:
    """Inverse of as_chain_map for f : C^{m-*} -> C."""
    return GElement(C, m, dict(f.comps))


# ---------------------------------------------------------------------------
# Component families and their differentials
# ---------------------------------------------------------------------------

SYMMETRIC = "symmetric"
QUADRATIC = "quadratic"
HYPERQUADRATIC = "hyperquadratic"


def family_differential(C, n, comps: dict, flavor: str) -> dict:
    """Differential of a component family of degree n; returns a family of
    degree n-1 (dict s -> GElement)."""
    out: dict = {}

    def add(s, x):
        if x.is_zero():
            return
        cur = out.get(s)
        out[s] = x if cur is None else cur + x

    if flavor == QUADRATIC:
        for t, x in comps.items():
            add(t, x.dG())
            # (d psi)_{t-1} += (-1)^n (psi_t + (-1)^t T psi_t)
            if t >= 1:
                z = x + (x.T().scale(-1) if t % 2 else x.T())
                if n % 2:
                    z = -z
                add(t - 1, z)
    else:
        for s, x in comps.items():
            add(s, x.dG())
            # contributes to (d phi)_{s+1}: -(-1)^n (phi_s + (-1)^{s+1} T phi_s)
            z = x + (x.T().scale(-1) if (s + 1) % 2 else x.T())
            if n % 2 == 0:
                z = -z
            add(s + 1, z)
    return {s: x for s, x in out.items() if not x.is_zero()}


def family_is_cycle(C, n, comps: dict, flavor: str) -> bool:
    return not family_differential(C, n, comps, flavor)


# ---------------------------------------------------------------------------
# Structure classes
# ---------------------------------------------------------------------------


class _Structure:
    flavor: str

    def __init__(self, C: IntegerChainComplex, n: int, comps: dict):
        self.C = C
        self.n = int(n)
        self.comps = {}
        for s, x in comps.items():
            if isinstance(x, IntMatrix):
                raise StructureError("components must be GElements")
            if not x.is_zero():
                self._check_degree(s, x)
                self.comps[int(s)] = x

    def _check_degree(self, s, x):
        want = self.n + s if self.flavor != QUADRATIC else self.n - s
        if x.m != want:
            raise StructureError(
                f"component {s} has G-degree {x.m}, expected {want}")
        if self.flavor != HYPERQUADRATIC and s < 0:
            raise StructureError(f"negative component index {s}")

    def component(self, s: int) -> GElement:
        x = self.comps.get(s)
        if x is None:
            m = self.n + s if self.flavor != QUADRATIC else self.n - s
            return GElement.zero(self.C, m)
        return x

    def is_cycle(self) -> bool:
        return family_is_cycle(self.C, self.n, self.comps, self.flavor)

    def require_cycle(self):
        if not self.is_cycle():
            raise NotACycle(f"{type(self).__name__} is not a cycle")
        return self

    def is_zero(self) -> bool:
        return not self.comps

    def __add__(self, other):
        assert type(self) is type(other) and self.n == other.n
        comps = dict(self.comps)
        for s, x in other.comps.items():
            comps[s] = comps[s] + x if s in comps else x
        return type(self)(self.C, self.n, comps)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        return type(self)(self.C, self.n,
                          {s: x.scale(c) for s, x in self.comps.items()})

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()

    def push(self, f, target) -> "_Structure":
        """Induced structure along a degree-0 chain map f : C -> target."""
        return type(self)(target, self.n,
                          {s: x.push(f, target)
                           for s, x in self.comps.items()})

    def to_json(self):
        return {
            "flavor": self.flavor,
            "n": self.n,
            "components": {
                str(s): {str(p): x.block(p).to_rows()
                         for p in x.blocks}
                for s, x in self.comps.items()},
        }

    @classmethod
    def from_json(cls, C: IntegerChainComplex, doc) -> "_Structure":
        n = int(doc["n"])
        comps = {}
        for s, blocks in doc.get("components", {}).items():
            s = int(s)
            m = n + s if cls.flavor != QUADRATIC else n - s
            bl = {}
            for p, rows in blocks.items():
                p = int(p)
                bl[p] = IntMatrix.from_rows(rows, C.rank(p), C.rank(m - p))
            comps[s] = GElement(C, m, bl)
        return cls(C, n, comps)


class SymmetricStructure(_Structure):
    flavor = SYMMETRIC


class QuadraticStructure(_Structure):
    flavor = QUADRATIC


class HyperquadraticElement(_Structure):
    flavor = HYPERQUADRATIC


@dataclass
class ChainBundle:
    """0-dimensional hyperquadratic cycle over the 0-dual of C."""

    C: IntegerChainComplex         # the underlying complex
    element: HyperquadraticElement  # degree-0 element over C.dual(0)

    def __post_init__(self):
        if self.element.n != 0:
            raise StructureError("chain bundle must have degree 0")

    def is_cycle(self) -> bool:
        return self.element.is_cycle()


@dataclass
class NormalStructure:
    """(phi, gamma, chi) with d chi = J(phi) - phi_0-hat(S^n gamma)."""

    phi: SymmetricStructure
    gamma: ChainBundle
    chi: HyperquadraticElement

    @property
    def C(self):
        return self.phi.C

    @property
    def n(self):
        return self.phi.n


# ---------------------------------------------------------------------------
# The basic natural maps
# ---------------------------------------------------------------------------


def symmetrize(psi: QuadraticStructure) -> SymmetricStructure:
    """(1+T) psi: component 0 becomes psi_0 + T psi_0, the rest vanish."""
    psi.require_cycle()
    x = psi.component(0)
    return SymmetricStructure(psi.C, psi.n, {0: x + x.T()})


def j_map(phi: SymmetricStructure) -> HyperquadraticElement:
    """Inclusion of the symmetric element into the periodic complex."""
    phi.require_cycle()
    return HyperquadraticElement(phi.C, phi.n, dict(phi.comps))


def h_map(theta: HyperquadraticElement) -> QuadraticStructure:
    """Connecting projection: (H theta)_t = theta_{-t-1}, degree drops by 1."""
    comps = {}
    for s, x in theta.comps.items():
        if s < 0:
            comps[-s - 1] = x
    return QuadraticStructure(theta.C, theta.n - 1, comps)


def suspend_element_family(comps: dict, CS, shift=1) -> dict:
    out = {}
    for s, x in comps.items():
        out[s + shift] = x.suspend(CS)
    return out


def suspend_structure(phi: SymmetricStructure) -> SymmetricStructure:
    """(S phi)_k = R(phi_{k-1}) on the suspension of C, degree n+1."""
    phi.require_cycle()
    CS = phi.C.shift(1)
    return SymmetricStructure(CS, phi.n + 1,
                              suspend_element_family(phi.comps, CS))


def suspend_hyper(theta: HyperquadraticElement, times: int = 1
                  ) -> HyperquadraticElement:
    """The periodic-complex suspension; invertible (use times < 0 for the
    inverse)."""
    cur = theta
    for _ in range(abs(times)):
        if times > 0:
            CS = cur.C.shift(1)
            cur = HyperquadraticElement(
                CS, cur.n + 1, suspend_element_family(cur.comps, CS))
        else:
            CD = cur.C.shift(-1)
            cur = HyperquadraticElement(
                CD, cur.n - 1,
                {s - 1: x.desuspend(CD) for s, x in cur.comps.items()})
    return cur


def desuspend_symmetric(phi_comps: dict, C, n) -> SymmetricStructure:
    """Inverse of suspend_structure; requires component 0 to vanish."""
    if 0 in phi_comps:
        raise StructureError("component 0 must vanish to desuspend")
    CD = C.shift(-1)
    comps = {s - 1: x.desuspend(CD) for s, x in phi_comps.items() if s != 0}
    return SymmetricStructure(CD, n - 1, comps)


def chi_of_quadratic(psi: QuadraticStructure) -> HyperquadraticElement:
    """Canonical chi with d chi = J((1+T) psi):
    chi_s = 0 for s >= 0 and chi_{-t-1} = (-1)^n psi_t."""
    comps = {}
    for t, x in psi.comps.items():
        comps[-t - 1] = x if psi.n % 2 == 0 else -x
    return HyperquadraticElement(psi.C, psi.n + 1, comps)


def quadratic_from_chi(phi: SymmetricStructure, chi: HyperquadraticElement):
    """Given d chi = J(phi), produce the quadratic refinement.

    Returns (psi, beta) with psi := (-1)^n H(chi) a quadratic n-cycle and
    beta (the s >= 0 truncation of chi) witnessing
    (1+T) psi = phi - d beta in the symmetric complex.
    """
    n = phi.n
    dchi = family_differential(chi.C, chi.n, chi.comps, HYPERQUADRATIC)
    want = dict(phi.comps)
    defect = {s: (dchi.get(s), want.get(s)) for s in set(dchi) | set(want)}
    for s, (a, b) in defect.items():
        a = a if a is not None else GElement.zero(phi.C, n + s)
        b = b if b is not None else GElement.zero(phi.C, n + s)
        if not (a - b).is_zero():
            raise NormalEquationViolated(
                f"d chi != J(phi) at component {s}")
    psi = h_map(chi)
    if n % 2:
        psi = -psi
    psi = QuadraticStructure(phi.C, n, psi.comps)
    beta = SymmetricStructure(phi.C, n + 1,
                              {s: x for s, x in chi.comps.items() if s >= 0})
    return psi, beta


# ---------------------------------------------------------------------------
# Chain-bundle pipelines
# ---------------------------------------------------------------------------


def dual_resign(C: IntegerChainComplex, n: int) -> ChainMap:
    """Canonical isomorphism kappa : S^n(C.dual(0)) -> C.dual(n)
    given by (-1)^{n r} in degree r."""
    src = C.dual(0).shift(n)
    dst = C.dual(n)
    comps = {}
    for r, k in dst.ranks.items():
        M = IntMatrix.identity(k)
        if (n * r) % 2:
            M = -M
        comps[r] = M
    return ChainMap(src, dst, 0, comps)


def bundle_image(phi: SymmetricStructure, gamma: ChainBundle
                 ) -> HyperquadraticElement:
    """phi_0-hat-percent of S^n gamma, an n-dimensional hyperquadratic
    element over C."""
    C, n = phi.C, phi.n
    lifted = suspend_hyper(gamma.element, n)      # over S^n TC, degree n
    kappa = dual_resign(C, n)
    over_dual = lifted.push(kappa, C.dual(n))
    phi0 = phi.component(0).as_chain_map()        # C^{n-*} -> C
    return over_dual.push(phi0, C)


def verify_normal(nu: NormalStructure) -> bool:
    """d chi = J(phi) - phi_0-hat(S^n gamma), exactly."""
    phi, gamma, chi = nu.phi, nu.gamma, nu.chi
    if not phi.is_cycle():
        raise NotACycle("phi is not a cycle")
    if not gamma.is_cycle():
        raise NotACycle("gamma is not a cycle")
    if chi.n != phi.n + 1:
        return False
    lhs = family_differential(chi.C, chi.n, chi.comps, HYPERQUADRATIC)
    rhs = (j_map(phi) - bundle_image(phi, gamma)).comps
    keys = set(lhs) | set(rhs)
    for s in keys:
        a = lhs.get(s)
        b = rhs.get(s)
        a = a if a is not None else GElement.zero(phi.C, phi.n + s)
        b = b if b is not None else GElement.zero(phi.C, phi.n + s)
        if not (a - b).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# Explicit percent complexes (bases, differentials, Q-groups)
# ---------------------------------------------------------------------------


class PercentComplex:
    """Explicit basis bookkeeping for one of the three percent complexes.

    A degree-n basis vector is a coordinate (s, p, i, j): W-index s, block
    degree p, row i, column j of the block matrix.
    """

    def __init__(self, C: IntegerChainComplex, flavor: str):
        self.C = C
        self.flavor = flavor

    def s_range(self, n: int):
        if not self.C.ranks:
            return range(0)
        lo, hi = self.C.support
        if self.flavor == SYMMETRIC:
            return range(max(0, 2 * lo - n), 2 * hi - n + 1)
        if self.flavor == QUADRATIC:
            return range(max(0, n - 2 * hi), n - 2 * lo + 1)
        return range(2 * lo - n, 2 * hi - n + 1)

    def gdegree(self, n: int, s: int) -> int:
        return n + s if self.flavor != QUADRATIC else n - s

    def basis(self, n: int):
        out = []
        C = self.C
        for s in self.s_range(n):
            m = self.gdegree(n, s)
            lo, hi = C.support
            for p in range(max(lo, m - hi), min(hi, m - lo) + 1):
                rp, rq = C.rank(p), C.rank(m - p)
                for i in range(rp):
                    for j in range(rq):
                        out.append((s, p, i, j))
        return out

    def rank(self, n: int) -> int:
        return len(self.basis(n))

    def index(self, n: int):
        return {coord: k for k, coord in enumerate(self.basis(n))}

    def element_to_vector(self, comps: dict, n: int) -> IntMatrix:
        idx = self.index(n)
        col: dict = {}
        for s, x in comps.items():
            for p, M in x.blocks.items():
                for i, row in M.rows.items():
                    for j, v in row.items():
                        col[idx[(s, p, i, j)]] = {0: v}
        return IntMatrix(len(idx), 1, col)

    def vector_to_element(self, vec: IntMatrix, n: int) -> dict:
        basis = self.basis(n)
        comps: dict = {}
        for k, r in vec.rows.items():
            v = r.get(0, 0)
            if not v:
                continue
            s, p, i, j = basis[k]
            m = self.gdegree(n, s)
            x = comps.setdefault(s, GElement.zero(self.C, m))
            blk = x.blocks.get(p)
            if blk is None:
                blk = IntMatrix.zeros(self.C.rank(p), self.C.rank(m - p))
                x.blocks[p] = blk
            blk.rows.setdefault(i, {})[j] = v
        return {s: x for s, x in comps.items() if not x.is_zero()}

    def differential(self, n: int) -> IntMatrix:
        """Matrix of the percent differential from degree n to n-1."""
        src = self.index(n)
        dst = self.index(n - 1)
        C = self.C
        entries = []
        dcols: dict = {}

        def column(r, j):
            key = (r, j)
            got = dcols.get(key)
            if got is None:
                got = [(i2, row.get(j)) for i2, row in
                       C.differential(r).rows.items() if j in row]
                dcols[key] = got
            return got

        for (s, p, i, j), k in src.items():
            m = self.gdegree(n, s)
            # d_G part, term d_p . x: output block p-1
            for ii, v in column(p, i):
                kk = dst.get((s, p - 1, ii, j))
                if kk is not None:
                    entries.append((kk, k, v))
            # d_G part, term (-1)^p x d^T: output block p
            sgn = -1 if p % 2 else 1
            for jj, v in column(m - p, j):
                kk = dst.get((s, p, i, jj))
                if kk is not None:
                    entries.append((kk, k, sgn * v))
            # cross terms
            if self.flavor == QUADRATIC:
                # output component t' = s-1 gets (-1)^n (x + (-1)^s T x)
                if s >= 1:
                    base = -1 if n % 2 else 1
                    kk = dst.get((s - 1, p, i, j))
                    if kk is not None:
                        entries.append((kk, k, base))
                    tsgn = base * (1 if s % 2 == 0 else -1)
                    tsgn *= -1 if (p * (m - p)) % 2 else 1
                    kk = dst.get((s - 1, m - p, j, i))
                    if kk is not None:
                        entries.append((kk, k, tsgn))
            else:
                # output component s+1 gets -(-1)^n (x + (-1)^{s+1} T x)
                base = -1 if n % 2 == 0 else 1
                kk = dst.get((s + 1, p, i, j))
                if kk is not None:
                    entries.append((kk, k, base))
                tsgn = base * (-1 if (s + 1) % 2 else 1)
                tsgn *= -1 if (p * (m - p)) % 2 else 1
                kk = dst.get((s + 1, m - p, j, i))
                if kk is not None:
                    entries.append((kk, k, tsgn))
        return IntMatrix.from_entries(len(dst), len(src), entries)

    def homology_at(self, n: int) -> AbelianGroup:
        dn = self.differential(n)
        dn1 = self.differential(n + 1)
        res_in = smith_normal_form(dn1)
        r_out = smith_normal_form(dn).rank
        free = self.rank(n) - r_out - res_in.rank
        return AbelianGroup(free, tuple(t for t in res_in.diag if t > 1))


def percent_complex(C: IntegerChainComplex, flavor: str,
                    degrees=None) -> IntegerChainComplex:
    """Materialize a window of the (unbounded) percent complex.

    The two outermost degrees of the window have truncated differentials, so
    homology there is unreliable; q_groups handles windows internally.
    """
    pc = PercentComplex(C, flavor)
    if degrees is None:
        if not C.ranks:
            return IntegerChainComplex.zero()
        lo, hi = C.support
        degrees = range(2 * lo - 2, 2 * hi + 3)
    ranks = {}
    diffs = {}
    for n in degrees:
        r = pc.rank(n)
        if r:
            ranks[n] = r
    for n in degrees:
        if n - 1 in ranks and n in ranks:
            M = pc.differential(n)
            if not M.is_zero():
                diffs[n] = M
    return IntegerChainComplex(ranks, diffs, check=True)


def q_groups(C: IntegerChainComplex, n: int):
    """(Q^n, Q_n, Q-hat^n) as abelian groups."""
    sym = PercentComplex(C, SYMMETRIC).homology_at(n)
    quad = PercentComplex(C, QUADRATIC).homology_at(n)
    hyper = PercentComplex(C, HYPERQUADRATIC).homology_at(n)
    return sym, quad, hyper


# ---------------------------------------------------------------------------
# Maps between percent complexes as matrices, and the exactness audit
# ---------------------------------------------------------------------------


def _map_matrix(srcpc: PercentComplex, dstpc: PercentComplex,
                n_src: int, n_dst: int, op):
    """Matrix of an operation on component families, basis-vector-wise."""
    src = srcpc.basis(n_src)
    dst_idx = dstpc.index(n_dst)
    entries = []
    for k, (s, p, i, j) in enumerate(src):
        m = srcpc.gdegree(n_src, s)
        x = GElement(srcpc.C, m)
        blk = IntMatrix.zeros(srcpc.C.rank(p), srcpc.C.rank(m - p))
        blk.rows[i] = {j: 1}
        x.blocks[p] = blk
        out = op({s: x})
        for s2, y in out.items():
            for p2, M in y.blocks.items():
                for i2, row in M.rows.items():
                    for j2, v in row.items():
                        kk = dst_idx.get((s2, p2, i2, j2))
                        if kk is None:
                            raise StructureError("image outside window")
                        entries.append((kk, k, v))
    return IntMatrix.from_entries(len(dst_idx), len(src), entries)


def symmetrization_op(comps: dict) -> dict:
    x = comps.get(0)
    if x is None:
        return {}
    y = x + x.T()
    return {0: y} if not y.is_zero() else {}


def j_op(comps: dict) -> dict:
    return {s: x for s, x in comps.items() if s >= 0}


def h_op(comps: dict) -> dict:
    return {-s - 1: x for s, x in comps.items() if s < 0}


@dataclass
class LESReport:
    degrees: tuple
    failures: list
    suspension_checked: bool

    @property
    def exact(self) -> bool:
        return not self.failures


def _cycles(pc: PercentComplex, n: int) -> IntMatrix:
    d = pc.differential(n)
    if d.ncols == 0:
        return IntMatrix.zeros(pc.rank(n), 0)
    return kernel_basis(d)


def _exact_at(in_mat, out_mat, Z_src, Z_mid, B_mid, B_out) -> bool:
    """Exactness at the middle node of src -> mid -> out."""
    img = (in_mat @ Z_src).hstack(B_mid)
    if Z_mid.ncols == 0:
        return img.ncols == 0 or smith_normal_form(img).rank == 0
    bz = out_mat @ Z_mid
    stacked = bz.hstack(-B_out) if B_out.ncols else bz
    ker = kernel_basis(stacked)
    sel: dict = {}
    for i, r in ker.rows.items():
        if i < Z_mid.ncols:
            sel[i] = dict(r)
    preim = Z_mid @ IntMatrix(Z_mid.ncols, ker.ncols, sel)
    return lattice_equal(img, preim)


def les_check(C: IntegerChainComplex, lo: int, hi: int,
              check_suspension: bool = True) -> LESReport:
    """Exactness of ... -> Q_n -> Q^n -> Q-hat^n -> Q_{n-1} -> ... at every
    node with degree in [lo, hi], by integer lattice comparison."""
    sym = PercentComplex(C, SYMMETRIC)
    quad = PercentComplex(C, QUADRATIC)
    hyper = PercentComplex(C, HYPERQUADRATIC)
    failures = []
    for n in range(lo, hi + 1):
        Zq = _cycles(quad, n)
        Zs = _cycles(sym, n)
        Zh = _cycles(hyper, n)
        Zq1 = _cycles(quad, n - 1)
        Bs = sym.differential(n + 1)
        Bh = hyper.differential(n + 1)
        Bq1 = quad.differential(n)
        one_t = _map_matrix(quad, sym, n, n, symmetrization_op)
        jm = _map_matrix(sym, hyper, n, n, j_op)
        hm = _map_matrix(hyper, quad, n, n - 1, h_op)
        one_t_down = _map_matrix(quad, sym, n - 1, n - 1, symmetrization_op)
        if not _exact_at(one_t, jm, Zq, Zs, Bs, Bh):
            failures.append((n, "symmetric node"))
        if not _exact_at(jm, hm, Zs, Zh, Bh, quad.differential(n - 1 + 1)):
            failures.append((n, "hyperquadratic node"))
        if not _exact_at(hm, one_t_down, Zh, Zq1,
                         quad.differential(n), sym.differential(n)):
            failures.append((n, "quadratic node"))
    suspension_checked = False
    if check_suspension and C.ranks:
        CS = C.shift(1)
        hyperS = PercentComplex(CS, HYPERQUADRATIC)

        def s_op(comps):
            return suspend_element_family(comps, CS)

        for n in range(lo, hi + 1):
            S = _map_matrix(hyper, hyperS, n, n + 1, s_op)
            S_down = _map_matrix(hyper, hyperS, n - 1, n, s_op)
            # signed permutation (graded bijection)
            if S.nnz() != hyper.rank(n) or S.nnz() != hyperS.rank(n + 1):
                failures.append((n, "suspension not bijective"))
                continue
            # anti-chain-map: d' S_n = -S_{n-1} d
            left = hyperS.differential(n + 1) @ S
            right = S_down @ hyper.differential(n)
            if left != -right:
                failures.append((n, "suspension does not anticommute"))
        suspension_checked = True
    return LESReport(degrees=(lo, hi), failures=failures,
                     suspension_checked=suspension_checked)


# ---------------------------------------------------------------------------
# Homotopy-induced operators on percent complexes
# ---------------------------------------------------------------------------


def conjugation_homotopy_block(x: GElement, g0, g1, h,
                               target: IntegerChainComplex) -> GElement:
    """Lambda(x)_p = h x_{p-1} g1^T + (-1)^p g0 x_p h^T.

    For g1 - g0 = d h + h d this satisfies
    d Lambda(x) + Lambda(d x) = g1 x g1^T - g0 x g0^T.
    """
    C, m = x.C, x.m
    acc: dict = {}
    for p, M in x.blocks.items():
        A = h.component(p) @ M @ g1.component(m - p).transpose()
        if not A.is_zero():
            acc[p + 1] = acc.get(p + 1, IntMatrix.zeros(
                target.rank(p + 1), target.rank(m - p))) + A
        B = g0.component(p) @ M @ h.component(m - p).transpose()
        if p % 2:
            B = -B
        if not B.is_zero():
            acc[p] = acc.get(p, IntMatrix.zeros(
                target.rank(p), target.rank(m + 1 - p))) + B
    return GElement(target, m + 1, acc)


def _cross_block(x: GElement, h, target) -> GElement:
    """h (x)_{p-1} h^T placed at block p (no sign; signs added by caller)."""
    m = x.m
    acc = {}
    for p, M in x.blocks.items():
        A = h.component(p) @ M @ h.component(m - p).transpose()
        if not A.is_zero():
            acc[p + 1] = A
    return GElement(target, m + 2, acc)


# Sign exponents (a, b, c, e) for the equivariant cross term: coefficient
# (-1)^{a*s + b*m + e} on the h (T x) h^T sandwich, with the per-block
# (-1)^p twist applied when c = 1.  This is the unique choice for which
# d Gamma + Gamma d = g1^% - g0^% holds identically in all three flavors.
GAMMA_CROSS_SIGNS = {"sym": (0, 1, 1, 0), "quad": (0, 1, 1, 0)}


def equivariant_homotopy(comps: dict, n: int, flavor: str,
                         g0, g1, h, target) -> dict:
    """Gamma with d Gamma(theta) + Gamma(d theta) = g1 theta - g0 theta
    on W-percent families (symmetric/hyperquadratic) or quadratic families.
    """
    params = GAMMA_CROSS_SIGNS["quad" if flavor == QUADRATIC else "sym"]
    if params is None:
        raise StructureError("cross signs not calibrated")
    a, b, c, e = params
    out: dict = {}

    def add(s, x):
        if x.is_zero():
            return
        out[s] = out[s] + x if s in out else x

    for s, x in comps.items():
        add(s, conjugation_homotopy_block(x, g0, g1, h, target))
        y = x.T()
        if c:
            y = GElement(y.C, y.m,
                         {p: (M if p % 2 == 0 else -M)
                          for p, M in y.blocks.items()})
        cross = _cross_block(y, h, target)
        shift = 1 if flavor != QUADRATIC else -1
        sgn = (a * s + b * x.m + e) % 2
        add(s + shift, cross if sgn == 0 else -cross)
    if flavor != HYPERQUADRATIC:
        out = {s: x for s, x in out.items() if s >= 0}
    return {s: x for s, x in out.items() if not x.is_zero()}
