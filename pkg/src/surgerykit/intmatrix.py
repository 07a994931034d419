"""Sparse exact integer matrices and Smith/Hermite normal form machinery.

Everything here is exact: entries are arbitrary-precision Python ints and no
modular or floating-point shortcut is ever taken.  Matrices are stored as
dict-of-dict rows, which keeps the barycentric-subdivision-sized boundary
matrices (tens of thousands of mostly-unit entries) workable.

Pivoting strategy for the Smith reduction: prefer entries of absolute value 1
(no coefficient growth, pure elimination), tie-broken by a Markowitz fill
estimate; fall back to the globally smallest nonzero entry otherwise.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from math import gcd


class IntMatrix:
    """Sparse integer matrix: ``rows[i][j] = v`` with v != 0."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: dict | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows if rows is not None else {}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def from_rows(cls, data, nrows=None, ncols=None) -> "IntMatrix":
        data = [list(r) for r in data]
        m = len(data) if nrows is None else nrows
        n = (len(data[0]) if data else 0) if ncols is None else ncols
        rows = {}
        for i, r in enumerate(data):
            d = {j: int(v) for j, v in enumerate(r) if v}
            if d:
                rows[i] = d
        return cls(m, n, rows)

    @classmethod
    def from_entries(cls, nrows, ncols, entries) -> "IntMatrix":
        rows: dict = {}
        for i, j, v in entries:
            if v:
                r = rows.setdefault(i, {})
                w = r.get(j, 0) + v
                if w:
                    r[j] = w
                else:
                    del r[j]
        return cls(nrows, ncols, {i: r for i, r in rows.items() if r})

    @classmethod
    def block(cls, grid) -> "IntMatrix":
        """Assemble from a 2D grid of IntMatrix/None blocks."""
        rheights = [None] * len(grid)
        cwidths = [None] * len(grid[0])
        for bi, row in enumerate(grid):
            for bj, blk in enumerate(row):
                if blk is None:
                    continue
                if rheights[bi] is None:
                    rheights[bi] = blk.nrows
                elif rheights[bi] != blk.nrows:
                    raise ValueError("inconsistent block heights")
                if cwidths[bj] is None:
                    cwidths[bj] = blk.ncols
                elif cwidths[bj] != blk.ncols:
                    raise ValueError("inconsistent block widths")
        rheights = [h or 0 for h in rheights]
        cwidths = [w or 0 for w in cwidths]
        roff = [0]
        for h in rheights:
            roff.append(roff[-1] + h)
        coff = [0]
        for w in cwidths:
            coff.append(coff[-1] + w)
        out = cls(roff[-1], coff[-1])
        for bi, row in enumerate(grid):
            for bj, blk in enumerate(row):
                if blk is None:
                    continue
                for i, r in blk.rows.items():
                    dst = out.rows.setdefault(roff[bi] + i, {})
                    for j, v in r.items():
                        dst[coff[bj] + j] = v
        return out

    # -- basic queries ------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def is_zero(self) -> bool:
        return not self.rows

    def entries(self):
        for i, r in self.rows.items():
            for j, v in r.items():
                yield i, j, v

    def get(self, i, j) -> int:
        return self.rows.get(i, {}).get(j, 0)

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols,
                         {i: dict(r) for i, r in self.rows.items()})

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and \
            self.rows == other.rows

    def __hash__(self):
        raise TypeError("IntMatrix is mutable; use content_hash()")

    def content_hash(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(f"{self.nrows}x{self.ncols}".encode())
        for i in sorted(self.rows):
            r = self.rows[i]
            for j in sorted(r):
                h.update(f"|{i},{j},{r[j]}".encode())
        return h.hexdigest()

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = self.copy()
        for i, r in other.rows.items():
            dst = out.rows.setdefault(i, {})
            for j, v in r.items():
                w = dst.get(j, 0) + v
                if w:
                    dst[j] = w
                else:
                    del dst[j]
            if not dst:
                del out.rows[i]
        return out

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + other.scale(-1)

    def __neg__(self) -> "IntMatrix":
        return self.scale(-1)

    def scale(self, c: int) -> "IntMatrix":
        if c == 0:
            return IntMatrix(self.nrows, self.ncols)
        return IntMatrix(self.nrows, self.ncols,
                         {i: {j: c * v for j, v in r.items()}
                          for i, r in self.rows.items()})

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"mul shape mismatch {self.shape} @ {other.shape}")
        out_rows: dict = {}
        orows = other.rows
        for i, r in self.rows.items():
            acc: dict = {}
            for k, v in r.items():
                br = orows.get(k)
                if not br:
                    continue
                for j, w in br.items():
                    t = acc.get(j, 0) + v * w
                    if t:
                        acc[j] = t
                    elif j in acc:
                        del acc[j]
            if acc:
                out_rows[i] = acc
        return IntMatrix(self.nrows, other.ncols, out_rows)

    def transpose(self) -> "IntMatrix":
        out: dict = {}
        for i, r in self.rows.items():
            for j, v in r.items():
                out.setdefault(j, {})[i] = v
        return IntMatrix(self.ncols, self.nrows, out)

    def col(self, j: int) -> "IntMatrix":
        out = {}
        for i, r in self.rows.items():
            if j in r:
                out[i] = {0: r[j]}
        return IntMatrix(self.nrows, 1, out)

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix.block([[self, other]])

    def to_rows(self):
        return [[self.get(i, j) for j in range(self.ncols)]
                for i in range(self.nrows)]

    def __repr__(self):
        return f"IntMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass
class SNFResult:
    diag: list          # invariant factors, positive, d_i | d_{i+1}
    rank: int
    U: IntMatrix | None  # U @ A @ V == D (when transforms requested)
    V: IntMatrix | None


def _divisibility_fixup(diag):
    """Normalize positive diagonal values into a divisibility chain."""
    d = [abs(x) for x in diag if x]
    changed = True
    while changed:
        changed = False
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                if d[j] % d[i]:
                    g = gcd(d[i], d[j])
                    l = d[i] // g * d[j]
                    d[i], d[j] = g, l
                    changed = True
    return sorted(d)


class _Work:
    """Mutable elimination workspace with a column index."""

    def __init__(self, A: IntMatrix):
        self.rows = {i: dict(r) for i, r in A.rows.items()}
        self.colidx: dict = {}
        for i, r in self.rows.items():
            for j in r:
                self.colidx.setdefault(j, set()).add(i)

    def add_row(self, src: int, dst: int, c: int):
        """row[dst] += c * row[src]"""
        if c == 0:
            return
        srow = self.rows.get(src)
        if not srow:
            return
        drow = self.rows.setdefault(dst, {})
        for j, v in srow.items():
            w = drow.get(j, 0) + c * v
            if w:
                if j not in drow:
                    self.colidx.setdefault(j, set()).add(dst)
                drow[j] = w
            else:
                del drow[j]
                self.colidx[j].discard(dst)
        if not drow:
            del self.rows[dst]

    def swap_rows(self, a: int, b: int):
        if a == b:
            return
        ra = self.rows.pop(a, None)
        rb = self.rows.pop(b, None)
        if rb is not None:
            self.rows[a] = rb
        if ra is not None:
            self.rows[b] = ra
        for j in set((ra or {})) | set((rb or {})):
            s = self.colidx.get(j)
            if s is None:
                continue
            ina, inb = a in s, b in s
            s.discard(a)
            s.discard(b)
            if ina:
                s.add(b)
            if inb:
                s.add(a)

    def add_col(self, src: int, dst: int, c: int):
        """col[dst] += c * col[src]"""
        if c == 0:
            return
        for i in list(self.colidx.get(src, ())):
            r = self.rows[i]
            v = r.get(src)
            if v is None:
                continue
            w = r.get(dst, 0) + c * v
            if w:
                if dst not in r:
                    self.colidx.setdefault(dst, set()).add(i)
                r[dst] = w
            else:
                del r[dst]
                self.colidx[dst].discard(i)

    def swap_cols(self, a: int, b: int):
        if a == b:
            return
        for i in set(self.colidx.get(a, ())) | set(self.colidx.get(b, ())):
            r = self.rows[i]
            va, vb = r.pop(a, None), r.pop(b, None)
            if vb is not None:
                r[a] = vb
            if va is not None:
                r[b] = va
        sa = self.colidx.pop(a, set())
        sb = self.colidx.pop(b, set())
        if sb:
            self.colidx[a] = sb
        if sa:
            self.colidx[b] = sa


def smith_normal_form(A: IntMatrix) -> SNFResult:
    """Invariant factors of A (no transform tracking; sparse pivoting)."""
    w = _Work(A)
    diag = []
    while w.rows:
        # pivot selection: prefer |value| == 1, minimize Markowitz fill
        best = None
        best_key = None
        scanned = 0
        for i, r in w.rows.items():
            rl = len(r)
            for j, v in r.items():
                av = abs(v)
                key = (av != 1, av, (rl - 1) * (len(w.colidx[j]) - 1))
                if best_key is None or key < best_key:
                    best_key, best = key, (i, j)
                scanned += 1
            if best_key is not None and not best_key[0] and scanned > 512:
                break
        pi, pj = best
        # local Smith reduction at the pivot
        while True:
            pv = w.rows[pi][pj]
            # clear the pivot column with row operations
            col_rows = [i for i in w.colidx.get(pj, ()) if i != pi]
            progressed = False
            for i in col_rows:
                v = w.rows.get(i, {}).get(pj)
                if v is None:
                    continue
                q, rem = divmod(v, pv)
                w.add_row(pi, i, -q)
                if rem:
                    # gcd step: swap the smaller remainder into the pivot
                    w.swap_rows(pi, i)
                    progressed = True
                    break
            if progressed:
                continue
            # column is clear; clear the pivot row with column operations
            prow = [j for j in list(w.rows.get(pi, {})) if j != pj]
            progressed = False
            for j in prow:
                v = w.rows[pi].get(j)
                if v is None:
                    continue
                q, rem = divmod(v, pv)
                w.add_col(pj, j, -q)
                if rem:
                    w.swap_cols(pj, j)
                    progressed = True
                    break
            if progressed:
                continue
            # both clear?
            col_live = any(i != pi for i in w.colidx.get(pj, ()))
            row_live = any(j != pj for j in w.rows.get(pi, {}))
            if not col_live and not row_live:
                break
        diag.append(abs(w.rows[pi][pj]))
        del w.rows[pi]
        w.colidx[pj].discard(pi)
        if not w.colidx[pj]:
            del w.colidx[pj]
    inv = _divisibility_fixup(diag)
    return SNFResult(diag=inv, rank=len(inv), U=None, V=None)


def smith_normal_form_with_transforms(A: IntMatrix) -> SNFResult:
    """Full SNF with unimodular U, V such that U @ A @ V = diag.

    Correctness-first dense-ish variant; intended for the moderate sizes
    where kernels, solutions, or contractions are extracted.
    """
    m, n = A.nrows, A.ncols
    w = _Work(A)
    U = IntMatrix.identity(m)
    V = IntMatrix.identity(n)
    uw = _Work(U)
    vw = _Work(V)  # store V^T row-ops as col ops on V via mirrored work
    pivots = []
    pos = 0
    while w.rows:
        best = None
        best_key = None
        for i, r in w.rows.items():
            rl = len(r)
            for j, v in r.items():
                av = abs(v)
                key = (av != 1, av, (rl - 1) * (len(w.colidx[j]) - 1))
                if best_key is None or key < best_key:
                    best_key, best = key, (i, j)
        pi, pj = best
        while True:
            pv = w.rows[pi][pj]
            col_rows = [i for i in w.colidx.get(pj, ()) if i != pi]
            progressed = False
            for i in col_rows:
                v = w.rows.get(i, {}).get(pj)
                if v is None:
                    continue
                q, rem = divmod(v, pv)
                w.add_row(pi, i, -q)
                uw.add_row(pi, i, -q)
                if rem:
                    w.swap_rows(pi, i)
                    uw.swap_rows(pi, i)
                    progressed = True
                    break
            if progressed:
                continue
            prow = [j for j in list(w.rows.get(pi, {})) if j != pj]
            progressed = False
            for j in prow:
                v = w.rows[pi].get(j)
                if v is None:
                    continue
                q, rem = divmod(v, pv)
                w.add_col(pj, j, -q)
                vw.add_col(pj, j, -q)
                if rem:
                    w.swap_cols(pj, j)
                    vw.swap_cols(pj, j)
                    progressed = True
                    break
            if progressed:
                continue
            col_live = any(i != pi for i in w.colidx.get(pj, ()))
            row_live = any(j != pj for j in w.rows.get(pi, {}))
            if not col_live and not row_live:
                break
        pv = w.rows[pi][pj]
        if pv < 0:
            uw.add_row(pi, pi, -2)  # negate row pi
            pv = -pv
        pivots.append((pi, pj, pv))
        del w.rows[pi]
        w.colidx[pj].discard(pi)
        if not w.colidx[pj]:
            del w.colidx[pj]
        pos += 1
    # permute pivots to the leading diagonal
    Umat = IntMatrix(m, m, {i: dict(r) for i, r in uw.rows.items()})
    Vmat = IntMatrix(n, n, {i: dict(r) for i, r in vw.rows.items()})
    rowperm = {}
    colperm = {}
    for k, (pi, pj, pv) in enumerate(pivots):
        rowperm[pi] = k
        colperm[pj] = k
    nextr = len(pivots)
    for i in range(m):
        if i not in rowperm:
            rowperm[i] = nextr
            nextr += 1
    nextc = len(pivots)
    for j in range(n):
        if j not in colperm:
            colperm[j] = nextc
            nextc += 1
    P = IntMatrix(m, m, {rowperm[i]: {i: 1} for i in range(m)})
    Q = IntMatrix(n, n, {j: {colperm[j]: 1} for j in range(n)})
    U2 = P @ Umat
    V2 = Vmat @ Q
    # enforce the divisibility chain with 2x2 unimodular moves
    diag = [pv for (_, _, pv) in pivots]
    r = len(diag)
    changed = True
    while changed:
        changed = False
        for a in range(r):
            for b in range(a + 1, r):
                if diag[b] % diag[a]:
                    # rows/cols a,b: [[x,0],[0,y]] -> [[g,0],[0,l]]
                    x, y = diag[a], diag[b]
                    g = gcd(x, y)
                    l = x // g * y
                    s, t = _bezout(x, y)
                    # U' rows: [s t; -y/g x/g], V' cols: [1 -(t*y)/g; 1 ...]
                    # standard: [[s, t],[-y//g, x//g]] @ [[x,0],[0,y]] @
                    #           [[1, -t*y//g],[1, s*x//g]] = [[g,0],[0,l]]
                    _apply_pair_rows(U2, a, b, s, t, -y // g, x // g)
                    _apply_pair_cols(V2, a, b, 1, 1, -t * y // g, s * x // g)
                    diag[a], diag[b] = g, l
                    changed = True
    return SNFResult(diag=diag, rank=r, U=U2, V=V2)


def _bezout(a, b):
    """(s, t) with s*a + t*b = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_s, old_t


def _apply_pair_rows(M: IntMatrix, a, b, w, x, y, z):
    """rows (a,b) <- (w*ra + x*rb, y*ra + z*rb)"""
    ra = M.rows.pop(a, {})
    rb = M.rows.pop(b, {})
    na = {}
    nb = {}
    for j in set(ra) | set(rb):
        va, vb = ra.get(j, 0), rb.get(j, 0)
        u = w * va + x * vb
        v = y * va + z * vb
        if u:
            na[j] = u
        if v:
            nb[j] = v
    if na:
        M.rows[a] = na
    if nb:
        M.rows[b] = nb


def _apply_pair_cols(M: IntMatrix, a, b, w, y, x, z):
    """cols (a,b) <- (w*ca + y*cb, x*ca + z*cb)"""
    for i, r in M.rows.items():
        va, vb = r.get(a, 0), r.get(b, 0)
        u = w * va + y * vb
        v = x * va + z * vb
        for j, val in ((a, u), (b, v)):
            if val:
                r[j] = val
            else:
                r.pop(j, None)
    for i in [i for i, r in list(M.rows.items()) if not r]:
        del M.rows[i]


def invariant_factors(A: IntMatrix):
    return smith_normal_form(A).diag


def rank(A: IntMatrix) -> int:
    return smith_normal_form(A).rank


def kernel_basis(A: IntMatrix) -> IntMatrix:
    """Columns form a basis of the integral kernel lattice of A."""
    res = smith_normal_form_with_transforms(A)
    r = res.rank
    V = res.V
    cols = list(range(r, A.ncols))
    out: dict = {}
    for i, row in V.rows.items():
        for k, j in enumerate(cols):
            v = row.get(j)
            if v:
                out.setdefault(i, {})[k] = v
    return IntMatrix(A.ncols, len(cols), out)


def solve(A: IntMatrix, B: IntMatrix) -> IntMatrix | None:
    """Exact integral solution X of A @ X = B, or None."""
    if A.nrows != B.nrows:
        raise ValueError("solve: row mismatch")
    res = smith_normal_form_with_transforms(A)
    U, V, diag = res.U, res.V, res.diag
    C = U @ B
    Y: dict = {}
    for i in range(A.nrows):
        row = C.rows.get(i, {})
        if i < len(diag):
            d = diag[i]
            nr = {}
            for j, v in row.items():
                q, rem = divmod(v, d)
                if rem:
                    return None
                if q:
                    nr[j] = q
            if nr:
                Y[i] = nr
        else:
            if row:
                return None
    X = V @ IntMatrix(A.ncols, B.ncols, Y)
    return X


def hnf_columns(A: IntMatrix) -> IntMatrix:
    """Canonical column Hermite normal form (lattice signature of col span)."""
    # integer column echelon; canonical enough for lattice equality tests
    cols = {}
    for i, j, v in A.entries():
        cols.setdefault(j, {})[i] = v
    basis = [c for c in cols.values() if c]

    def reduce_all(basis):
        basis = [dict(c) for c in basis if c]
        out = []
        # eliminate by topmost row index
        while basis:
            piv_row = min(min(c) for c in basis)
            group = [c for c in basis if min(c) == piv_row]
            rest = [c for c in basis if min(c) != piv_row]
            # gcd-combine columns in `group` on row piv_row
            while len(group) > 1:
                group.sort(key=lambda c: abs(c[piv_row]))
                a = group[0]
                b = group[-1]
                q = b[piv_row] // a[piv_row]
                newb = {}
                for i in set(a) | set(b):
                    v = b.get(i, 0) - q * a.get(i, 0)
                    if v:
                        newb[i] = v
                group = group[:-1]
                if newb:
                    if piv_row in newb:
                        group.append(newb)
                    else:
                        rest.append(newb)
            out.append(group[0])
            basis = rest
        # normalize signs and reduce above-pivot entries
        out.sort(key=lambda c: min(c))
        for k, c in enumerate(out):
            pr = min(c)
            if c[pr] < 0:
                for i in list(c):
                    c[i] = -c[i]
        for k in range(len(out) - 1, -1, -1):
            pr = min(out[k])
            pv = out[k][pr]
            for l in range(k):
                v = out[l].get(pr, 0)
                q = v // pv
                if q:
                    for i in set(out[k]) | set(out[l]):
                        w = out[l].get(i, 0) - q * out[k].get(i, 0)
                        if w:
                            out[l][i] = w
                        else:
                            out[l].pop(i, None)
        out = [c for c in out if c]
        out.sort(key=lambda c: min(c))
        return out

    res = reduce_all(basis)
    M = IntMatrix(A.nrows, len(res))
    for j, c in enumerate(res):
        for i, v in c.items():
            M.rows.setdefault(i, {})[j] = v
    return M


def lattice_equal(A: IntMatrix, B: IntMatrix) -> bool:
    """Do the columns of A and B span the same sublattice of Z^n?"""
    if A.nrows != B.nrows:
        return False
    return hnf_columns(A).rows == hnf_columns(B).rows


def lattice_contains(A: IntMatrix, B: IntMatrix) -> bool:
    """Is every column of B in the column lattice of A?"""
    if B.ncols == 0:
        return True
    return solve(A, B) is not None
