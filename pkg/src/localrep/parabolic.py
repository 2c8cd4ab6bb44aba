"""Standard block parabolics and contraction by torus conjugation.

A ``BlockStructure`` is an ordered composition of n.  It determines the
standard parabolic pair: block upper (resp. lower) triangular matrices, with
the block diagonal as their common Levi part.  Conjugating by powers of a
suitable diagonal matrix contracts the unipotent off-diagonal part, which is
how block triangular tuples degenerate onto their block diagonal and how
pairs of opposite-parabolic tuples are joined by an explicit path of
conjugates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DimensionMismatchError,
    LeviMismatchError,
    NotInBigCellError,
    NotParabolicError,
    NotUnipotentError,
)
from .fields import Field, INFINITY
from .linalg import Matrix
from .reptheory import Representation

#: valuation threshold certifying non-archimedean convergence at finite index
VALUATION_THRESHOLD = 20
#: magnitude threshold for the real case
REAL_LIMIT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class BlockStructure:
    """Ordered composition (n_1, ..., n_k) of n."""

    n: int
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if any(s < 1 for s in sizes) or sum(sizes) != self.n:
            raise DimensionMismatchError(f"{sizes} is not a composition of {self.n}")

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def boundaries(self) -> tuple:
        out = [0]
        for s in self.sizes:
            out.append(out[-1] + s)
        return tuple(out)

    def block_of(self, index: int) -> int:
        b = self.boundaries
        for bi in range(self.k):
            if b[bi] <= index < b[bi + 1]:
                return bi
        raise IndexError(index)

    def is_block_triangular(self, m: Matrix, side: str = "upper") -> bool:
        sc = m.entry_scale()
        b = self.boundaries
        for bi in range(self.k):
            for bj in range(self.k):
                if (side == "upper" and bi <= bj) or (side == "lower" and bi >= bj):
                    continue
                for i in range(b[bi], b[bi + 1]):
                    for j in range(b[bj], b[bj + 1]):
                        if not m.field.is_zero(m.data[i][j], sc):
                            return False
        return True

    def diagonal_part(self, m: Matrix) -> Matrix:
        zero = m.field.zero()
        b = self.boundaries
        rows = [[zero] * self.n for _ in range(self.n)]
        for bi in range(self.k):
            for i in range(b[bi], b[bi + 1]):
                for j in range(b[bi], b[bi + 1]):
                    rows[i][j] = m.data[i][j]
        return Matrix(m.field, tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class FundamentalSequence:
    """Powers of a block-constant diagonal matrix with strictly dropping |c|.

    ``base`` is diag(c_1 I_{n_1}, ..., c_k I_{n_k}) with
    |c_1| > |c_2| > ... > |c_k|; conjugation g -> base^-1 g base then shrinks
    every strictly upper block, and the powers base^i realise the contraction
    onto the block diagonal.
    """

    blocks: BlockStructure
    base: Matrix

    def __post_init__(self):
        m = self.base
        f = m.field
        if m.n != self.blocks.n:
            raise DimensionMismatchError("base size does not match the block structure")
        sc = m.entry_scale()
        for i in range(m.n):
            for j in range(m.n):
                if i != j and not f.is_zero(m.data[i][j], sc):
                    raise NotParabolicError("base must be diagonal")
        b = self.blocks.boundaries
        cs = []
        for bi in range(self.blocks.k):
            lo, hi = b[bi], b[bi + 1]
            c = m.data[lo][lo]
            for i in range(lo, hi):
                if not f.eq(m.data[i][i], c, sc):
                    raise NotParabolicError("base must be constant within blocks")
            cs.append(c)
        mags = [f.abs_value(c) for c in cs]
        if any(x <= y for x, y in zip(mags, mags[1:])):
            raise NotParabolicError("block magnitudes must strictly decrease")

    @classmethod
    def default(cls, blocks: BlockStructure, field: Field) -> "FundamentalSequence":
        """Unit-increment base: |c_j| drops by a factor p (resp. 2) per block."""
        if field.is_real:
            cs = [2.0 ** (-j) for j in range(blocks.k)]
        else:
            pi = field.uniformizer()
            cs = [pi ** j for j in range(blocks.k)]
        entries = []
        for size, c in zip(blocks.sizes, cs):
            entries.extend([c] * size)
        return cls(blocks, Matrix.diagonal(field, entries))

    def block_constants(self) -> list:
        b = self.blocks.boundaries
        return [self.base.data[b[i]][b[i]] for i in range(self.blocks.k)]

    def conjugate_power(self, m: Matrix, i: int) -> Matrix:
        """base^-i * m * base^i, computed entrywise (base is diagonal)."""
        f = m.field
        cs = [self.base.data[r][r] for r in range(m.n)]
        rows = []
        for r in range(m.n):
            row = []
            for s in range(m.n):
                ratio = (cs[s] / cs[r]) ** i if i >= 0 else (cs[r] / cs[s]) ** (-i)
                row.append(m.data[r][s] * ratio)
            rows.append(tuple(row))
        return Matrix(f, tuple(rows))


# ---------------------------------------------------------------------------
# block LDU


def levi_decompose(g: Matrix, blocks: BlockStructure):
    """Unique factorisation g = u * r * n over the big cell.

    ``u`` is block lower unitriangular, ``r`` block diagonal and ``n`` block
    upper unitriangular.  Raises NOT_IN_BIG_CELL when a leading principal
    block of ``g`` is singular.
    """
    f = g.field
    if g.n != blocks.n:
        raise DimensionMismatchError("matrix size does not match the block structure")
    b = blocks.boundaries
    k = blocks.k
    work = [list(row) for row in g.data]
    sc = g.entry_scale()
    u = [[f.one() if i == j else f.zero() for j in range(g.n)] for i in range(g.n)]
    n_mat = [[f.one() if i == j else f.zero() for j in range(g.n)] for i in range(g.n)]

    def sub(rows, r0, r1, c0, c1):
        return [[rows[i][j] for j in range(c0, c1)] for i in range(r0, r1)]

    for bj in range(k):
        lo, hi = b[bj], b[bj + 1]
        pivot = Matrix(f, tuple(tuple(work[i][j] for j in range(lo, hi)) for i in range(lo, hi)))
        if f.is_zero(pivot.det(), sc):
            raise NotInBigCellError(f"leading principal block {bj} is singular")
        pinv = pivot.inv()
        for bi in range(bj + 1, k):
            rlo, rhi = b[bi], b[bi + 1]
            factor = [
                [sum((work[i][m] * pinv.data[m - lo][jj] for m in range(lo, hi)),
                     start=f.zero())
                 for jj in range(hi - lo)]
                for i in range(rlo, rhi)
            ]
            for ii in range(rlo, rhi):
                for jj in range(lo, hi):
                    u[ii][jj] = factor[ii - rlo][jj - lo]
                for col in range(g.n):
                    acc = work[ii][col]
                    for m in range(lo, hi):
                        acc = acc - factor[ii - rlo][m - lo] * work[m][col]
                    work[ii][col] = acc
        for bi in range(bj + 1, k):
            clo, chi = b[bi], b[bi + 1]
            factor = [
                [sum((pinv.data[ii][m - lo] * work[m][j] for m in range(lo, hi)),
                     start=f.zero())
                 for j in range(clo, chi)]
                for ii in range(hi - lo)
            ]
            for ii in range(lo, hi):
                for jj in range(clo, chi):
                    n_mat[ii][jj] = factor[ii - lo][jj - clo]
            for row in range(g.n):
                for jj in range(clo, chi):
                    acc = work[row][jj]
                    for m in range(lo, hi):
                        acc = acc - work[row][m] * factor[m - lo][jj - clo]
                    work[row][jj] = acc

    u_m = Matrix(f, tuple(tuple(r) for r in u))
    r_m = Matrix(f, tuple(tuple(r) for r in work))
    n_m = Matrix(f, tuple(tuple(r) for r in n_mat))
    return u_m, r_m, n_m


def levi_project(g: Matrix, blocks: BlockStructure, side: str = "upper") -> Matrix:
    """Block diagonal part of a block triangular matrix.

    Multiplicative on block triangular inputs of the stated side; raises
    NOT_PARABOLIC otherwise.
    """
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    if not blocks.is_block_triangular(g, side):
        raise NotParabolicError(f"matrix is not block {side} triangular")
    return blocks.diagonal_part(g)


# ---------------------------------------------------------------------------
# contraction reports


@dataclass(frozen=True)
class EntryTrace:
    """Per-entry decay data for one strictly-upper entry of a conjugate orbit."""

    row: int
    col: int
    values: tuple        # valuations (exact fields) or magnitudes (real)
    increments: tuple    # consecutive differences (exact) or ratios (real)


@dataclass(frozen=True)
class ContractReport:
    verdict: str                      # "CONVERGES_TO_LEVI" or "NO_CONVERGENCE"
    stationary: bool
    limit: Matrix
    entries: tuple                    # EntryTrace per tracked entry
    imax: int
    threshold_reached: bool

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "stationary": self.stationary,
            "imax": self.imax,
            "threshold_reached": self.threshold_reached,
            "entries": [
                {
                    "row": e.row,
                    "col": e.col,
                    "values": ["inf" if v == INFINITY else v for v in e.values],
                    "increments": list(e.increments),
                }
                for e in self.entries
            ],
        }


def contract_limit(g: Matrix, seq: FundamentalSequence, imax: int) -> ContractReport:
    """Track base^-i g base^i for i = 0..imax on a block upper triangular g.

    Non-archimedean entries must gain valuation by an exact positive
    increment per step; real entries must decay geometrically.  The limit is
    the block diagonal (Levi) part.
    """
    blocks = seq.blocks
    if not blocks.is_block_triangular(g, "upper"):
        raise NotParabolicError("matrix is not block upper triangular")
    f = g.field
    limit = blocks.diagonal_part(g)
    b = blocks.boundaries
    sc = g.entry_scale()

    tracked = []
    for bi in range(blocks.k):
        for bj in range(bi + 1, blocks.k):
            for i in range(b[bi], b[bi + 1]):
                for j in range(b[bj], b[bj + 1]):
                    if not f.is_zero(g.data[i][j], sc):
                        tracked.append((i, j))

    if not tracked:
        return ContractReport(
            verdict="CONVERGES_TO_LEVI", stationary=True, limit=limit,
            entries=(), imax=imax, threshold_reached=True,
        )

    cs = [seq.base.data[r][r] for r in range(g.n)]
    entries = []
    converged = True
    threshold = True
    for (i, j) in tracked:
        vals = []
        for step in range(imax + 1):
            val = g.data[i][j] * (cs[j] / cs[i]) ** step
            if f.is_real:
                vals.append(abs(val))
            else:
                vals.append(f.valuation(val))
        if f.is_real:
            incs = tuple(b2 / b1 for b1, b2 in zip(vals, vals[1:]))
            entry_ok = all(r < 1.0 - 1e-12 for r in incs)
            entry_thresh = vals[-1] <= REAL_LIMIT_TOLERANCE
        else:
            incs = tuple(b2 - b1 for b1, b2 in zip(vals, vals[1:]))
            entry_ok = all(d >= 1 for d in incs)
            entry_thresh = vals[-1] >= VALUATION_THRESHOLD
        converged = converged and entry_ok
        threshold = threshold and entry_thresh
        entries.append(EntryTrace(row=i, col=j, values=tuple(vals), increments=incs))

    return ContractReport(
        verdict="CONVERGES_TO_LEVI" if converged else "NO_CONVERGENCE",
        stationary=False,
        limit=limit,
        entries=tuple(entries),
        imax=imax,
        threshold_reached=threshold,
    )


def contract_unipotent(nseq, seq: FundamentalSequence,
                       v_thresh: int = VALUATION_THRESHOLD,
                       tol: float = REAL_LIMIT_TOLERANCE) -> bool:
    """Does base^-i n_i base^i reach the identity threshold by the last index?

    The list stands for a bounded sequence of block upper unitriangular
    matrices; unboundedness shows up as missing valuation growth and makes
    the check fail.
    """
    blocks = seq.blocks
    if not nseq:
        raise ValueError("empty sequence")
    f = nseq[0].field
    one = f.one()
    for n_i in nseq:
        if not blocks.is_block_triangular(n_i, "upper"):
            raise NotUnipotentError("sequence member is not block upper triangular")
        diag = blocks.diagonal_part(n_i)
        sc = n_i.entry_scale()
        for i in range(n_i.n):
            for j in range(n_i.n):
                target = one if i == j else f.zero()
                if not f.eq(diag.data[i][j], target, sc):
                    raise NotUnipotentError("sequence member is not unitriangular")
    last = len(nseq) - 1
    conj = seq.conjugate_power(nseq[last], last)
    sc = max(conj.entry_scale(), 1.0)
    for i in range(conj.n):
        for j in range(conj.n):
            if i == j:
                continue
            x = conj.data[i][j]
            if f.is_real:
                if abs(x) > tol:
                    return False
            else:
                if f.valuation(x) < v_thresh:
                    return False
    return True


# ---------------------------------------------------------------------------
# explicit degenerations joining opposite parabolic tuples


@dataclass(frozen=True)
class DegenerationTrace:
    """Full record of the conjugation path rho_i joining two tuples.

    ``rho_i(s) = u(s) r(s) (base^-i n'(s) base^i)`` converges to the lower
    tuple while its conjugate by base^i converges to the upper one.
    """

    blocks: BlockStructure
    imax: int
    levi: dict                      # symbol -> Matrix, the shared projection
    verdict_minus: bool
    verdict_plus: bool
    table_minus: dict               # symbol -> tuple of EntryTrace
    table_plus: dict
    big_cell_ok: bool
    final: dict                     # symbol -> Matrix, rho_imax
    initial: dict                   # symbol -> Matrix, rho_0

    @property
    def verified(self) -> bool:
        return self.verdict_minus and self.verdict_plus and self.big_cell_ok

    def to_json_dict(self) -> dict:
        def table(t):
            return {
                sym: [
                    {
                        "row": e.row,
                        "col": e.col,
                        "values": ["inf" if v == INFINITY else v for v in e.values],
                    }
                    for e in traces
                ]
                for sym, traces in t.items()
            }

        return {
            "blocks": list(self.blocks.sizes),
            "imax": self.imax,
            "verdict": self.verified,
            "toward_lower": table(self.table_minus),
            "toward_upper": table(self.table_plus),
            "big_cell_ok": self.big_cell_ok,
        }


def _difference_traces(field: Field, mats, target: Matrix):
    """Valuation (or magnitude) traces of mats[i] - target, per entry."""
    n = target.n
    traces = []
    sc = max([target.entry_scale()] + [m.entry_scale() for m in mats]) if field.is_real else 1.0
    for i in range(n):
        for j in range(n):
            vals = []
            nonconstant = False
            for m in mats:
                d = m.data[i][j] - target.data[i][j]
                if field.is_real:
                    vals.append(abs(d))
                    nonconstant = nonconstant or abs(d) > 1e-15 * max(1.0, sc)
                else:
                    v = field.valuation(d)
                    vals.append(v)
                    nonconstant = nonconstant or v != INFINITY
            if nonconstant:
                traces.append(EntryTrace(row=i, col=j, values=tuple(vals), increments=()))
    return tuple(traces)


def _trace_converges(field: Field, traces) -> bool:
    """Linear valuation growth (exact) or geometric decay (real), per entry.

    Multi-term entries can hit a valuation crossing where ultrametric
    cancellation bumps one value above the envelope, so single steps of
    increment zero are tolerated as long as the values never decrease, the
    average slope is at least one, and the final step is strict.
    """
    for e in traces:
        if field.is_real:
            # geometric decay: strictly decreasing once nonzero, tiny at the end
            nz = [v for v in e.values if v > 0.0]
            if nz and (e.values[-1] > REAL_LIMIT_TOLERANCE * 10 or
                       any(b >= a for a, b in zip(nz, nz[1:]))):
                return False
        else:
            finite = [(idx, v) for idx, v in enumerate(e.values) if v != INFINITY]
            if len(finite) >= 2:
                if any(v2 < v1 for (_, v1), (_, v2) in zip(finite, finite[1:])):
                    return False
                (i0, v0), (i1, v1) = finite[0], finite[-1]
                if v1 - v0 < i1 - i0:
                    return False
                (ip, vp), (iq, vq) = finite[-2], finite[-1]
                if (vq - vp) / (iq - ip) < 1:
                    return False
    return True


def build_neighbors(rho_minus: Representation, rho_plus: Representation,
                    blocks: BlockStructure, seq: FundamentalSequence,
                    imax: int) -> DegenerationTrace:
    """Join a lower and an upper block triangular tuple with equal Levi parts.

    Constructs rho_i(s) = u(s) r(s) (base^-i n'(s) base^i) and verifies that
    rho_i tends to the lower tuple while base^i rho_i base^-i tends to the
    upper one, recording per-entry decay tables for both limits.
    """
    f = rho_minus.field
    if rho_plus.field != f or rho_plus.n != rho_minus.n:
        raise LeviMismatchError("tuples live in different spaces")
    if rho_minus.symbols != rho_plus.symbols:
        raise LeviMismatchError("generator symbol sets differ")
    us, rs, ns = {}, {}, {}
    for s in rho_minus.symbols:
        gm, gp = rho_minus.gens[s], rho_plus.gens[s]
        if not blocks.is_block_triangular(gm, "lower"):
            raise NotParabolicError(f"generator {s!r} of the first tuple is not block lower triangular")
        if not blocks.is_block_triangular(gp, "upper"):
            raise NotParabolicError(f"generator {s!r} of the second tuple is not block upper triangular")
        r_minus = blocks.diagonal_part(gm)
        r_plus = blocks.diagonal_part(gp)
        if r_minus != r_plus:
            raise LeviMismatchError(f"Levi projections differ on generator {s!r}")
        rs[s] = r_minus
        rinv = r_minus.inv()
        us[s] = gm * rinv
        ns[s] = rinv * gp

    symbols = rho_minus.symbols
    path = {s: [] for s in symbols}
    conj_path = {s: [] for s in symbols}
    big_cell_ok = True
    for i in range(imax + 1):
        for s in symbols:
            rho_i = us[s] * rs[s] * seq.conjugate_power(ns[s], i)
            path[s].append(rho_i)
            conj_path[s].append(seq.conjugate_power(rho_i, -i))
            # leading principal blocks stay invertible along the path
            b = blocks.boundaries
            for bj in range(1, blocks.k + 1):
                top = Matrix(f, tuple(
                    tuple(rho_i.data[r][c] for c in range(b[bj]))
                    for r in range(b[bj])
                ))
                if f.is_zero(top.det(), top.entry_scale()):
                    big_cell_ok = False

    table_minus = {
        s: _difference_traces(f, path[s], rho_minus.gens[s]) for s in symbols
    }
    table_plus = {
        s: _difference_traces(f, conj_path[s], rho_plus.gens[s]) for s in symbols
    }
    verdict_minus = all(_trace_converges(f, t) for t in table_minus.values())
    verdict_plus = all(_trace_converges(f, t) for t in table_plus.values())
    return DegenerationTrace(
        blocks=blocks,
        imax=imax,
        levi=rs,
        verdict_minus=verdict_minus,
        verdict_plus=verdict_plus,
        table_minus=table_minus,
        table_plus=table_plus,
        big_cell_ok=big_cell_ok,
        final={s: path[s][-1] for s in symbols},
        initial={s: path[s][0] for s in symbols},
    )
