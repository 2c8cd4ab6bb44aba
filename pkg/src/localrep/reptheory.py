"""Module-theoretic core for tuples of invertible matrices.

A representation of the free group on a finite symbol set S is stored as an
ordered map from symbols to invertible matrices over one field.  This module
decides irreducibility (no proper nonzero invariant subspace), complete
reducibility (the module is a direct sum of irreducibles), computes a full
composition series and the associated semisimplification, and tests
simultaneous conjugacy of semisimple tuples.

Every negative verdict is certified: routines that report a reducible module
return an invariant flag whose invariance is re-verified exactly before it is
handed out.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DimensionMismatchError,
    FieldMismatchError,
    GeneratorMismatchError,
    NotCrError,
    NotInvariantError,
)
from .fields import Field
from .linalg import Matrix, rref, solve_linear

PROBE_SEED = 0x5EED
INTERTWINER_RANDOM_TRIALS = 64

_active_seed = contextvars.ContextVar("localrep_probe_seed", default=PROBE_SEED)


@contextlib.contextmanager
def probe_seed(seed: int):
    """Scope a different seed for the deterministic probe batches."""
    token = _active_seed.set(seed)
    try:
        yield
    finally:
        _active_seed.reset(token)


class _Inconclusive:
    """Tri-state marker for conjugacy tests that could not be settled."""

    __slots__ = ()

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "INCONCLUSIVE"


INCONCLUSIVE = _Inconclusive()


class Representation:
    """A finite tuple of invertible n x n matrices over one field."""

    __slots__ = ("field", "n", "gens", "_inverses")

    def __init__(self, field: Field, gens: dict):
        if not gens:
            raise ValueError("a representation needs at least one generator")
        mats = {}
        n = None
        for sym, m in gens.items():
            if not isinstance(m, Matrix):
                raise TypeError(f"generator {sym!r} is not a Matrix")
            if m.field != field:
                raise FieldMismatchError(f"generator {sym!r} lives in {m.field}")
            if n is None:
                n = m.n
            elif m.n != n:
                raise DimensionMismatchError("generators of mixed sizes")
            if field.is_zero(m.det(), m.entry_scale()):
                raise ValueError(f"generator {sym!r} is singular")
            mats[sym] = m
        self.field = field
        self.n = n
        self.gens = mats
        self._inverses = None

    @classmethod
    def from_entries(cls, field: Field, gens: dict) -> "Representation":
        return cls(field, {s: Matrix.from_rows(field, rows) for s, rows in gens.items()})

    @property
    def symbols(self) -> tuple:
        return tuple(self.gens)

    def inverses(self) -> dict:
        if self._inverses is None:
            self._inverses = {s: m.inv() for s, m in self.gens.items()}
        return self._inverses

    def conjugate_by(self, h: Matrix) -> "Representation":
        hinv = h.inv()
        return Representation(self.field, {s: hinv * m * h for s, m in self.gens.items()})

    def dual(self) -> "Representation":
        return Representation(self.field, {s: m.transpose() for s, m in self.inverses().items()})

    def word_image(self, word) -> Matrix:
        """Image of a word given as a sequence of (symbol, +1|-1) letters."""
        out = Matrix.identity(self.field, self.n)
        inv = self.inverses()
        for sym, exp in word:
            out = out * (self.gens[sym] if exp > 0 else inv[sym])
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Representation):
            return NotImplemented
        return (
            self.field == other.field
            and self.n == other.n
            and self.symbols == other.symbols
            and all(self.gens[s] == other.gens[s] for s in self.gens)
        )

    def __repr__(self) -> str:
        return f"Representation({self.field}, n={self.n}, S={list(self.symbols)})"


@dataclass(frozen=True)
class InvariantFlag:
    """Basis change exhibiting a common block upper triangular shape.

    The columns of ``basis_change`` list an adapted basis: the first
    ``block_sizes[0]`` columns span an invariant subspace, the first
    ``block_sizes[0] + block_sizes[1]`` the next step, and so on.
    """

    basis_change: Matrix
    block_sizes: tuple

    def verify(self, rho: Representation) -> bool:
        hinv = self.basis_change.inv()
        bounds = _boundaries(self.block_sizes)
        for m in rho.gens.values():
            t = hinv * m * self.basis_change
            sc = t.entry_scale()
            for lo, hi in zip(bounds, bounds[1:]):
                for i in range(hi, rho.n):
                    for j in range(lo, hi):
                        if not rho.field.is_zero(t.data[i][j], sc):
                            return False
        return True

    def prefix_subspace(self, steps: int) -> tuple:
        """Canonical row basis of the invariant subspace after ``steps`` blocks."""
        k = sum(self.block_sizes[:steps])
        cols = [self.basis_change.column(j) for j in range(k)]
        return _canonical_rows(self.basis_change.field, cols)


@dataclass(frozen=True)
class Semisimplification:
    """A composition series together with its block-diagonal reduction."""

    flag: InvariantFlag
    rho_ss: Representation


def _boundaries(sizes) -> tuple:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return tuple(out)


# ---------------------------------------------------------------------------
# incremental span with exact (or tolerance) membership


class _Span:
    __slots__ = ("field", "dim", "rows", "scale")

    def __init__(self, field: Field, ambient: int):
        self.field = field
        self.dim = ambient
        self.rows = []  # list of (vector, pivot index), forward-eliminated
        self.scale = 1.0

    def reduce(self, vec):
        vec = list(vec)
        for row, piv in self.rows:
            c = vec[piv]
            if not self.field.is_zero(c, self.scale):
                vec = [a - c * b for a, b in zip(vec, row)]
        return vec

    def _pivot(self, vec):
        f = self.field
        if f.is_real:
            best, best_val = None, 1e-9 * max(1.0, self.scale)
            for i, x in enumerate(vec):
                if abs(x) > best_val:
                    best, best_val = i, abs(x)
            return best
        for i, x in enumerate(vec):
            if not f.is_zero(x):
                return i
        return None

    def insert(self, vec) -> bool:
        """Reduce ``vec`` and insert the residual; True if it was new."""
        if self.field.is_real:
            self.scale = max(self.scale, max((abs(x) for x in vec), default=0.0))
        res = self.reduce(vec)
        piv = self._pivot(res)
        if piv is None:
            return False
        inv = (1.0 / res[piv]) if self.field.is_real else (self.field.one() / res[piv])
        res = [x * inv for x in res]
        self.rows.append((res, piv))
        return True

    def contains(self, vec) -> bool:
        return self._pivot(self.reduce(vec)) is None

    @property
    def rank(self) -> int:
        return len(self.rows)

    def basis_rows(self) -> tuple:
        return tuple(tuple(r) for r, _ in self.rows)


def _canonical_rows(field: Field, rows) -> tuple:
    """Deterministic RREF basis of the row span, zero rows dropped."""
    if not rows:
        return ()
    res = rref(field, rows)
    out = []
    sc = max((abs(x) for r in rows for x in r), default=0.0) if field.is_real else 1.0
    for row in res.reduced:
        if any(not field.is_zero(x, sc) for x in row):
            out.append(tuple(row))
    return tuple(out)


def spin(rho: Representation, vec) -> tuple:
    """Canonical basis of the smallest invariant subspace containing ``vec``.

    Closure under every generator and generator inverse, with membership
    decided by echelon reduction.
    """
    vec = tuple(rho.field.coerce(x) for x in vec)
    if all(rho.field.is_zero(x) for x in vec):
        raise ValueError("spin needs a nonzero vector")
    mats = list(rho.gens.values()) + list(rho.inverses().values())
    span = _Span(rho.field, rho.n)
    span.insert(vec)
    queue = [vec]
    while queue and span.rank < rho.n:
        u = queue.pop(0)
        for m in mats:
            w = m.apply(u)
            if span.insert(w):
                queue.append(w)
            if span.rank == rho.n:
                break
    return _canonical_rows(rho.field, span.basis_rows())


def _is_invariant(rho: Representation, rows) -> bool:
    span = _Span(rho.field, rho.n)
    for r in rows:
        span.insert(r)
    for m in rho.gens.values():
        for r in rows:
            if not span.contains(m.apply(r)):
                return False
    return True


def _coords_in_rref_basis(field: Field, basis_rows, vec):
    """Coordinates of ``vec`` in an RREF row basis (pivot-read trick)."""
    pivots = []
    for row in basis_rows:
        for i, x in enumerate(row):
            if not field.is_zero(x):
                pivots.append(i)
                break
    coords = tuple(vec[p] for p in pivots)
    # consistency: vec must reduce to zero against the basis
    residual = list(vec)
    for c, row in zip(coords, basis_rows):
        residual = [a - c * b for a, b in zip(residual, row)]
    sc = max((abs(x) for x in vec), default=1.0) if field.is_real else 1.0
    if any(not field.is_zero(x, sc) for x in residual):
        raise NotInvariantError("vector outside the subspace")
    return coords


def restrict_to_subspace(rho: Representation, rows) -> Representation:
    """Action of the generators on an invariant subspace, in the given basis."""
    field = rho.field
    gens = {}
    for s, m in rho.gens.items():
        cols = [_coords_in_rref_basis(field, rows, m.apply(r)) for r in rows]
        # cols[i] are coordinates of image of basis vector i: assemble columns
        k = len(rows)
        gens[s] = Matrix(field, tuple(
            tuple(cols[j][i] for j in range(k)) for i in range(k)
        ))
    return Representation(field, gens)


def _adapted_basis_matrix(field: Field, rows, n: int) -> Matrix:
    """Invertible matrix whose first columns are the given basis rows.

    The completion uses the standard basis vectors at the non-pivot
    coordinates of the RREF basis, which keeps everything exact and
    deterministic.
    """
    pivots = set()
    for row in rows:
        for i, x in enumerate(row):
            if not field.is_zero(x):
                pivots.add(i)
                break
    free = [i for i in range(n) if i not in pivots]
    cols = [tuple(r) for r in rows]
    one, zero = field.one(), field.zero()
    for i in free:
        cols.append(tuple(one if j == i else zero for j in range(n)))
    return Matrix(field, tuple(
        tuple(cols[j][i] for j in range(len(cols))) for i in range(n)
    ))


def quotient_representation(rho: Representation, rows):
    """Quotient action on V / span(rows).

    Returns ``(rep, basis)`` where ``basis`` is the adapted change of basis
    whose first columns span the subspace; the quotient matrices are the
    bottom-right blocks of the conjugated generators.
    """
    k = len(rows)
    basis = _adapted_basis_matrix(rho.field, rows, rho.n)
    binv = basis.inv()
    gens = {}
    for s, m in rho.gens.items():
        t = binv * m * basis
        gens[s] = Matrix(rho.field, tuple(
            tuple(t.data[i][j] for j in range(k, rho.n)) for i in range(k, rho.n)
        ))
    return Representation(rho.field, gens), basis


# ---------------------------------------------------------------------------
# invariant-subspace search


def _probe_vectors(rho: Representation):
    n = rho.n
    one, zero = rho.field.one(), rho.field.zero()
    probes = [tuple(one if j == i else zero for j in range(n)) for i in range(n)]
    rng = random.Random(_active_seed.get())
    for _ in range(2 * n):
        raw = [rng.randint(-3, 3) for _ in range(n)]
        vec = tuple(rho.field.coerce(c) for c in raw)
        # entries can collapse to zero after reduction mod p
        if any(not rho.field.is_zero(x) for x in vec):
            probes.append(vec)
    return probes


def _annihilator(field: Field, rows) -> tuple:
    """Row basis of the space annihilated by every functional in ``rows``."""
    res = rref(field, rows)
    return _canonical_rows(field, res.kernel) if res.kernel else ()


def _intersect_row_spans(field: Field, rows1, rows2) -> tuple:
    n = len(rows1[0])
    k1, k2 = len(rows1), len(rows2)
    # columns are the stacked transposed bases; kernel gives the coefficients
    stacked = [
        tuple(rows1[a][i] for a in range(k1)) + tuple(-rows2[b][i] for b in range(k2))
        for i in range(n)
    ]
    res = rref(field, stacked)
    vecs = []
    for coeffs in res.kernel:
        vec = [field.zero()] * n
        for a in range(k1):
            c = coeffs[a]
            vec = [x + c * y for x, y in zip(vec, rows1[a])]
        vecs.append(tuple(vec))
    return _canonical_rows(field, vecs)


def word_algebra_basis(rho: Representation, cap: int | None = None):
    """Echelon basis of the span of all word images inside n x n matrices."""
    n = rho.n
    cap = n * n if cap is None else cap
    span = _Span(rho.field, n * n)
    basis = []
    queue = []
    seeds = [Matrix.identity(rho.field, n)] + list(rho.gens.values()) + list(rho.inverses().values())
    for m in seeds:
        flat = tuple(x for row in m.data for x in row)
        if span.insert(flat):
            basis.append(m)
            queue.append(m)
    letters = list(rho.gens.values()) + list(rho.inverses().values())
    while queue and span.rank < cap:
        m = queue.pop(0)
        for g in letters:
            prod = g * m
            flat = tuple(x for row in prod.data for x in row)
            if span.insert(flat):
                basis.append(prod)
                queue.append(prod)
            if span.rank >= cap:
                break
    return basis


def commutant_basis(rho: Representation):
    """Basis of matrices commuting with every generator."""
    n = rho.n
    field = rho.field
    rows = []
    for m in rho.gens.values():
        for i in range(n):
            for j in range(n):
                row = [field.zero()] * (n * n)
                # (X m - m X)_{ij} = sum_l X_il m_lj - sum_k m_ik X_kj
                for l in range(n):
                    row[i * n + l] = row[i * n + l] + m.data[l][j]
                for k in range(n):
                    row[k * n + j] = row[k * n + j] - m.data[i][k]
                rows.append(row)
    res = rref(field, rows)
    out = []
    for vec in res.kernel:
        out.append(Matrix(field, tuple(
            tuple(vec[i * n + j] for j in range(n)) for i in range(n)
        )))
    return out


def _is_scalar(field: Field, m: Matrix) -> bool:
    sc = m.entry_scale()
    d = m.data[0][0]
    for i in range(m.n):
        for j in range(m.n):
            target = d if i == j else field.zero()
            if not field.eq(m.data[i][j], target, sc):
                return False
    return True


def _kernel_rows(field: Field, m: Matrix) -> tuple:
    res = rref(field, m.data)
    return _canonical_rows(field, res.kernel) if res.kernel else ()


def _rational_eigenvalues(m: Matrix):
    """All eigenvalues of a rational matrix that lie in Q (exact)."""
    from math import gcd

    n = m.n
    ident = Matrix.identity(m.field, n)
    # Faddeev-LeVerrier characteristic polynomial (valid in characteristic 0)
    mk = ident
    cs = []
    for k in range(1, n + 1):
        mk = m * mk
        c = -mk.trace() / k
        cs.append(c)
        mk = mk + ident.scale(c)
    poly = [Fraction(1)] + cs  # x^n + c1 x^(n-1) + ... + cn

    denom = 1
    for co in poly:
        denom = denom * co.denominator // gcd(denom, co.denominator)
    ints = [int(co * denom) for co in poly]
    if ints[-1] == 0:
        yield Fraction(0)
        while ints and ints[-1] == 0:
            ints.pop()
        if len(ints) < 2:
            return
    lead, const = ints[0], ints[-1]

    def divisors(v):
        v = abs(v)
        out = set()
        d = 1
        while d * d <= v:
            if v % d == 0:
                out.add(d)
                out.add(v // d)
            d += 1
        return sorted(out)

    seen = set()
    for pnum in divisors(const):
        for qden in divisors(lead):
            for sign in (1, -1):
                cand = Fraction(sign * pnum, qden)
                if cand in seen:
                    continue
                seen.add(cand)
                val = Fraction(0)
                for co in poly:
                    val = val * cand + co
                if val == 0:
                    yield cand


def invariant_subspace_candidates(rho: Representation):
    """Yield verified proper nonzero invariant subspaces, cheapest first.

    Layers: spins of standard and seeded probe vectors, the same for the
    dual action (annihilators), pairwise intersections, the subspace moved
    by the trace-form radical of the word algebra, and kernels of singular
    non-scalar elements of the commutant.  Every candidate is re-verified
    before being yielded; unsound intermediate heuristics therefore cannot
    leak wrong answers.
    """
    field = rho.field
    n = rho.n
    found = []

    def check(rows, collect: bool = True):
        rows = _canonical_rows(field, rows)
        if not rows or len(rows) >= n:
            return None
        if any(rows == f for f in found):
            return None
        if not _is_invariant(rho, rows):
            return None
        if collect:
            found.append(rows)
        return rows

    probes = _probe_vectors(rho)
    for v in probes:
        got = check(spin(rho, v))
        if got:
            yield got
    dual = rho.dual()
    for v in probes:
        urows = spin(dual, v)
        if 0 < len(urows) < n:
            got = check(_annihilator(field, urows))
            if got:
                yield got
    for w1, w2 in itertools.combinations(list(found), 2):
        inter = _intersect_row_spans(field, w1, w2)
        if inter:
            got = check(inter)
            if got:
                yield got

    # structural layer: radical of the word algebra via the trace form
    algebra = word_algebra_basis(rho)
    d = len(algebra)
    if d < n * n:
        gram = [[(a * b).trace() for b in algebra] for a in algebra]
        res = rref(field, gram)
        for coeffs in res.kernel:
            jmat = Matrix.zeros(field, n)
            for c, a in zip(coeffs, algebra):
                jmat = jmat + a.scale(c)
            vecs = [jmat.apply(tuple(
                field.one() if j == i else field.zero() for j in range(n)
            )) for i in range(n)]
            got = check(_canonical_rows(field, vecs))
            if got:
                yield got

        comm = commutant_basis(rho)
        nonscalar = [c for c in comm if not _is_scalar(field, c)]
        for c in nonscalar:
            if field.is_zero(c.det(), c.entry_scale()):
                got = check(_kernel_rows(field, c))
                if got:
                    yield got
        if field.kind == "padic":
            for c in nonscalar:
                for lam in _rational_eigenvalues(c):
                    shifted = c - Matrix.identity(field, n).scale(lam)
                    if field.is_zero(shifted.det()):
                        got = check(_kernel_rows(field, shifted))
                        if got:
                            yield got
        grid_basis = nonscalar[:4]
        if grid_basis:
            for coeffs in itertools.product((-1, 0, 1), repeat=len(grid_basis)):
                if not any(coeffs):
                    continue
                cand = Matrix.zeros(field, n)
                for co, c in zip(coeffs, grid_basis):
                    cand = cand + c.scale(co)
                if _is_scalar(field, cand):
                    continue
                if field.is_zero(cand.det(), cand.entry_scale()):
                    got = check(_kernel_rows(field, cand))
                    if got:
                        yield got


def _single_step_flag(rho: Representation, rows) -> InvariantFlag:
    basis = _adapted_basis_matrix(rho.field, rows, rho.n)
    return InvariantFlag(basis_change=basis, block_sizes=(len(rows), rho.n - len(rows)))


def is_nonparabolic(rho: Representation):
    """Decide irreducibility of the linear action.

    Returns ``(True, None)`` when no proper nonzero invariant subspace
    exists, otherwise ``(False, flag)`` with a verified single-step invariant
    flag as certificate.  Absolute irreducibility (word algebra of full
    dimension n^2) short-circuits the search; otherwise the full candidate
    battery must come up empty.
    """
    if rho.n == 1:
        return True, None
    for rows in invariant_subspace_candidates(rho):
        return False, _single_step_flag(rho, rows)
    return True, None


def has_invariant_complement(rho: Representation, rows):
    """Feasibility of an equivariant projector onto the invariant ``rows``.

    Returns ``(True, projector)`` when the subspace splits off, else
    ``(False, None)``.  The projector satisfies ``p g = g p`` for every
    generator ``g``, fixes the subspace pointwise and has image inside it,
    so its kernel is the invariant complement.
    """
    field = rho.field
    rows = _canonical_rows(field, rows)
    if not _is_invariant(rho, rows):
        raise NotInvariantError("subspace is not invariant")
    n, k = rho.n, len(rows)
    if k == n or k == 0:
        return True, Matrix.identity(field, n) if k == n else Matrix.zeros(field, n)
    basis = _adapted_basis_matrix(field, rows, n)
    binv = basis.inv()
    blocks = []
    for m in rho.gens.values():
        t = binv * m * basis
        a = [[t.data[i][j] for j in range(k)] for i in range(k)]
        b = [[t.data[i][j] for j in range(k, n)] for i in range(k)]
        d = [[t.data[i][j] for j in range(k, n)] for i in range(k, n)]
        blocks.append((a, b, d))
    # unknown X (k x (n-k)) with A X - X D = B for every generator
    q = n - k
    sys_rows, rhs = [], []
    for a, b, d in blocks:
        for i in range(k):
            for j in range(q):
                row = [field.zero()] * (k * q)
                for l in range(k):
                    row[l * q + j] = row[l * q + j] + a[i][l]
                for m2 in range(q):
                    row[i * q + m2] = row[i * q + m2] - d[m2][j]
                sys_rows.append(row)
                rhs.append(b[i][j])
    sol = solve_linear(field, sys_rows, rhs)
    if sol is None:
        return False, None
    # projector in the adapted basis: [[I, X], [0, 0]]
    proj_rows = []
    one, zero = field.one(), field.zero()
    for i in range(n):
        row = []
        for j in range(n):
            if i < k and j < k:
                row.append(one if i == j else zero)
            elif i < k:
                row.append(sol[i * q + (j - k)])
            else:
                row.append(zero)
        proj_rows.append(tuple(row))
    proj = basis * Matrix(field, tuple(proj_rows)) * binv
    return True, proj


def is_cr(rho: Representation) -> bool:
    """Complete reducibility: the module splits as a direct sum of irreducibles.

    Recursive splitting test: an irreducible module is completely reducible;
    otherwise a certified invariant subspace must admit an invariant
    complement and both halves must again pass.  Characteristic-free.
    """
    irreducible, flag = is_nonparabolic(rho)
    if irreducible:
        return True
    rows = flag.prefix_subspace(1)
    ok, proj = has_invariant_complement(rho, rows)
    if not ok:
        return False
    sub = restrict_to_subspace(rho, rows)
    comp_rows = _kernel_rows(rho.field, proj)
    comp = restrict_to_subspace(rho, comp_rows)
    return is_cr(sub) and is_cr(comp)


def _minimal_invariant_subspace(rho: Representation):
    """A minimal invariant subspace, or None when the action is irreducible.

    Minimality is enforced by recursing into the restriction until the
    battery finds nothing further.  Ties among probe spins are broken by
    dimension first, then by probe order.
    """
    best = None
    for rows in invariant_subspace_candidates(rho):
        if best is None or len(rows) < len(best):
            best = rows
            if len(best) == 1:
                break
    if best is None:
        return None
    while len(best) > 1:
        sub = restrict_to_subspace(rho, best)
        inner = _minimal_invariant_subspace(sub)
        if inner is None:
            break
        # lift the inner rows through the basis of ``best``
        lifted = []
        for coeffs in inner:
            vec = [rho.field.zero()] * rho.n
            for c, row in zip(coeffs, best):
                vec = [x + c * y for x, y in zip(vec, row)]
            lifted.append(tuple(vec))
        best = _canonical_rows(rho.field, lifted)
    return best


def composition_series(rho: Representation) -> InvariantFlag:
    """A full composition series as an invariant flag.

    Repeatedly extracts a minimal invariant subspace of the current quotient;
    the conjugated generators come out block upper triangular with
    irreducible diagonal blocks.
    """
    field = rho.field
    minimal = _minimal_invariant_subspace(rho)
    if minimal is None:
        return InvariantFlag(Matrix.identity(field, rho.n), (rho.n,))
    k = len(minimal)
    quot, basis = quotient_representation(rho, minimal)
    inner = composition_series(quot)
    # assemble h = basis * blockdiag(I_k, inner.basis_change)
    n = rho.n
    one, zero = field.one(), field.zero()
    blk = [[zero] * n for _ in range(n)]
    for i in range(k):
        blk[i][i] = one
    hin = inner.basis_change
    for i in range(n - k):
        for j in range(n - k):
            blk[k + i][k + j] = hin.data[i][j]
    h = basis * Matrix(field, tuple(tuple(r) for r in blk))
    flag = InvariantFlag(h, (k,) + inner.block_sizes)
    if not flag.verify(rho):
        raise NotInvariantError("composition series failed verification")
    return flag


def semisimplify(rho: Representation) -> Semisimplification:
    """Project onto the block diagonal of a composition series.

    The strictly upper blocks of the conjugated generators are zeroed and
    the result is conjugated back, producing the completely reducible
    representative lying in the closure of the conjugation orbit.
    """
    flag = composition_series(rho)
    h = flag.basis_change
    hinv = h.inv()
    bounds = _boundaries(flag.block_sizes)
    field = rho.field
    gens = {}
    for s, m in rho.gens.items():
        t = hinv * m * h
        rows = [list(r) for r in t.data]
        for bi, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
            for i in range(lo, hi):
                for j in range(hi, rho.n):
                    rows[i][j] = field.zero()
                for j in range(0, lo):
                    rows[i][j] = field.zero()  # clean tolerance residue (real)
        gens[s] = Matrix(field, tuple(tuple(r) for r in rows))
    block_diag = Representation(field, gens)
    rho_ss = block_diag.conjugate_by(hinv)
    return Semisimplification(flag=flag, rho_ss=rho_ss)


# ---------------------------------------------------------------------------
# words, traces, conjugacy


def iter_reduced_words(symbols, max_len: int):
    """Freely reduced words in shortlex order over s, s^-1 for s in symbols."""
    alphabet = []
    for s in symbols:
        alphabet.append((s, 1))
        alphabet.append((s, -1))
    frontier = [((letter,), letter) for letter in alphabet]
    for word, _ in frontier:
        yield word
    for _ in range(max_len - 1):
        nxt = []
        for word, last in frontier:
            for letter in alphabet:
                if letter[0] == last[0] and letter[1] == -last[1]:
                    continue
                nw = word + (letter,)
                nxt.append((nw, letter))
                yield nw
        frontier = nxt


def trace_fingerprint(rho: Representation, max_len: int) -> tuple:
    """Traces of all freely reduced words up to ``max_len``, shortlex order."""
    mats = {}
    for s in rho.symbols:
        mats[(s, 1)] = rho.gens[s]
        mats[(s, -1)] = rho.inverses()[s]
    alphabet = list(mats)
    frontier = [((letter,), mats[letter]) for letter in alphabet]
    traces = [m.trace() for _, m in frontier]
    for _ in range(max_len - 1):
        nxt = []
        for word, m in frontier:
            last = word[-1]
            for letter in alphabet:
                if letter[0] == last[0] and letter[1] == -last[1]:
                    continue
                nm = m * mats[letter]
                nxt.append((word + (letter,), nm))
                traces.append(nm.trace())
        frontier = nxt
    return tuple(traces)


def fingerprints_match(field: Field, fp1, fp2, tol: float = 1e-6) -> bool:
    if len(fp1) != len(fp2):
        return False
    if field.is_real:
        return all(abs(a - b) <= tol * max(1.0, abs(a), abs(b)) for a, b in zip(fp1, fp2))
    return all(a == b for a, b in zip(fp1, fp2))


def intertwiner_space(r1: Representation, r2: Representation):
    """Basis of matrices M with M r1(s) = r2(s) M for every generator."""
    field = r1.field
    n = r1.n
    rows = []
    for s in r1.symbols:
        m1, m2 = r1.gens[s], r2.gens[s]
        for i in range(n):
            for j in range(n):
                row = [field.zero()] * (n * n)
                for l in range(n):
                    row[i * n + l] = row[i * n + l] + m1.data[l][j]
                for kk in range(n):
                    row[kk * n + j] = row[kk * n + j] - m2.data[i][kk]
                rows.append(row)
    res = rref(field, rows)
    return [
        Matrix(field, tuple(tuple(vec[i * n + j] for j in range(n)) for i in range(n)))
        for vec in res.kernel
    ]


def find_invertible_intertwiner(r1: Representation, r2: Representation):
    """An invertible intertwiner, or None when the sweep fails.

    Sweeps the basis elements, small integer combinations (coefficients in
    -2..2) and then a fixed number of seeded random combinations.
    """
    field = r1.field
    basis = intertwiner_space(r1, r2)
    if not basis:
        return None, 0
    candidates = list(basis)
    d = len(basis)
    if 1 < d <= 5:
        for coeffs in itertools.product((-2, -1, 0, 1, 2), repeat=d):
            if not any(coeffs):
                continue
            m = Matrix.zeros(field, r1.n)
            for c, b in zip(coeffs, basis):
                m = m + b.scale(c)
            candidates.append(m)
    rng = random.Random(_active_seed.get())
    for _ in range(INTERTWINER_RANDOM_TRIALS):
        m = Matrix.zeros(field, r1.n)
        for b in basis:
            m = m + b.scale(rng.randint(-9, 9))
        candidates.append(m)
    for m in candidates:
        if not field.is_zero(m.det(), m.entry_scale()):
            return m, d
    return None, d


def are_conjugate_ss(r1: Representation, r2: Representation, check_cr: bool = True):
    """Simultaneous conjugacy of two completely reducible tuples.

    Returns True, False or INCONCLUSIVE.  An explicit invertible intertwiner
    (verified exactly) is the positive verdict and an empty intertwiner
    space the negative one; the trace fingerprint up to word length n^2 is
    the necessary cross-check that settles most remaining cases.
    INCONCLUSIVE is only reported when an intertwiner space exists, the
    fingerprints agree, and the sweep failed to produce an invertible
    element.
    """
    if r1.field != r2.field:
        raise FieldMismatchError(f"{r1.field} vs {r2.field}")
    if r1.n != r2.n:
        raise DimensionMismatchError(f"{r1.n} vs {r2.n}")
    if r1.symbols != r2.symbols:
        raise GeneratorMismatchError("generator symbol sets differ")
    if check_cr and (not is_cr(r1) or not is_cr(r2)):
        raise NotCrError("both inputs must be completely reducible")
    max_len = r1.n * r1.n
    # short fingerprint first: a cheap necessary filter
    short = min(2, max_len)
    if not fingerprints_match(r1.field, trace_fingerprint(r1, short),
                              trace_fingerprint(r2, short)):
        return False
    m, dim_hom = find_invertible_intertwiner(r1, r2)
    if m is not None:
        return True
    if dim_hom == 0:
        return False
    fp1 = trace_fingerprint(r1, max_len)
    fp2 = trace_fingerprint(r2, max_len)
    if not fingerprints_match(r1.field, fp1, fp2):
        return False
    return INCONCLUSIVE
