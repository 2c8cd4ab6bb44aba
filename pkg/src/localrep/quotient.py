"""Separated quotient layer: classes of completely reducible tuples.

Every conjugation orbit closure contains exactly one completely reducible
orbit; projecting onto it and comparing the projections decides whether two
tuples become equal in the largest separated quotient of the conjugation
action.  Word traces give a fast necessary filter and, over the real field,
the minimum displacement gives a continuous separating invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DimensionMismatchError,
    FieldMismatchError,
    GeneratorMismatchError,
    NotRealFieldError,
)
from .reptheory import (
    INCONCLUSIVE,
    Representation,
    are_conjugate_ss,
    fingerprints_match,
    find_invertible_intertwiner,
    semisimplify,
    trace_fingerprint,
)
from . import symspace

FINGERPRINT_LENGTH = 6


@dataclass(frozen=True)
class CrClass:
    """A point of the separated quotient: a cr representative plus invariants.

    ``fingerprint`` holds the traces of all freely reduced words up to the
    configured length in shortlex order; ``lam`` is the minimum displacement
    (real field only).
    """

    canonical: Representation
    fingerprint: tuple
    lam: float | None = None


def project(rho: Representation, word_len: int = FINGERPRINT_LENGTH,
            budget: int = 5000, with_lambda: bool = True) -> CrClass:
    """Semisimplify and package the class invariants."""
    canonical = semisimplify(rho).rho_ss
    fingerprint = trace_fingerprint(canonical, word_len)
    lam = None
    if rho.field.is_real and with_lambda:
        lam = symspace.minimize_displacement(canonical, budget=budget).lambda_est
    return CrClass(canonical=canonical, fingerprint=fingerprint, lam=lam)


def _check_comparable(r1: Representation, r2: Representation):
    if r1.field != r2.field:
        raise FieldMismatchError(f"{r1.field} vs {r2.field}")
    if r1.n != r2.n:
        raise DimensionMismatchError(f"{r1.n} vs {r2.n}")
    if r1.symbols != r2.symbols:
        raise GeneratorMismatchError("generator symbol sets differ")


def same_point_in_Xcr(r1: Representation, r2: Representation):
    """Do the orbit closures meet, i.e. do both project to the same class?

    Returns True, False or INCONCLUSIVE (propagated from the intertwiner
    sweep).  Fingerprints are compared first as a necessary filter.
    """
    _check_comparable(r1, r2)
    c1 = project(r1, with_lambda=False)
    c2 = project(r2, with_lambda=False)
    if not fingerprints_match(r1.field, c1.fingerprint, c2.fingerprint):
        return False
    return are_conjugate_ss(c1.canonical, c2.canonical, check_cr=False)


@dataclass(frozen=True)
class SeparationResult:
    """Pairwise separation table over a finite family."""

    matrix: tuple                 # rows of True / False / INCONCLUSIVE
    lambdas: tuple                # per-member lambda (real field) or None
    evidence: dict                # (i, j) -> short description of the verdict
    transitive: bool
    symmetric: bool

    def to_json_dict(self) -> dict:
        def cell(v):
            return "inconclusive" if v is INCONCLUSIVE else bool(v)

        return {
            "matrix": [[cell(v) for v in row] for row in self.matrix],
            "lambda": None if self.lambdas is None else list(self.lambdas),
            "evidence": {f"{i},{j}": e for (i, j), e in sorted(self.evidence.items())},
            "transitive": self.transitive,
            "symmetric": self.symmetric,
        }


def separation_experiment(family, budget: int = 5000) -> SeparationResult:
    """Pairwise same-class table, with evidence and consistency checks.

    Classes are computed once per member; each pair records either the index
    of the first fingerprint disagreement or the conjugator found.  The
    boolean table is checked for symmetry and transitivity.
    """
    family = list(family)
    if not family:
        raise ValueError("empty family")
    for other in family[1:]:
        _check_comparable(family[0], other)
    field = family[0].field
    classes = [project(rho, budget=budget, with_lambda=field.is_real) for rho in family]
    n = len(family)
    matrix = [[True] * n for _ in range(n)]
    evidence = {}
    for i in range(n):
        for j in range(i + 1, n):
            ci, cj = classes[i], classes[j]
            verdict = None
            if not fingerprints_match(field, ci.fingerprint, cj.fingerprint):
                k = next(
                    idx for idx, (a, b) in enumerate(zip(ci.fingerprint, cj.fingerprint))
                    if not fingerprints_match(field, (a,), (b,))
                )
                verdict = False
                evidence[(i, j)] = f"fingerprint mismatch at word index {k}"
            else:
                conj, dim_hom = find_invertible_intertwiner(ci.canonical, cj.canonical)
                if conj is not None:
                    verdict = True
                    evidence[(i, j)] = "conjugator found"
                elif dim_hom == 0:
                    verdict = False
                    evidence[(i, j)] = "no intertwiner"
                else:
                    verdict = INCONCLUSIVE
                    evidence[(i, j)] = "intertwiner sweep inconclusive"
            matrix[i][j] = verdict
            matrix[j][i] = verdict
    transitive = True
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if matrix[i][j] is True and matrix[j][k] is True:
                    transitive = transitive and matrix[i][k] is True
    lambdas = tuple(c.lam for c in classes) if field.is_real else None
    return SeparationResult(
        matrix=tuple(tuple(row) for row in matrix),
        lambdas=lambdas,
        evidence=evidence,
        transitive=transitive,
        symmetric=True,
    )


def lambda_class_invariant(rho: Representation, budget: int = 5000) -> float:
    """Minimum displacement of the projected class (a class function)."""
    if not rho.field.is_real:
        raise NotRealFieldError("the displacement invariant needs the real field")
    return symspace.minimize_displacement(
        project(rho, with_lambda=False).canonical, budget=budget
    ).lambda_est
