"""Scalar arithmetic for the three supported local-field models.

A field element is an ordinary Python value whose meaning is fixed by a
:class:`Field` descriptor:

* ``real``      -- ``float`` with the archimedean absolute value,
* ``padic``     -- ``fractions.Fraction`` carrying the p-adic valuation
                   (exact rationals in lowest terms, so no precision loss),
* ``funcfield`` -- :class:`FpRat`, a reduced ratio of polynomials over the
                   prime field F_p in one indeterminate T, with the T-adic
                   valuation.

The non-archimedean absolute value is normalised as |x| = p^(-v(x)).  The
valuation of zero is the distinguished value ``INFINITY`` (``math.inf``),
never a large integer.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import FieldMismatchError, ParseError, RealHasNoValuation

INFINITY = math.inf

#: pivot / singularity tolerance for real matrices, relative to the largest
#: absolute entry
REAL_TOLERANCE = 1e-9


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# polynomials and rational functions over F_p


class FpPoly:
    """Dense polynomial over F_p, coefficients ascending, no trailing zeros."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs, _trusted: bool = False):
        if _trusted:
            self.p = p
            self.coeffs = coeffs
            return
        cs = [c % p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.p = p
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, p: int, c: int) -> "FpPoly":
        return cls(p, (c,))

    @classmethod
    def t_power(cls, p: int, k: int, c: int = 1) -> "FpPoly":
        return cls(p, (0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def order(self):
        """Index of the lowest nonzero coefficient (ord_T); INFINITY for 0."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return INFINITY

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def _check(self, other: "FpPoly"):
        if self.p != other.p:
            raise FieldMismatchError("polynomials over different primes")

    def __add__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % self.p
        return FpPoly(self.p, out)

    def __neg__(self) -> "FpPoly":
        return FpPoly(self.p, tuple((-c) % self.p for c in self.coeffs), _trusted=True)

    def __sub__(self, other: "FpPoly") -> "FpPoly":
        return self + (-other)

    def __mul__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        if self.is_zero() or other.is_zero():
            return FpPoly(self.p, ())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = (out[i + j] + a * b) % self.p
        return FpPoly(self.p, out)

    def scale(self, c: int) -> "FpPoly":
        c %= self.p
        if c == 0:
            return FpPoly(self.p, ())
        return FpPoly(self.p, tuple((c * a) % self.p for a in self.coeffs), _trusted=True)

    def divmod(self, other: "FpPoly"):
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        inv_lead = pow(other.leading(), -1, p)
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return FpPoly(p, ()), self
        quo = [0] * (dq + 1)
        for k in range(dq, -1, -1):
            top = rem[k + len(other.coeffs) - 1]
            if top:
                q = (top * inv_lead) % p
                quo[k] = q
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = (rem[k + j] - q * b) % p
        return FpPoly(p, quo), FpPoly(p, rem)

    def __mod__(self, other: "FpPoly") -> "FpPoly":
        return self.divmod(other)[1]

    @staticmethod
    def gcd(a: "FpPoly", b: "FpPoly") -> "FpPoly":
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a.scale(pow(a.leading(), -1, a.p))  # monic

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FpPoly)
            and self.p == other.p
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append("T" if c == 1 else f"{c}*T")
            else:
                terms.append(f"T^{k}" if c == 1 else f"{c}*T^{k}")
        return "+".join(terms)

    def __repr__(self) -> str:
        return f"FpPoly(p={self.p}, {self!s})"


_TERM_RE = re.compile(r"^(\d+)?(?:\*?(T)(?:\^(\d+))?)?$")


def _parse_poly(p: int, text: str) -> FpPoly:
    text = text.replace(" ", "")
    if not text:
        raise ParseError("empty polynomial")
    # split into signed terms
    chunks = re.findall(r"[+-]?[^+-]+", text)
    result = FpPoly(p, ())
    for chunk in chunks:
        sign = 1
        if chunk[0] in "+-":
            sign = -1 if chunk[0] == "-" else 1
            chunk = chunk[1:]
        m = _TERM_RE.match(chunk)
        if not m or (m.group(1) is None and m.group(2) is None):
            raise ParseError(f"bad polynomial term {chunk!r}")
        coeff = int(m.group(1)) if m.group(1) is not None else 1
        if m.group(2) is None:
            k = 0
        else:
            k = int(m.group(3)) if m.group(3) is not None else 1
        result = result + FpPoly.t_power(p, k, sign * coeff)
    return result


class FpRat:
    """Reduced fraction of F_p[T] polynomials with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: FpPoly, den: FpPoly | None = None, _trusted: bool = False):
        if _trusted:
            self.num = num
            self.den = den
            return
        if den is None:
            den = FpPoly.const(num.p, 1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = FpPoly.gcd(num, den)
        if not g.is_zero():
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
        lead_inv = pow(den.leading(), -1, den.p)
        self.num = num.scale(lead_inv)
        self.den = den.scale(lead_inv)

    @classmethod
    def from_int(cls, p: int, k: int) -> "FpRat":
        return cls(FpPoly.const(p, k))

    @property
    def p(self) -> int:
        return self.num.p

    def is_zero(self) -> bool:
        return self.num.is_zero()

    @property
    def valuation(self):
        if self.num.is_zero():
            return INFINITY
        return self.num.order - self.den.order

    def __add__(self, other: "FpRat") -> "FpRat":
        return FpRat(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "FpRat") -> "FpRat":
        return FpRat(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> "FpRat":
        return FpRat(-self.num, self.den, _trusted=True)

    def __mul__(self, other: "FpRat") -> "FpRat":
        return FpRat(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "FpRat") -> "FpRat":
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return FpRat(self.num * other.den, self.den * other.num)

    def __pow__(self, k: int) -> "FpRat":
        if k < 0:
            return FpRat.from_int(self.p, 1) / self ** (-k)
        out = FpRat.from_int(self.p, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = FpRat.from_int(self.p, other)
        return (
            isinstance(other, FpRat)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.den == FpPoly.const(self.p, 1):
            return str(self.num)
        return f"{self.num}/{self.den}"

    def __repr__(self) -> str:
        return f"FpRat(p={self.p}, {self!s})"


# ---------------------------------------------------------------------------
# field descriptors


@dataclass(frozen=True)
class Field:
    """Descriptor fixing which of the three scalar models is in use."""

    kind: str  # "real" | "padic" | "funcfield"
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("real", "padic", "funcfield"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "real":
            if self.p is not None:
                raise ValueError("real field takes no prime")
        else:
            if self.p is None or not _is_prime(self.p):
                raise ValueError(f"{self.kind} field needs a prime, got {self.p!r}")

    @classmethod
    def real(cls) -> "Field":
        return cls("real")

    @classmethod
    def padic(cls, p: int) -> "Field":
        return cls("padic", p)

    @classmethod
    def funcfield(cls, p: int) -> "Field":
        return cls("funcfield", p)

    @property
    def is_exact(self) -> bool:
        return self.kind != "real"

    @property
    def is_real(self) -> bool:
        return self.kind == "real"

    # -- element construction ------------------------------------------------

    def zero(self):
        if self.kind == "real":
            return 0.0
        if self.kind == "padic":
            return Fraction(0)
        return FpRat.from_int(self.p, 0)

    def one(self):
        if self.kind == "real":
            return 1.0
        if self.kind == "padic":
            return Fraction(1)
        return FpRat.from_int(self.p, 1)

    def coerce(self, x):
        """Convert ints, strings and native values into this field."""
        if self.kind == "real":
            if isinstance(x, str):
                try:
                    return float(Fraction(x)) if "/" in x else float(x)
                except ValueError as exc:
                    raise ParseError(f"bad real literal {x!r}") from exc
            return float(x)
        if self.kind == "padic":
            if isinstance(x, Fraction):
                return x
            if isinstance(x, int):
                return Fraction(x)
            if isinstance(x, str):
                try:
                    return Fraction(x)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ParseError(f"bad rational literal {x!r}") from exc
            raise TypeError(f"cannot coerce {type(x).__name__} into {self}")
        # funcfield
        if isinstance(x, FpRat):
            if x.p != self.p:
                raise FieldMismatchError("rational function over a different prime")
            return x
        if isinstance(x, FpPoly):
            return FpRat(x)
        if isinstance(x, int):
            return FpRat.from_int(self.p, x)
        if isinstance(x, str):
            parts = x.split("/")
            if len(parts) == 1:
                return FpRat(_parse_poly(self.p, parts[0]))
            if len(parts) == 2:
                return FpRat(_parse_poly(self.p, parts[0]), _parse_poly(self.p, parts[1]))
            raise ParseError(f"bad rational-function literal {x!r}")
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    # -- predicates and structure -------------------------------------------

    def is_zero(self, x, scale: float = 1.0) -> bool:
        if self.kind == "real":
            return abs(x) <= REAL_TOLERANCE * max(1.0, scale)
        if self.kind == "padic":
            return x == 0
        return x.is_zero()

    def eq(self, x, y, scale: float = 1.0) -> bool:
        if self.kind == "real":
            return abs(x - y) <= REAL_TOLERANCE * max(1.0, scale)
        return x == y

    def valuation(self, x):
        """p-adic (resp. T-adic) valuation; INFINITY for zero."""
        if self.kind == "real":
            raise RealHasNoValuation("the archimedean field has no discrete valuation")
        if self.kind == "padic":
            if x == 0:
                return INFINITY
            v = 0
            num, den = x.numerator, x.denominator
            while num % self.p == 0:
                num //= self.p
                v += 1
            while den % self.p == 0:
                den //= self.p
                v -= 1
            return v
        return x.valuation

    def abs_value(self, x) -> float:
        if self.kind == "real":
            return abs(x)
        v = self.valuation(x)
        if v is INFINITY or v == INFINITY:
            return 0.0
        return float(self.p) ** (-v)

    def uniformizer(self):
        """An element of valuation exactly 1 (p, resp. T)."""
        if self.kind == "real":
            raise RealHasNoValuation("no uniformizer in the archimedean field")
        if self.kind == "padic":
            return Fraction(self.p)
        return FpRat(FpPoly.t_power(self.p, 1))

    # -- text encoding --------------------------------------------------------

    def parse(self, text: str):
        return self.coerce(text)

    def format(self, x) -> str:
        if self.kind == "real":
            return repr(float(x))
        return str(x)

    def to_json(self) -> dict:
        if self.kind == "real":
            return {"type": "real"}
        return {"type": self.kind, "p": self.p}

    @classmethod
    def from_json(cls, obj: dict) -> "Field":
        kind = obj.get("type")
        if kind == "real":
            return cls.real()
        if kind in ("padic", "funcfield"):
            return cls(kind, obj.get("p"))
        raise ParseError(f"unknown field descriptor {obj!r}")

    def __str__(self) -> str:
        if self.kind == "real":
            return "R"
        if self.kind == "padic":
            return f"Q(p={self.p})"
        return f"F{self.p}(T)"


def valuation(field: Field, x):
    """Module-level convenience wrapper around :meth:`Field.valuation`."""
    return field.valuation(x)
