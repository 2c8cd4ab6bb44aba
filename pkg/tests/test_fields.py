from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localrep import Field, FpPoly, FpRat, INFINITY
from localrep.errors import ParseError, RealHasNoValuation

Q5 = Field.padic(5)
F3 = Field.funcfield(3)
R = Field.real()


class TestValuation:
    def test_padic_examples(self):
        assert Q5.valuation(Fraction(50)) == 2
        assert Q5.valuation(Fraction(3, 25)) == -2
        assert Q5.valuation(Fraction(0)) == INFINITY

    def test_funcfield_examples(self):
        assert F3.valuation(F3.coerce("T")) == 1
        assert F3.valuation(F3.coerce("T^2/T^5")) == -3
        assert F3.valuation(F3.coerce("2")) == 0
        assert F3.valuation(F3.coerce("0")) == INFINITY

    def test_real_has_no_valuation(self):
        with pytest.raises(RealHasNoValuation):
            R.valuation(1.5)

    def test_abs_value(self):
        assert Q5.abs_value(Fraction(50)) == 5.0 ** -2
        assert Q5.abs_value(Fraction(0)) == 0.0
        assert R.abs_value(-2.5) == 2.5


rationals = st.fractions(
    min_value=-10**6, max_value=10**6, max_denominator=10**4
)


class TestValuationIdentities:
    @given(rationals, rationals)
    @settings(max_examples=200, deadline=None)
    def test_multiplicative(self, x, y):
        if x == 0 or y == 0:
            return
        assert Q5.valuation(x * y) == Q5.valuation(x) + Q5.valuation(y)

    @given(rationals, rationals)
    @settings(max_examples=200, deadline=None)
    def test_ultrametric(self, x, y):
        vx, vy = Q5.valuation(x), Q5.valuation(y)
        vsum = Q5.valuation(x + y)
        assert vsum >= min(vx, vy)
        if vx != vy:
            assert vsum == min(vx, vy)

    @given(st.integers(-50, 50), st.integers(-50, 50),
           st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=200, deadline=None)
    def test_funcfield_multiplicative(self, a, b, i, j):
        x = FpRat(FpPoly(3, [a]) * FpPoly.t_power(3, i))
        y = FpRat(FpPoly(3, [b]) * FpPoly.t_power(3, j))
        if x.is_zero() or y.is_zero():
            return
        assert F3.valuation(x * y) == F3.valuation(x) + F3.valuation(y)


class TestFpArithmetic:
    def test_poly_divmod(self):
        f = FpPoly(3, [1, 0, 1])   # 1 + T^2
        g = FpPoly(3, [1, 1])      # 1 + T
        q, r = f.divmod(g)
        assert q * g + r == f
        assert r.degree < g.degree

    def test_gcd_monic(self):
        f = FpPoly(5, [0, 0, 2])       # 2 T^2
        g = FpPoly(5, [0, 3])          # 3 T
        got = FpPoly.gcd(f, g)
        assert got == FpPoly.t_power(5, 1)

    def test_rat_field_ops(self):
        t = FpRat(FpPoly.t_power(3, 1))
        one = FpRat.from_int(3, 1)
        x = (t + one) / t
        assert x * t == t + one
        assert x - x == FpRat.from_int(3, 0)
        assert (one / x) * x == one

    def test_rat_canonical_denominator(self):
        # denominator is normalised monic, so equality is structural
        a = FpRat(FpPoly(5, [1]), FpPoly(5, [0, 2]))
        b = FpRat(FpPoly(5, [3]), FpPoly(5, [0, 6 % 5]))
        assert a == b and hash(a) == hash(b)


class TestTextEncoding:
    @pytest.mark.parametrize("text", ["50", "3/25", "-7/2", "0"])
    def test_padic_round_trip(self, text):
        x = Q5.parse(text)
        assert Q5.parse(Q5.format(x)) == x

    @pytest.mark.parametrize("text", ["T", "2*T", "T^2", "3*T^2+1", "T^2+2*T+1", "T+1/T", "2"])
    def test_funcfield_round_trip(self, text):
        x = F3.parse(text)
        assert F3.parse(F3.format(x)) == x

    def test_funcfield_printer_shape(self):
        x = F3.parse("2*T^2+1")
        assert F3.format(x) == "2*T^2+1"

    def test_real_round_trip(self):
        x = R.parse("1.5")
        assert x == 1.5 and R.parse(R.format(x)) == x

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            Q5.parse("not-a-number")
        with pytest.raises(ParseError):
            F3.parse("T**2")

    def test_field_descriptor_round_trip(self):
        for f in (Q5, F3, R):
            assert Field.from_json(f.to_json()) == f

    def test_prime_validation(self):
        with pytest.raises(ValueError):
            Field.padic(4)
        with pytest.raises(ValueError):
            Field.funcfield(1)
