from fractions import Fraction as F

import mpmath as mp
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from ggcmix.exact import PFTerm, Poly, RationalExpr, interpolate, poly_gcd, reconstruct, to_fraction

small = st.fractions(min_value=-5, max_value=5, max_denominator=12)
polys = st.lists(small, min_size=0, max_size=5).map(Poly)


def test_to_fraction_is_exact_for_binary_floats():
    assert to_fraction(0.1) == F(3602879701896397, 36028797018963968)
    assert to_fraction(mp.mpf("0.375")) == F(3, 8)
    assert to_fraction("7/3") == F(7, 3)
    with pytest.raises(TypeError):
        to_fraction(object())


def test_poly_arithmetic():
    p = Poly([1, 2, 3])  # 1 + 2x + 3x^2
    q = Poly([-1, 1])
    assert (p * q).c == (F(-1), F(-1), F(-1), F(3))
    assert p(F(2)) == 17
    assert p.derivative() == Poly([2, 6])
    assert p.compose_shift(1) == Poly([6, 8, 3])
    quo, rem = p.divmod(q)
    assert quo * q + rem == p
    assert Poly([0, 0]).is_zero() and Poly().degree == -1


@given(polys, polys.filter(lambda d: not d.is_zero()))
def test_division_identity(p, d):
    q, r = p.divmod(d)
    assert q * d + r == p
    assert r.degree < d.degree


@given(polys, polys)
def test_gcd_divides_both(p, q):
    if p.is_zero() and q.is_zero():
        return
    g = poly_gcd(p, q)
    assert (p % g).is_zero() and (q % g).is_zero()


@given(st.lists(small, min_size=1, max_size=6, unique=True), st.data())
def test_interpolation_reproduces_nodes(xs, data):
    ys = data.draw(st.lists(small, min_size=len(xs), max_size=len(xs)))
    p = interpolate(xs, ys)
    assert all(p(x) == y for x, y in zip(xs, ys))
    assert p.degree < len(xs)


def _sympy_terms(num, poles):
    x = sympy.Symbol("x")
    den = sympy.Integer(1)
    for r, m in poles:
        den *= (x - sympy.Rational(r.numerator, r.denominator)) ** m
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x ** i for i, c in enumerate(num.c)) / den
    return sympy.apart(sympy.together(expr), x), x


def test_partial_fractions_match_sympy_apart():
    num = Poly([1, 0, 1])
    poles = [(F(1), 2), (F(-2), 1)]
    den = Poly.linear(1) ** 2 * Poly.linear(-2)
    poly_part, terms = RationalExpr(num, den).partial_fractions(poles)
    assert poly_part.is_zero()
    ours = {(t.pole, t.order): t.coeff for t in terms}
    assert ours == {(F(1), 2): F(2, 3), (F(1), 1): F(4, 9), (F(-2), 1): F(5, 9)}
    ref, x = _sympy_terms(num, poles)
    mine = sum(sympy.Rational(c.numerator, c.denominator) / (x - sympy.Rational(p.numerator, p.denominator)) ** o
               for (p, o), c in ours.items())
    assert sympy.simplify(ref - mine) == 0


@given(
    st.lists(small, min_size=1, max_size=6),
    st.lists(st.tuples(st.fractions(min_value=-4, max_value=4, max_denominator=6),
                       st.integers(1, 3)), min_size=1, max_size=3,
             unique_by=lambda t: t[0]),
)
def test_partial_fractions_reconstruct(num_coeffs, poles):
    num = Poly(num_coeffs)
    if num.is_zero():
        return
    den = Poly.const(1)
    for r, m in poles:
        den = den * Poly.linear(r) ** m
    expr = RationalExpr(num, den)
    # cancellation may lower multiplicities; recompute the split of the reduced denominator
    reduced = []
    for r, m in poles:
        mult = 0
        d = expr.den
        while d.degree > 0 and d(r) == 0:
            d = d // Poly.linear(r)
            mult += 1
        if mult:
            reduced.append((r, mult))
    poly_part, terms = expr.partial_fractions(reduced)
    assert all(t.order >= 1 for t in terms)
    assert reconstruct(poly_part, terms) == expr


def test_partial_fractions_reject_wrong_pole_list():
    expr = RationalExpr(Poly([1]), Poly.linear(1) * Poly.linear(2))
    with pytest.raises(ValueError):
        expr.partial_fractions([(F(1), 1)])


def test_rational_expr_is_gcd_reduced():
    e = RationalExpr(Poly.linear(1) * Poly.linear(3), Poly.linear(1) * Poly([0, 2]))
    assert e.den == Poly([0, 1]) and e.num == Poly.linear(3).scale(F(1, 2))
    assert isinstance(PFTerm(F(1), 1, F(2)).coeff, F)
