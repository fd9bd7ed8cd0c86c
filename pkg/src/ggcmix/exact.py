"""Exact univariate algebra over the rationals.

Polynomials are immutable tuples of :class:`fractions.Fraction` coefficients,
lowest degree first.  :class:`RationalExpr` keeps a gcd-reduced
numerator/denominator pair and, when the denominator splits into known
rational linear factors, its partial-fraction terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Iterable, Sequence

import mpmath as mp


def to_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, float or mpf."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, mp.mpf):
        man, exp = x.man_exp
        man = int(man)
        return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class Poly:
    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [to_fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, a):
        return cls([a])

    @classmethod
    def x(cls):
        return cls([0, 1])

    @classmethod
    def linear(cls, root):
        """``x - root``."""
        return cls([-to_fraction(root), 1])

    # queries ----------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.c) - 1  # zero polynomial has degree -1

    def is_zero(self):
        return not self.c

    def lead(self):
        return self.c[-1] if self.c else Fraction(0)

    def coeff(self, i):
        return self.c[i] if 0 <= i < len(self.c) else Fraction(0)

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for a in reversed(self.c):
                acc = acc * x + a
        elif isinstance(x, mp.mpf):
            acc = mp.mpf(0)
            for a in reversed(self.c):
                acc = acc * x + mp.mpf(a.numerator) / a.denominator
        else:
            acc = 0.0
            for a in reversed(self.c):
                acc = acc * x + float(a)
        return acc

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        if not self.c:
            return "Poly(0)"
        return "Poly(" + ", ".join(str(a) for a in self.c) + ")"

    # arithmetic -------------------------------------------------------------
    @staticmethod
    def _coerce(o):
        return o if isinstance(o, Poly) else Poly.const(o)

    def __add__(self, o):
        o = self._coerce(o)
        n = max(len(self.c), len(o.c))
        return Poly(self.coeff(i) + o.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-a for a in self.c)

    def __sub__(self, o):
        return self + (-self._coerce(o))

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __mul__(self, o):
        o = self._coerce(o)
        if not self.c or not o.c:
            return Poly()
        out = [Fraction(0)] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out, base = Poly.const(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, a):
        a = to_fraction(a)
        return Poly(a * x for x in self.c)

    def divmod(self, d: "Poly"):
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        q = [Fraction(0)] * max(len(rem) - len(d.c) + 1, 0)
        lead = d.lead()
        for i in range(len(q) - 1, -1, -1):
            f = rem[i + len(d.c) - 1] / lead
            q[i] = f
            if f:
                for j, b in enumerate(d.c):
                    rem[i + j] -= f * b
        return Poly(q), Poly(rem[: len(d.c) - 1])

    def __floordiv__(self, d):
        return self.divmod(self._coerce(d))[0]

    def __mod__(self, d):
        return self.divmod(self._coerce(d))[1]

    def derivative(self, n: int = 1) -> "Poly":
        p = self
        for _ in range(n):
            p = Poly(i * a for i, a in enumerate(p.c) if i)
        return p

    def monic(self):
        return self.scale(1 / self.lead()) if self.c else self

    def compose_shift(self, c) -> "Poly":
        """``p(x + c)`` (Taylor shift)."""
        c = to_fraction(c)
        out = Poly()
        xc = Poly([c, 1])
        for a in reversed(self.c):
            out = out * xc + a
        return out


def poly_gcd(p: Poly, q: Poly) -> Poly:
    while not q.is_zero():
        p, q = q, p % q
    return p.monic()


def interpolate(xs: Sequence, ys: Sequence) -> Poly:
    """Exact Newton interpolation through ``(xs[i], ys[i])``."""
    xs = [to_fraction(x) for x in xs]
    coef = [to_fraction(y) for y in ys]
    n = len(xs)
    if len(set(xs)) != n:
        raise ValueError("interpolation nodes must be distinct")
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = Poly.const(coef[-1])
    for i in range(n - 2, -1, -1):
        out = out * Poly.linear(xs[i]) + coef[i]
    return out


def series_div(num: Sequence[Fraction], den: Sequence[Fraction], n: int):
    """First ``n`` power-series coefficients of ``num / den`` (``den[0] != 0``)."""
    out = []
    for i in range(n):
        s = num[i] if i < len(num) else Fraction(0)
        for j in range(1, min(i, len(den) - 1) + 1):
            s -= den[j] * out[i - j]
        out.append(s / den[0])
    return out


@dataclass(frozen=True)
class PFTerm:
    """``coeff / (x - pole)**order``."""

    pole: Fraction
    order: int
    coeff: Fraction


class RationalExpr:
    """``num / den`` over the rationals, gcd-reduced with a monic denominator."""

    def __init__(self, num: Poly, den: Poly):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den) if not num.is_zero() else den.monic()
        num, den = num // g, den // g
        lead = den.lead()
        self.num = num.scale(1 / lead)
        self.den = den.scale(1 / lead)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def __eq__(self, other):
        return isinstance(other, RationalExpr) and self.num == other.num and self.den == other.den

    def __repr__(self):
        return f"RationalExpr({self.num!r} / {self.den!r})"

    def partial_fractions(self, poles: Sequence[tuple]):
        """Decompose over the given ``(root, multiplicity)`` factorization of the denominator.

        Returns ``(polynomial_part, [PFTerm, ...])``.
        """
        poles = [(to_fraction(r), int(m)) for r, m in poles]
        prod = Poly.const(1)
        for r, m in poles:
            prod = prod * Poly.linear(r) ** m
        if prod != self.den:
            raise ValueError("pole list does not factor the denominator")
        poly_part, rem = self.num.divmod(self.den)
        terms = []
        for r, m in poles:
            rest = Poly.const(1)
            for r2, m2 in poles:
                if r2 != r:
                    rest = rest * Poly.linear(r2) ** m2
            # Laurent coefficients at r: Taylor series of rem / rest about r
            num_s = list(rem.compose_shift(r).c)
            den_s = list(rest.compose_shift(r).c)
            taylor = series_div(num_s, den_s, m)
            for j, c in enumerate(taylor):
                if c:
                    terms.append(PFTerm(r, m - j, c))
        terms.sort(key=lambda t: (t.pole, t.order))
        return poly_part, terms


def reconstruct(poly_part: Poly, terms: Sequence[PFTerm]) -> RationalExpr:
    """Inverse of :meth:`RationalExpr.partial_fractions`."""
    poles = {}
    for t in terms:
        poles[t.pole] = max(poles.get(t.pole, 0), t.order)
    den = Poly.const(1)
    for r, m in poles.items():
        den = den * Poly.linear(r) ** m
    num = poly_part * den
    for t in terms:
        cof = den // (Poly.linear(t.pole) ** t.order)
        num = num + cof.scale(t.coeff)
    return RationalExpr(num, den)


def binomial(n, k):
    return comb(n, k)
