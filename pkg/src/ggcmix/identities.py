"""Verification of the closed forms for the kernel integrals ``J_k``.

For ``a > 0``, ``b >= 1``, ``t > 0`` and ``k > 0``

    J_k = int_{1/b}^{b} t^k ((b - v)(v - 1/b))^(k-1) / ((v + t/a)^k (v + a t)^k) dv

depends on ``t`` only through ``T = t + 1/t``.  For integer ``k`` and
``a != 1`` it equals ``P_k(T) + Q_k(T) log((T + A) / (T + B))`` with
``A = ab + 1/(ab)``, ``B = a/b + b/a``, and its ``k``-th derivative in ``T``
is ``(-1)^k (k-1)! (b - 1/b)^(2k-1) / ((T + A)^k (T + B)^k)``.

Two independent routes are provided for every quantity:

* quadrature (double precision via QUADPACK's algebraic-weight rule, or
  extended precision via Gauss-Jacobi in the variable ``log v``);
* exact rational algebra (partial fractions in ``v``, exact interpolation
  of ``P_k`` and ``Q_k`` in ``T``).
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath as mp
import numpy as np
from scipy import integrate as _si
from scipy import special

from .errors import BranchError, DomainError, QuadratureError
from .exact import Poly, RationalExpr, interpolate, to_fraction
from .hyperbolic import v_of_w
from .transforms import CMConfig, CMReport, cm_test

MP_DPS = 30


def _is_mp(*xs):
    return any(isinstance(x, mp.mpf) for x in xs)


@dataclass(frozen=True)
class ProofPoint:
    """Parameters ``(a, b, t, k)`` with the derived symbols of the closed forms."""

    a: object
    b: object
    t: object
    k: object = 1

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("a must be positive")
        if not self.b >= 1:
            raise DomainError("b must be >= 1")
        if not self.t > 0:
            raise DomainError("t must be positive")
        if not self.k > 0:
            raise DomainError("k must be positive")

    @property
    def T(self):
        return self.t + 1 / self.t

    @property
    def A(self):
        return self.a * self.b + 1 / (self.a * self.b)

    @property
    def B(self):
        return self.a / self.b + self.b / self.a

    @property
    def alpha(self):
        return self.a + 1 / self.a

    @property
    def beta(self):
        return self.b + 1 / self.b

    def delta(self, z):
        return (self.alpha + self.beta * z) ** 2 - 4 - 4 * z ** 2 + 4 * z * self.T

    def exact(self) -> "ProofPoint":
        k = self.k if not float(self.k).is_integer() else int(self.k)
        return ProofPoint(to_fraction(self.a), to_fraction(self.b), to_fraction(self.t), k)

    def mp(self) -> "ProofPoint":
        return ProofPoint(mp.mpf(self.a), mp.mpf(self.b), mp.mpf(self.t), self.k)


def integer_order(k) -> int:
    if not float(k).is_integer() or k < 1:
        raise DomainError(f"closed forms need an integer order k >= 1, got {k}")
    return int(k)


# ---------------------------------------------------------------------------
# quadrature route


def jk_integrand(p: ProofPoint, v):
    a, b, t, k = p.a, p.b, p.t, p.k
    return t ** k * ((b - v) * (v - 1 / b)) ** (k - 1) / ((v + t / a) ** k * (v + a * t) ** k)


def _jk_float(a, b, t, k):
    def g(v):
        return t ** k / ((v + t / a) * (v + a * t)) ** k

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _si.IntegrationWarning)
        val, err = _si.quad(g, 1.0 / b, b, weight="alg", wvar=(k - 1, k - 1),
                            epsabs=0.0, epsrel=1e-13, limit=400)
    if not math.isfinite(val) or err > 1e-10 * abs(val) + 1e-300:
        raise QuadratureError(f"J_k quadrature error estimate {err:.3g} at a={a}, b={b}, t={t}, k={k}")
    return val


def jacobi_poly(n: int, al, be, x):
    """``P_n^{(al, be)}(x)`` by the three-term recurrence."""
    if n == 0:
        return x * 0 + 1
    prev, cur = x * 0 + 1, (al + 1) + (al + be + 2) * (x - 1) / 2
    for m in range(2, n + 1):
        c = 2 * m + al + be
        a1 = 2 * m * (m + al + be) * (c - 2)
        a2 = (c - 1) * (c * (c - 2) * x + al * al - be * be)
        a3 = 2 * (m + al - 1) * (m + be - 1) * c
        prev, cur = cur, (a2 * cur - a3 * prev) / a1
    return cur


@functools.lru_cache(maxsize=64)
def gauss_jacobi(n: int, alpha: float, dps: int):
    """Nodes and weights for ``int_{-1}^{1} (1 - x^2)^alpha g(x) dx`` at ``dps`` digits.

    Double-precision nodes are polished by Newton's method on the Jacobi
    polynomial in mpmath.
    """
    x0, _ = special.roots_jacobi(n, alpha, alpha)
    with mp.workdps(dps + 15):
        al = mp.mpf(alpha)
        const = (mp.gamma(n + al + 1) ** 2 / (mp.gamma(n + 2 * al + 1) * mp.factorial(n))
                 * mp.mpf(2) ** (2 * al + 1))

        def deriv(x):
            return (n + 2 * al + 1) / 2 * jacobi_poly(n - 1, al + 1, al + 1, x)

        nodes, weights = [], []
        for xi in x0:
            x = mp.mpf(float(xi))
            for _ in range(60):
                step = jacobi_poly(n, al, al, x) / deriv(x)
                x -= step
                if abs(step) < mp.mpf(10) ** (-(dps + 12)):
                    break
            dp = deriv(x)
            nodes.append(x)
            weights.append(const / ((1 - x * x) * dp * dp))
    return tuple(nodes), tuple(weights)


def _gj_size(b, dps):
    # the integrand's nearest singularity sits at imaginary distance pi / log b
    d = math.pi / math.log(float(b))
    rho = d + math.sqrt(1 + d * d)
    return int(min(160, max(16, math.ceil((dps + 6) / (2 * math.log10(rho))) + 4)))


@functools.lru_cache(maxsize=256)
def _log_rule(b: str, k: str, dps: int):
    """Points ``v_i`` and weights ``W_i`` with ``int_{1/b}^b ((b-v)(v-1/b))^(k-1) g(v) dv = sum W_i g(v_i)``."""
    n = _gj_size(float(b), dps)
    nodes, weights = gauss_jacobi(n, float(k) - 1.0, dps)
    with mp.workdps(dps + 10):
        b, k = mp.mpf(b), mp.mpf(k)
        L = mp.log(b)
        vs, ws = [], []
        for x, w in zip(nodes, weights):
            y = L * x
            # (b - v)(v - 1/b) = (1 - x^2) * bracket, written without cancellation
            left = mp.sinh(L * (1 - x) / 2) / (1 - x)
            right = mp.sinh(L * (1 + x) / 2) / (1 + x)
            bracket = 4 * mp.exp(y) * left * right
            v = mp.exp(y)
            vs.append(v)
            ws.append(w * bracket ** (k - 1) * L * v)
    return tuple(vs), tuple(ws)


def _jk_mp(a, b, t, k):
    dps = MP_DPS
    kk = int(k) if float(k).is_integer() else k
    vs, ws = _log_rule(mp.nstr(mp.mpf(b), 40), repr(float(k)), dps)
    with mp.workdps(dps + 5):
        a, t = mp.mpf(a), mp.mpf(t)
        p, q = t / a, a * t
        tk = t ** kk
        acc = mp.mpf(0)
        for v, w in zip(vs, ws):
            acc += w / ((v + p) * (v + q)) ** kk
        val = tk * acc
    return +val


def jk_quadrature(p: ProofPoint, extended: Optional[bool] = None):
    """``J_k`` by quadrature; ``mpf`` inputs (or ``extended=True``) select the mpmath route."""
    if p.b == 1:
        return mp.mpf(0) if _is_mp(p.a, p.b, p.t) or extended else 0.0
    if extended or (extended is None and _is_mp(p.a, p.b, p.t)):
        return _jk_mp(p.a, p.b, p.t, p.k)
    return _jk_float(float(p.a), float(p.b), float(p.t), float(p.k))


def jk_of_T(a, b, k):
    """``T -> J_k(T)`` on the branch ``t >= 1``, in extended precision."""

    def J(T):
        t = v_of_w(mp.mpf(T))
        return _jk_mp(a, b, t, k)

    return J


# ---------------------------------------------------------------------------
# exact route


def _integrand_expr(a: Fraction, b: Fraction, t: Fraction, k: int):
    """``I_k`` as an exact rational function of ``v`` with its pole list."""
    p, q = t / a, a * t
    num = (Poly([-b, 1]) * Poly([-1 / b, 1])).scale(-1) ** (k - 1)  # ((b - v)(v - 1/b))^(k-1)
    num = num.scale(t ** k)
    if p == q:
        poles = [(-p, 2 * k)]
    else:
        poles = [(-p, k), (-q, k)]
    den = Poly.const(1)
    for r, m in poles:
        den = den * Poly.linear(r) ** m
    return RationalExpr(num, den), poles


@dataclass(frozen=True)
class ExactParts:
    """``J_k = rational + log_coeff * log((T + A) / (T + B))`` at one point."""

    rational: Fraction
    log_coeff: Fraction
    log_num: Fraction
    log_den: Fraction


def exact_parts(a, b, t, k: int) -> ExactParts:
    """Integrate the partial-fraction expansion of ``I_k`` over ``[1/b, b]`` exactly."""
    a, b, t = to_fraction(a), to_fraction(b), to_fraction(t)
    expr, poles = _integrand_expr(a, b, t, k)
    poly_part, terms = expr.partial_fractions(poles)
    if not poly_part.is_zero():
        raise ArithmeticError("integrand has a polynomial part")
    lo, hi = 1 / b, b
    rational = Fraction(0)
    residues = {}
    for term in terms:
        if term.order == 1:
            residues[term.pole] = term.coeff
            continue
        m = term.order
        # int (v - r)^(-m) dv = (v - r)^(1-m) / (1-m)
        rational += term.coeff * ((hi - term.pole) ** (1 - m) - (lo - term.pole) ** (1 - m)) / (1 - m)
    T = t + 1 / t
    A = a * b + 1 / (a * b)
    B = a / b + b / a
    if not residues:
        return ExactParts(rational, Fraction(0), T + A, T + B)
    if sum(residues.values()) != 0:
        raise ArithmeticError("logarithmic residues do not cancel")
    # residue at -t/a multiplies log((b + t/a)/(1/b + t/a)); the other
    # residue is its negative, and the two logs combine to log((T+A)/(T+B))
    r_p = residues.get(-t / a, Fraction(0))
    ratio = ((b + t / a) * (1 / b + a * t)) / ((1 / b + t / a) * (b + a * t))
    if ratio != (T + A) / (T + B):
        raise ArithmeticError("logarithm argument does not reduce to (T+A)/(T+B)")
    return ExactParts(rational, r_p, T + A, T + B)


@dataclass(frozen=True)
class PQPair:
    """Exact coefficients of ``P_k`` (degree <= k-2) and ``Q_k`` (degree k-1) in ``T``."""

    k: int
    a: Fraction
    b: Fraction
    P: Poly
    Q: Poly
    consistent: bool = True

    @property
    def degree_ok(self) -> bool:
        return self.P.degree <= self.k - 2 and (self.Q.degree == self.k - 1 or self.b == 1)

    def value(self, T):
        """``P(T) + Q(T) log((T+A)/(T+B))`` in extended precision."""
        a, b = self.a, self.b
        A = a * b + 1 / (a * b)
        B = a / b + b / a
        T = mp.mpf(T) if not isinstance(T, Fraction) else T
        if isinstance(T, Fraction):
            return _assemble(self.P(T), self.Q(T), T + A, T + B)
        Am = mp.mpf(A.numerator) / A.denominator
        Bm = mp.mpf(B.numerator) / B.denominator
        return self.P(T) + self.Q(T) * mp.log((T + Am) / (T + Bm))

    def to_dict(self):
        return {"k": self.k, "P": [str(c) for c in self.P.c], "Q": [str(c) for c in self.Q.c]}


def _frac_mp(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def _assemble(rational: Fraction, coeff: Fraction, num: Fraction, den: Fraction):
    """Evaluate ``rational + coeff * log(num / den)`` with precision grown until stable."""
    if coeff == 0 or num == den:
        return _frac_mp(rational)
    dps = 40
    while True:
        with mp.workdps(dps):
            r = _frac_mp(rational)
            l = _frac_mp(coeff) * (mp.log(num.numerator) - mp.log(num.denominator)
                                   - mp.log(den.numerator) + mp.log(den.denominator))
            val = r + l
            size = abs(r) + abs(l)
            if val == 0 and size == 0:
                return val
            lost = float(mp.log10(size / abs(val))) if val != 0 else dps
            if lost + 25 < dps:
                return +val
        dps = int(lost) + 60
        if dps > 2000:
            raise ArithmeticError("closed form cancels beyond 2000 digits")


def pq_pair(a, b, k: int) -> PQPair:
    """Recover ``P_k`` and ``Q_k`` by exact interpolation over ``t = 2, 3, ...``.

    ``k + 2`` nodes are used, two more than the claimed degrees need, so the
    returned degrees are themselves a check of the polynomial structure.
    """
    k = integer_order(k)
    a, b = to_fraction(a), to_fraction(b)
    if a == 1:
        raise DomainError("P_k/Q_k are defined for a != 1; use the a = 1 branch")
    ts = [Fraction(j) for j in range(2, k + 4)]
    Ts, ps, qs = [], [], []
    for t in ts:
        parts = exact_parts(a, b, t, k)
        Ts.append(t + 1 / t)
        ps.append(parts.rational)
        qs.append(parts.log_coeff)
    P = interpolate(Ts, ps)
    Q = interpolate(Ts, qs)
    return PQPair(k, a, b, P, Q)


def jk_closed(p: ProofPoint):
    """``(J_k, PQPair)`` from exact partial fractions.

    Float inputs are converted to the rationals they represent; ``mpf`` inputs
    likewise (binary floating-point numbers are exact rationals), so the
    only rounding is in the final logarithm, which is carried out with
    enough digits to survive the cancellation between ``P_k`` and ``Q_k log``.
    For ``a = 1`` the two poles merge, the logarithm drops out and the
    returned pair is ``None``.
    """
    k = integer_order(p.k)
    e = p.exact()
    as_mp = _is_mp(p.a, p.b, p.t)
    if e.a == 1:
        parts = exact_parts(e.a, e.b, e.t, k)
        val = parts.rational
        return (_frac_mp(val) if as_mp else float(val)), None
    pq = pq_pair(e.a, e.b, k)
    T = e.T
    parts = exact_parts(e.a, e.b, e.t, k)
    consistent = parts.rational == pq.P(T) and parts.log_coeff == pq.Q(T)
    pq = PQPair(pq.k, pq.a, pq.b, pq.P, pq.Q, consistent)
    val = _assemble(parts.rational, parts.log_coeff, parts.log_num, parts.log_den)
    return (val if as_mp else float(val)), pq


def jk_closed_exact(p: ProofPoint) -> ExactParts:
    return exact_parts(to_fraction(p.a), to_fraction(p.b), to_fraction(p.t), integer_order(p.k))


def tabulated_pq(a, b, k: int):
    """The tabulated ``P_k, Q_k`` for ``k = 1, 2, 3`` as exact polynomials in ``T``."""
    a, b = to_fraction(a), to_fraction(b)
    d = a - 1 / a
    c = b - 1 / b
    A = a * b + 1 / (a * b)
    B = a / b + b / a
    if k == 1:
        return Poly(), Poly([1 / d])
    if k == 2:
        return Poly([-2 * c / d ** 2]), Poly([(A + B) / d ** 3, 2 / d ** 3])
    if k == 3:
        P = Poly([A + B, 2]).scale(-3 * c / d ** 4)
        Q = Poly([(A + B) ** 2 + 2 * A * B, 6 * (A + B), 6]).scale(1 / d ** 5)
        return P, Q
    raise DomainError("the table covers k = 1, 2, 3")


# ---------------------------------------------------------------------------
# derivative identity


def jk_derivative_rhs(p: ProofPoint, exact: bool = False):
    """``(-1)^k (k-1)! (b - 1/b)^(2k-1) / ((T+A)^k (T+B)^k)``."""
    k = integer_order(p.k)
    if exact:
        e = p.exact()
        return (-1) ** k * math.factorial(k - 1) * (e.b - 1 / e.b) ** (2 * k - 1) / ((e.T + e.A) ** k * (e.T + e.B) ** k)
    q = p.mp() if _is_mp(p.a, p.b, p.t) else p
    val = (-1) ** k * math.factorial(k - 1) * (q.b - 1 / q.b) ** (2 * k - 1) / ((q.T + q.A) ** k * (q.T + q.B) ** k)
    return val if _is_mp(p.a, p.b, p.t) else float(val)


def closed_form_derivative(p: ProofPoint, h: float = 1e-6, dps: int = 80):
    """``d^k/dT^k`` of ``P_k + Q_k log((T+A)/(T+B))`` by a centred ``k``-th difference."""
    k = integer_order(p.k)
    e = p.exact()
    pq = pq_pair(e.a, e.b, k)
    with mp.workdps(dps):
        T0 = _frac_mp(e.T)
        hh = mp.mpf(h)
        acc = mp.mpf(0)
        for j in range(k + 1):
            acc += (-1) ** j * mp.binomial(k, j) * pq.value(T0 + (mp.mpf(k) / 2 - j) * hh)
        return acc / hh ** k


@dataclass(frozen=True)
class Reduction:
    k: int
    R: Poly
    expected: Fraction
    residual: Poly

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def rk_reduction(a, b, k: int) -> Reduction:
    """Exact ``((T+A)(T+B))^k * d^k/dT^k [P_k + Q_k log((T+A)/(T+B))]``.

    By Leibniz with ``d^j/dT^j log(T+c) = (-1)^(j-1) (j-1)! (T+c)^(-j)`` the
    product is a polynomial; the identity holds when it equals the constant
    ``(-1)^k (k-1)! (b - 1/b)^(2k-1)``.
    """
    k = integer_order(k)
    a, b = to_fraction(a), to_fraction(b)
    pq = pq_pair(a, b, k)
    A = a * b + 1 / (a * b)
    B = a / b + b / a
    TA, TB = Poly([A, 1]), Poly([B, 1])
    R = pq.P.derivative(k) * (TA * TB) ** k
    for j in range(1, k + 1):
        dq = pq.Q.derivative(k - j)
        lj = (-1) ** (j - 1) * math.factorial(j - 1)
        bracket = TA ** (k - j) * TB ** k - TA ** k * TB ** (k - j)
        R = R + (dq * bracket).scale(math.comb(k, j) * lj)
    expected = (-1) ** k * math.factorial(k - 1) * (b - 1 / b) ** (2 * k - 1)
    return Reduction(k, R, expected, R - Poly.const(expected))


# ---------------------------------------------------------------------------
# generating function


def gf_radius(p: ProofPoint):
    """Disc ``|z| <= a/(1+a)^2 (b-1)^2/b`` on which the series converges absolutely."""
    return p.a / (1 + p.a) ** 2 * (p.b - 1) ** 2 / p.b


def _gf_parts(z, p: ProofPoint):
    d = p.delta(z)
    if not d > 0:
        raise BranchError(f"Delta(z) = {d} <= 0 at z = {z}")
    sq = mp.sqrt(d) if _is_mp(z, d) else math.sqrt(d)
    base = p.T - 2 * z + p.beta * (p.alpha + p.beta * z) / 2
    c = (p.b - 1 / p.b) * sq / 2
    return sq, (base + c) / (base - c)


def gf_eval(z, p: ProofPoint):
    """``log(R) / sqrt(Delta)``."""
    sq, R = _gf_parts(z, p)
    if not R > 0:
        raise BranchError(f"R(z) = {R} is not positive")
    return (mp.log(R) if _is_mp(z, R) else math.log(R)) / sq


def log_r(z, p: ProofPoint):
    return mp.log(_gf_parts(z, p)[1]) if _is_mp(z, p.a) else math.log(_gf_parts(z, p)[1])


def dlogr_rhs(z, p: ProofPoint):
    """``2 (b - 1/b) / sqrt(Delta)``."""
    sq, _ = _gf_parts(z, p)
    return 2 * (p.b - 1 / p.b) / sq


def gf_integral(z, p: ProofPoint):
    """The defining integral of the generating function, by tanh-sinh quadrature."""
    q = p.mp()
    z = mp.mpf(z)
    a, b, t = q.a, q.b, q.t
    return mp.quad(lambda v: 1 / ((v + t / a) * (v + a * t) / t + z * (b - v) * (v - 1 / b)), [1 / b, b])


def centred_derivative(f, x, n: int, h):
    acc = mp.mpf(0)
    for j in range(n + 1):
        acc += (-1) ** j * mp.binomial(n, j) * f(x + (mp.mpf(n) / 2 - j) * h)
    return acc / h ** n


def dlogr_numeric(z, p: ProofPoint, dps: int = 60):
    with mp.workdps(dps):
        q = p.mp()
        return centred_derivative(lambda x: log_r(x, q), mp.mpf(z), 1, mp.mpf(10) ** (-20))


def series_check(p: ProofPoint, K: int, dps: Optional[int] = None):
    """``J_1..J_K`` recovered as ``(-1)^(k-1)/(k-1)! GF^(k-1)(0)``."""
    dps = dps or 40 + 10 * K
    out = []
    with mp.workdps(dps):
        q = p.mp()
        r = gf_radius(q)
        h = r * mp.mpf(10) ** (-8)
        for k in range(1, K + 1):
            d = centred_derivative(lambda z: gf_eval(z, q), mp.mpf(0), k - 1, h) if k > 1 else gf_eval(mp.mpf(0), q)
            out.append((-1) ** (k - 1) * d / mp.factorial(k - 1))
    return [float(v) for v in out]


# ---------------------------------------------------------------------------
# asymptotics and the real-order experiment


def asymptotic_limit(b, k):
    return float(special.beta(k, k)) * (b - 1 / b) ** (2 * k - 1)


def asymptotic_check(a, b, k, ts: Sequence[float] = (1e2, 1e3, 1e4)) -> dict:
    """``T^k J_k`` along ``t -> inf`` against ``B(k,k) (b - 1/b)^(2k-1)``."""
    limit = asymptotic_limit(b, k)
    values = []
    for t in ts:
        T = t + 1 / t
        values.append(T ** k * jk_quadrature(ProofPoint(a, b, t, k)))
    rel = [abs(v - limit) / limit if limit else abs(v) for v in values]
    return {"a": a, "b": b, "k": k, "t": list(ts), "scaled": values, "limit": limit, "rel_err": rel}


@dataclass
class SweepReport:
    k: float
    verdict: str
    per_point: dict
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    @property
    def witnesses(self):
        out = []
        for (a, b), rep in sorted(self.per_point.items()):
            out.extend({"a": a, "b": b, "T": 2.0 + x.s, "h": x.h, "n": x.n, "value": x.value}
                       for x in rep.witnesses)
        return out

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "k": self.k,
            "witnesses": self.witnesses,
            "per_point": {f"{a},{b}": r.to_dict() for (a, b), r in sorted(self.per_point.items())},
            "meta": self.meta,
        }


DEFAULT_GRID = tuple((a, b) for a in (1.25, 2.0, 3.0, 5.0, 8.0) for b in (1.25, 2.0, 3.0, 5.0, 8.0))


def cm_sweep(grid: Sequence[tuple] = DEFAULT_GRID, k: float = 1.0, n_max: int = 6,
             cfg: CMConfig = CMConfig(), interval=(1e-3, 1e3)) -> SweepReport:
    """CM test of ``omega -> J_k(2 + omega)`` for every ``(a, b)`` in ``grid``."""
    if not k > 0:
        raise DomainError("k must be positive")
    per = {}
    for a, b in grid:
        J = jk_of_T(a, b, k)
        per[(float(a), float(b))] = cm_test(lambda om, J=J: J(2 + om), interval, n_max, cfg)
    verdict = "pass" if all(r.passed for r in per.values()) else "fail"
    return SweepReport(k, verdict, per, {"n_max": n_max, "interval": list(interval),
                                         "grid": [list(g) for g in grid]})


# ---------------------------------------------------------------------------
# randomized suites


def random_rational(rng, lo: float, hi: float, max_den: int = 1000) -> Fraction:
    """A rational in ``[lo, hi]`` with denominator at most ``max_den``."""
    d = rng.randint(1, max_den)
    return Fraction(rng.randint(math.ceil(lo * d), math.floor(hi * d)), d)


def random_points(k, trials: int, seed: int, a_range=(1.01, 10.0), b_range=(1.01, 10.0),
                  t_range=(0.1, 10.0)):
    import random

    rng = random.Random(seed)
    out = []
    while len(out) < trials:
        a = random_rational(rng, *a_range)
        if a == 1:
            continue
        out.append(ProofPoint(a, random_rational(rng, *b_range), random_rational(rng, *t_range), k))
    return out


def _point(p: ProofPoint):
    return {"a": str(p.a), "b": str(p.b), "t": str(p.t), "k": p.k}


@dataclass
class SuiteResult:
    identity: str
    verdict: str
    witnesses: list
    metrics: dict

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {"identity": self.identity, "verdict": self.verdict,
                "witnesses": self.witnesses, "metrics": self.metrics}


def _suite(identity, witnesses, metrics):
    return SuiteResult(identity, "fail" if witnesses else "pass", witnesses, metrics)


def suite_eq2eq3(k: int, trials: int = 100, seed: int = 1, tol: float = 1e-10) -> SuiteResult:
    """Quadrature against the exact closed form at random rational points."""
    worst, bad = 0.0, []
    for p in random_points(integer_order(k), trials, seed):
        q = jk_quadrature(p)
        c, pq = jk_closed(p)
        err = abs(q - c) / (1 + abs(c))
        worst = max(worst, err)
        if err > tol or not (pq.consistent and pq.degree_ok):
            bad.append({**_point(p), "quadrature": q, "closed": c, "error": err,
                        "pq_consistent": pq.consistent, "degree_ok": pq.degree_ok})
    return _suite("eq2eq3", bad, {"max_scaled_error": worst, "trials": trials, "tolerance": tol})


def suite_eq4(k: int, trials: int = 20, seed: int = 1, tol: float = 1e-6) -> SuiteResult:
    """Centred ``k``-th difference of the closed form against the derivative formula,
    plus the exact reduction of ``((T+A)(T+B))^k d^k J_k / dT^k`` to a constant."""
    k = integer_order(k)
    worst, bad = 0.0, []
    for p in random_points(k, trials, seed):
        num = closed_form_derivative(p)
        rhs = jk_derivative_rhs(p)
        err = abs(float(num) / rhs - 1.0)
        worst = max(worst, err)
        if err > tol:
            bad.append({**_point(p), "numeric": float(num), "formula": rhs, "rel_error": err})
    p0 = random_points(k, 1, seed + 7919)[0]
    red = rk_reduction(p0.a, p0.b, k)
    if not red.ok:
        bad.append({"a": str(p0.a), "b": str(p0.b), "k": k, "residual": repr(red.residual)})
    return _suite("eq4", bad, {"max_rel_error": worst, "trials": trials, "tolerance": tol,
                               "reduction_zero_residual": red.ok})


def suite_gf(k: int, trials: int = 50, seed: int = 1, tol_dlog: float = 1e-10,
             tol_series: float = 1e-8) -> SuiteResult:
    """``d/dz log R`` at random points and the series coefficients ``J_1..J_k``."""
    import random

    rng = random.Random(seed)
    worst_d, bad = 0.0, []
    for p in random_points(1, trials, seed, t_range=(0.1, 10.0)):
        p = ProofPoint(float(p.a), float(p.b), float(p.t), 1)
        # Delta(z) > Delta(0) > 0 for z >= 0 because beta^2 >= 4
        z = rng.random() * float(gf_radius(p))
        lhs = dlogr_numeric(z, p)
        rhs = dlogr_rhs(mp.mpf(z), p.mp())
        err = float(abs(lhs - rhs) / abs(rhs))
        worst_d = max(worst_d, err)
        if err > tol_dlog:
            bad.append({"a": p.a, "b": p.b, "t": p.t, "z": z, "kind": "dlogR", "rel_error": err})
    worst_s = 0.0
    for p in random_points(1, 5, seed + 1):
        p = ProofPoint(float(p.a), float(p.b), float(p.t), 1)
        series = series_check(p, int(k))
        for j, val in enumerate(series, start=1):
            ref = jk_quadrature(ProofPoint(p.a, p.b, p.t, j))
            err = abs(val - ref) / max(abs(ref), 1e-300)
            worst_s = max(worst_s, err)
            if err > tol_series:
                bad.append({"a": p.a, "b": p.b, "t": p.t, "k": j, "kind": "series",
                            "series": val, "quadrature": ref, "rel_error": err})
    return _suite("gf", bad, {"max_dlogR_rel_error": worst_d, "max_series_rel_error": worst_s,
                              "trials": trials})


def suite_asymptotic(k, bs=(1.5, 2.0, 4.0), a: float = 2.0, tol: float = 0.01) -> SuiteResult:
    """``T^k J_k`` at ``t = 1e4`` within ``tol`` of ``B(k,k) (b - 1/b)^(2k-1)``."""
    bad, rows = [], []
    for b in bs:
        rep = asymptotic_check(a, b, k)
        rows.append(rep)
        if rep["rel_err"][-1] > tol:
            bad.append({"a": a, "b": b, "k": k, "scaled": rep["scaled"][-1], "limit": rep["limit"],
                        "rel_error": rep["rel_err"][-1]})
    return _suite("asymptotic", bad, {"reports": rows, "tolerance": tol})


def suite_cm_real_k(k, grid=DEFAULT_GRID, n_max: int = 6) -> SuiteResult:
    rep = cm_sweep(grid, k, n_max)
    return _suite("cm-real-k", rep.witnesses, {"k": k, "n_max": n_max,
                                               "points": len(rep.per_point)})


SUITES = {
    "eq2eq3": suite_eq2eq3,
    "eq4": suite_eq4,
    "gf": suite_gf,
    "asymptotic": suite_asymptotic,
    "cm-real-k": suite_cm_real_k,
}
