"""Adaptive quadrature with endpoint-singularity substitutions.

Finite pieces ``[l, r]`` are split at their midpoint and each half is mapped
to a half line by ``x = l + (m - l) * exp(-y)`` (mirrored for the right
half), which turns algebraic and logarithmic endpoint singularities into
exponentially decaying integrands. Infinite tails ``[l, inf)`` use
``x = exp(y)``.  The mp path delegates to ``mpmath.quad`` (tanh-sinh), which
clusters nodes at the endpoints by construction.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Iterable

import mpmath as mp
from scipy import integrate as _si

from .errors import QuadratureError

EPSABS = 0.0
EPSREL = 1e-12
LIMIT = 400
QUAD_DPS = 30


def _quad(g, a, b, epsabs, epsrel, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _si.IntegrationWarning)
        val, err, info = _si.quad(g, a, b, epsabs=epsabs, epsrel=epsrel,
                                  limit=limit, full_output=1)[:3]
    if not math.isfinite(val):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    return val, err


# log-scale cutoff of the half-line maps; the integrand must be negligible there
_Y_CUT = 700.0
_DECAY_TOL = 1e-8
# ratio r / l beyond which a finite piece is integrated in log scale
_WIDE = 1e3
# widest log-scale piece handed to a single adaptive rule
_LOG_CHUNK = 40.0


def _check_decay(edge, total, where):
    if abs(edge) > _DECAY_TOL * max(1.0, abs(total)):
        raise QuadratureError(f"integrand does not decay towards {where}; integral diverges or is unresolvable")


def _half_line(f, l, m, sign):
    width = abs(m - l)

    def g(y):
        e = math.exp(-y)
        x = l + sign * width * e
        if x == l:
            # the endpoint itself carries no mass
            return 0.0
        return width * e * f(x)

    return g


def _log_scale(f, a, b, epsabs, epsrel, limit):
    """``int f`` over ``[exp(a), exp(b)]`` in log scale, in chunks of bounded width."""
    n = max(1, math.ceil((b - a) / _LOG_CHUNK))
    edges = [a + (b - a) * i / n for i in range(n + 1)]
    total = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = _quad(lambda y: math.exp(y) * f(math.exp(y)), lo, hi, epsabs, epsrel, limit)
        total += v
        err += e
    return total, err


def _split(f, l, m, r, epsabs, epsrel, limit):
    a, e_a = _segment(f, l, m, epsabs, epsrel, limit)
    b, e_b = _segment(f, m, r, epsabs, epsrel, limit)
    return a + b, e_a + e_b


def _segment(f, l, r, epsabs, epsrel, limit):
    if l == r:
        return 0.0, 0.0
    if math.isinf(r):
        if l < 1.0:
            return _split(f, l, 1.0, r, epsabs, epsrel, limit)

        def tail(y):
            if y > _Y_CUT:
                return 0.0
            x = math.exp(y)
            return x * f(x)

        val, err = _quad(tail, math.log(l), math.inf, epsabs, epsrel, limit)
        _check_decay(tail(_Y_CUT), val, "infinity")
        return val, err
    if l == 0.0 and r > 1.0:
        # keep the half-line map at 0 fine enough to reach tiny x
        return _split(f, l, 1.0, r, epsabs, epsrel, limit)
    if l > 0.0 and r > _WIDE * l:
        # wide range: endpoint cells plus a log-scale middle
        a, e_a = _segment(f, l, 2.0 * l, epsabs, epsrel, limit)
        b, e_b = _log_scale(f, math.log(2.0 * l), math.log(0.5 * r), epsabs, epsrel, limit)
        c, e_c = _segment(f, 0.5 * r, r, epsabs, epsrel, limit)
        return a + b + c, e_a + e_b + e_c
    m = 0.5 * (l + r)
    left = _half_line(f, l, m, +1.0)
    a, e_a = _quad(left, 0.0, math.inf, epsabs, epsrel, limit)
    if l == 0.0:
        _check_decay(left(_Y_CUT), a, "0")
    b, e_b = _quad(_half_line(f, r, m, -1.0), 0.0, math.inf, epsabs, epsrel, limit)
    return a + b, e_a + e_b


def integrate(f: Callable[[float], float], lo: float, hi: float,
              points: Iterable[float] = (), epsabs: float = EPSABS,
              epsrel: float = EPSREL, limit: int = LIMIT,
              full_output: bool = False):
    """Integrate ``f`` over ``[lo, hi]`` (``hi`` may be ``inf``).

    ``points`` are interior breakpoints (kinks, jumps, near-singularities).
    Raises :class:`QuadratureError` when the estimated error exceeds
    ``100 * max(epsabs, epsrel * |value|)``.
    """
    if hi < lo:
        v = integrate(f, hi, lo, points, epsabs, epsrel, limit, full_output)
        return (-v[0], v[1]) if full_output else -v
    cuts = [lo] + sorted({float(p) for p in points if lo < p < hi}) + [hi]
    total = 0.0
    err = 0.0
    for l, r in zip(cuts[:-1], cuts[1:]):
        v, e = _segment(f, l, r, epsabs, epsrel, limit)
        total += v
        err += e
    if err > 100.0 * max(epsabs, epsrel * abs(total)) and err > 1e-9 * max(1.0, abs(total)):
        raise QuadratureError(f"integral on [{lo}, {hi}] has error estimate {err:.3g}")
    return (total, err) if full_output else total


def integrate_mp(f, lo, hi, points: Iterable = ()):
    """Integrate an mp-valued ``f`` at the ambient mpmath precision."""
    lo = mp.mpf(lo)
    hi = mp.mpf(hi) if not (isinstance(hi, float) and math.isinf(hi)) else mp.inf
    cuts = [lo] + sorted({mp.mpf(p) for p in points if lo < p < hi}) + [hi]
    return mp.quad(f, cuts)
