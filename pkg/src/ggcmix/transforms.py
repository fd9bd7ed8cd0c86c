"""Laplace and generalized Stieltjes transforms; CM and HCM detectors.

Transforms accept a float (double-precision quadrature) or an ``mpf``
(mpmath tanh-sinh at ``QUAD_DPS`` digits, result returned at the ambient
precision).  The CM detector works on alternating forward differences
``(-1)^n Delta_h^n phi(s)`` evaluated in extended precision.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath as mp
import numpy as np

from .dist import Density, normalization
from .errors import DomainError, NormalizationError, PrecisionError
from .hyperbolic import v_of_w
from .quadrature import integrate, integrate_mp

QUAD_DPS = 30


@functools.lru_cache(maxsize=256)
def _mass(f: Density) -> float:
    return normalization(f)


def _is_mp(s):
    return isinstance(s, mp.mpf)


def _cuts(f: Density, extra=()):
    l, r = f.support
    return l, r, sorted({p for p in (*f.breakpoints(), *extra) if l < p < r})


@functools.lru_cache(maxsize=64)
def _node_values(f: Density) -> dict:
    return {}


def _cached_pdf(f: Density):
    # tanh-sinh nodes only depend on the cuts and the precision, so density
    # values are shared between every transform argument
    store = _node_values(f)

    def pdf(x):
        key = (x, mp.mp.prec)
        val = store.get(key)
        if val is None:
            val = store[key] = f.pdf_mp(x)
        return val

    return pdf


def _transform(f: Density, kernel_float, kernel_mp, s, scale_point):
    if _is_mp(s):
        l, r, pts = _cuts(f)
        pdf = _cached_pdf(f)
        with mp.workdps(min(mp.mp.dps, QUAD_DPS)):
            val = integrate_mp(lambda x: kernel_mp(x) * pdf(x), l, r, pts)
        return +val
    l, r, pts = _cuts(f, (scale_point,))
    return integrate(lambda x: kernel_float(x) * f.pdf(x), l, r, pts)


def laplace(f: Density, s):
    """``int exp(-s x) f(x) dx``."""
    if s < 0:
        raise DomainError("Laplace argument must be >= 0")
    z = _mass(f)
    if abs(z - 1.0) > 1e-6:
        raise NormalizationError(f"density integrates to {z}")
    if s == 0:
        return mp.mpf(1) if _is_mp(s) else 1.0
    return _transform(f, lambda x: math.exp(-s * x), lambda x: mp.exp(-s * x), s, 1.0 / float(s))


def _order(k):
    if not k > 0:
        raise DomainError("order k must be positive")
    return int(k) if float(k).is_integer() else k


def stieltjes_k(f: Density, k, s):
    """``int (x / (x + s))^k f(x) dx``: the Laplace transform of ``Y / X``, ``Y ~ Gamma(k, 1)``.

    ``k`` may be any positive real.
    """
    k = _order(k)
    if s < 0:
        raise DomainError("argument must be positive")
    if s == 0:
        return mp.mpf(1) if _is_mp(s) else 1.0
    return _transform(f, lambda x: (x / (x + s)) ** k, lambda x: (x / (x + s)) ** k, s, float(s))


def product_lt(f: Density, k, s):
    """``int (1 + s x)^(-k) f(x) dx``: the Laplace transform of ``Y X``, ``Y ~ Gamma(k, 1)``."""
    k = _order(k)
    if s < 0:
        raise DomainError("argument must be >= 0")
    if s == 0:
        return mp.mpf(1) if _is_mp(s) else 1.0
    return _transform(f, lambda x: (1.0 + s * x) ** (-k), lambda x: (1 + s * x) ** (-k), s, 1.0 / float(s))


# ---------------------------------------------------------------------------
# finite differences


def finite_diff(phi: Callable, s, n: int, h, precision: Optional[int] = None):
    """Forward difference ``Delta_h^n phi(s)`` in extended precision.

    Raises :class:`PrecisionError` when the result sits at the rounding
    floor of the working precision (an exact zero is accepted).
    """
    if n < 0 or int(n) != n:
        raise DomainError("difference order must be a nonnegative integer")
    if not h > 0:
        raise DomainError("step must be positive")
    prec = precision or mp.mp.prec
    with mp.workprec(prec):
        s, h = mp.mpf(s), mp.mpf(h)
        vals = [mp.mpf(phi(s + j * h)) for j in range(n + 1)]
        return _combine(vals, n, prec)


def _combine(vals, n, prec):
    total = mp.mpf(0)
    size = mp.mpf(0)
    for j in range(n + 1):
        term = (-1) ** (n - j) * mp.binomial(n, j) * vals[j]
        total += term
        size += abs(term)
    if total != 0 and n > 0 and abs(total) < size * mp.ldexp(1, -prec + n + 8):
        need = prec + int(mp.log(size / abs(total), 2)) + 64
        raise PrecisionError(f"order-{n} difference lost all {prec} bits", bits_needed=need)
    return total


@dataclass(frozen=True)
class CMConfig:
    n_s: int = 41
    h_factors: tuple = (0.125, 0.5, 2.0)
    tol_abs: float = 0.0
    tol_rel: float = 1e-20
    precision: int = 256
    max_precision: int = 2048
    max_witnesses: int = 100


@dataclass(frozen=True)
class CMWitness:
    s: float
    h: float
    n: int
    value: float
    tol: float


@dataclass
class CMReport:
    verdict: str
    n_max: int
    witnesses: list
    precision: int
    grid: dict
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "order": self.n_max,
            "witnesses": [{"s": x.s, "h": x.h, "n": x.n, "value": x.value} for x in self.witnesses],
            "grid": self.grid,
            "precision_bits": self.precision,
            "meta": self.meta,
        }


def cm_test(phi: Callable, interval=(1e-3, 1e3), n_max: int = 8,
            cfg: CMConfig = CMConfig()) -> CMReport:
    """Alternating forward differences of ``phi`` up to order ``n_max``.

    ``phi`` is called with ``mpf`` arguments at the current working precision.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    lo, hi = interval
    ss = np.geomspace(lo, hi, cfg.n_s)
    found = []
    used = cfg.precision
    unresolved = 0
    for s in ss:
        for fac in cfg.h_factors:
            h = float(s) * fac
            prec = cfg.precision
            while True:
                try:
                    with mp.workprec(prec):
                        xs = [mp.mpf(float(s)) + j * mp.mpf(h) for j in range(n_max + 1)]
                        try:
                            vals = [mp.mpf(phi(x)) for x in xs]
                        except Exception as exc:
                            raise type(exc)(f"{exc} (at s={float(s)!r}, h={h!r})") from exc
                        rows = []
                        for n in range(0, n_max + 1):
                            d = _combine(vals[: n + 1], n, prec)
                            size = sum(mp.binomial(n, j) * abs(vals[j]) for j in range(n + 1))
                            rows.append((n, (-1) ** n * d, cfg.tol_abs + cfg.tol_rel * size))
                    break
                except PrecisionError as exc:
                    if prec * 2 > cfg.max_precision:
                        unresolved += 1
                        rows = []
                        break
                    prec = max(prec * 2, min(exc.bits_needed or 0, cfg.max_precision))
            used = max(used, prec)
            for n, val, tol in rows:
                if val < -tol:
                    found.append(CMWitness(float(s), h, n, float(val), float(tol)))
    found.sort(key=lambda x: (x.value / x.tol if x.tol else -math.inf, x.s, x.h, x.n))
    return CMReport(
        verdict="fail" if found else "pass",
        n_max=n_max,
        witnesses=found[: cfg.max_witnesses],
        precision=used,
        grid={"s": [float(s) for s in ss], "h_factors": list(cfg.h_factors), "interval": [lo, hi]},
        meta={"violations": len(found), "unresolved": unresolved,
              "tolerance": {"abs": cfg.tol_abs, "rel": cfg.tol_rel}},
    )


# ---------------------------------------------------------------------------
# HCM


@dataclass(frozen=True)
class HCMConfig:
    u_grid: tuple = tuple(np.geomspace(1e-2, 1e2, 9))
    refine_u: tuple = ()
    w_max: float = 50.0
    omega_lo: float = 1e-3
    n_max: int = 8
    cm: CMConfig = CMConfig()

    def with_refinement(self, lo: float, hi: float, n: int = 17) -> "HCMConfig":
        """Extra centres ``u`` spread geometrically over ``[lo, hi]``."""
        return HCMConfig(self.u_grid, tuple(np.geomspace(lo, hi, n)), self.w_max,
                         self.omega_lo, self.n_max, self.cm)


@dataclass
class HCMReport:
    verdict: str
    per_u: dict
    grid: dict
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    @property
    def witnesses(self):
        out = []
        for u, rep in sorted(self.per_u.items()):
            out.extend({"u": u, "w": 2.0 + x.s, "h": x.h, "n": x.n, "value": x.value}
                       for x in rep.witnesses)
        return out

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "witnesses": self.witnesses,
            "per_u": {repr(u): r.to_dict() for u, r in sorted(self.per_u.items())},
            "grid": self.grid,
            "meta": self.meta,
        }


class _Memo:
    """Cache of ``phi`` keyed by (argument, precision)."""

    def __init__(self, phi):
        self.phi = phi
        self.store = {}

    def __call__(self, x):
        key = (x, mp.mp.prec)
        try:
            return self.store[key]
        except KeyError:
            val = self.store[key] = self.phi(x)
            return val


def hcm_test(phi: Callable, cfg: HCMConfig = HCMConfig()) -> HCMReport:
    """CM in ``w`` of ``H(w) = phi(u v) phi(u / v)`` for every ``u`` on the grid."""
    memo = _Memo(phi)
    us = sorted({float(u) for u in (*cfg.u_grid, *cfg.refine_u)})
    per_u = {}
    for u in us:
        mu = u

        def H(omega, mu=mu):
            v = v_of_w(2 + omega)
            return memo(mu * v) * memo(mu / v)

        per_u[u] = cm_test(H, (cfg.omega_lo, cfg.w_max - 2.0), cfg.n_max, cfg.cm)
    verdict = "pass" if all(r.passed for r in per_u.values()) else "fail"
    return HCMReport(
        verdict=verdict,
        per_u=per_u,
        grid={"u": us, "w_max": cfg.w_max, "omega_lo": cfg.omega_lo, "n_max": cfg.n_max},
        meta={"failing_u": [u for u, r in per_u.items() if not r.passed]},
    )
