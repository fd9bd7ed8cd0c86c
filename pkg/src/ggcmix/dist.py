"""Densities on (0, inf), GGC Thorin parameterisation and seeded samplers.

Every density is an immutable object exposing three evaluators:

* ``pdf(x)`` for Python floats,
* ``pdf_array(x)`` for numpy arrays,
* ``pdf_mp(x)`` for mpmath numbers at the ambient precision.

Densities serialize to ``{"family": name, "params": {...}}``; nested
densities (``power-of``, ``scaled``, ``tilted``, mixtures) carry their base as a
nested dict under ``params["base"]`` (or ``left``/``right``).
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Iterable, Optional, Sequence

import mpmath as mp
import numpy as np
from scipy import interpolate, special

from .errors import (
    DomainError,
    ExtrapolationError,
    IntegrabilityError,
    NormalizationError,
    QuadratureError,
    UnsupportedSamplerError,
)
from .quadrature import QUAD_DPS, integrate, integrate_mp

INF = math.inf
FAMILIES: dict[str, type["Density"]] = {}


def register(cls):
    FAMILIES[cls.family] = cls
    return cls


def _gl_nodes(n=16):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


_GL_X, _GL_W = _gl_nodes()


class Density:
    """Base class for a probability density on a sub-interval of (0, inf)."""

    family: ClassVar[str] = ""
    positional: ClassVar[tuple[str, ...]] = ()

    # -- required ---------------------------------------------------------
    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def pdf_mp(self, x):
        return mp.mpf(self.pdf(float(x)))

    # -- defaults ---------------------------------------------------------
    def pdf_array(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.vectorize(self.pdf, otypes=[float])(x)

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def mass(self) -> float:
        """Total mass by quadrature over the support."""
        return _quadrature_mass(self)

    def _inside(self, x) -> bool:
        l, r = self.support
        return l < x < r

    def cdf(self, x: float) -> float:
        l, r = self.support
        if x <= l:
            return 0.0
        if x >= r:
            return 1.0
        pts = [p for p in self.breakpoints() if l < p < x]
        return min(1.0, max(0.0, integrate(self.pdf, l, x, pts)))

    def cdf_array(self, x) -> np.ndarray:
        """Vectorized CDF: tabulated cumulative mass plus Gauss-Legendre on the last cell."""
        x = np.asarray(x, dtype=float)
        xs, cum = _cdf_grid(self)
        xc = np.clip(x, xs[0], xs[-1])
        idx = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, len(xs) - 2)
        a = xs[idx]
        half = 0.5 * (xc - a)
        nodes = a[..., None] + half[..., None] * (_GL_X + 1.0)
        part = half * (self.pdf_array(nodes) @ _GL_W)
        return np.clip((cum[idx] + part) / cum[-1], 0.0, 1.0)

    def ppf(self, q: float) -> float:
        """Quantile by bisection on :meth:`cdf` (log-space when unbounded)."""
        if not 0.0 < q < 1.0:
            raise DomainError(f"quantile level {q} outside (0, 1)")
        l, r = self.support
        lo = l if l > 0 else min(1e-300, 1e-12 * (r if math.isfinite(r) else 1.0))
        hi = r if math.isfinite(r) else max(2.0 * lo, 1.0)
        while math.isinf(r) and self.cdf(hi) < q:
            hi *= 4.0
            if hi > 1e300:
                break
        geometric = l == 0 or math.isinf(r)
        for _ in range(200):
            mid = math.sqrt(lo * hi) if geometric and lo > 0 else 0.5 * (lo + hi)
            if self.cdf(mid) < q:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * hi:
                break
        return 0.5 * (lo + hi)

    def span(self, eps: float = 1e-6) -> tuple[float, float]:
        """A finite interval inside the support holding all but ``2 * eps`` mass."""
        l, r = self.support
        lo = l if l > 0 else self.ppf(eps)
        hi = r if math.isfinite(r) else self.ppf(1.0 - eps)
        return lo, hi

    def rvs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _inverse_cdf_sample(self, n, rng)

    # -- serialization ----------------------------------------------------
    def params(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "params": self.params()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_params(cls, params: dict[str, Any]) -> "Density":
        return cls(**params)


# ---------------------------------------------------------------------------
# closed-form families


@register
@dataclass(frozen=True)
class Gamma(Density):
    shape: float
    rate: float = 1.0

    family: ClassVar[str] = "gamma"
    positional: ClassVar[tuple[str, ...]] = ("shape", "rate")

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError("gamma needs shape > 0 and rate > 0")

    @property
    def support(self):
        return (0.0, INF)

    def pdf(self, x):
        if x <= 0:
            return 0.0
        k, th = self.shape, self.rate
        return math.exp((k - 1) * math.log(x) + k * math.log(th) - th * x - math.lgamma(k))

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = x > 0
        k, th = self.shape, self.rate
        out[m] = np.exp((k - 1) * np.log(x[m]) + k * math.log(th) - th * x[m] - math.lgamma(k))
        return out

    def pdf_mp(self, x):
        x = mp.mpf(x)
        if x <= 0:
            return mp.mpf(0)
        k, th = mp.mpf(self.shape), mp.mpf(self.rate)
        return mp.exp((k - 1) * mp.log(x) + k * mp.log(th) - th * x - mp.loggamma(k))

    def cdf(self, x):
        return float(special.gammainc(self.shape, self.rate * x)) if x > 0 else 0.0

    def ppf(self, q):
        return float(special.gammaincinv(self.shape, q)) / self.rate

    def rvs(self, n, rng):
        return rng.gamma(self.shape, 1.0 / self.rate, size=n)

    def params(self):
        return {"shape": self.shape, "rate": self.rate}


@register
@dataclass(frozen=True)
class Uniform(Density):
    a: float
    b: float

    family: ClassVar[str] = "uniform"
    positional: ClassVar[tuple[str, ...]] = ("a", "b")

    def __post_init__(self):
        if not (0 <= self.a < self.b < INF):
            raise DomainError("uniform needs 0 <= a < b < inf")

    @property
    def support(self):
        return (float(self.a), float(self.b))

    def pdf(self, x):
        return 1.0 / (self.b - self.a) if self.a < x < self.b else 0.0

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x > self.a) & (x < self.b), 1.0 / (self.b - self.a), 0.0)

    def pdf_mp(self, x):
        return 1 / (mp.mpf(self.b) - self.a) if self.a < x < self.b else mp.mpf(0)

    def cdf(self, x):
        return min(1.0, max(0.0, (x - self.a) / (self.b - self.a)))

    def ppf(self, q):
        return self.a + q * (self.b - self.a)

    def rvs(self, n, rng):
        return rng.uniform(self.a, self.b, size=n)

    def params(self):
        return {"a": self.a, "b": self.b}


@register
@dataclass(frozen=True)
class IndicatorInterval(Uniform):
    """Normalized indicator of ``(l, r)``."""

    family: ClassVar[str] = "indicator-interval"

    @classmethod
    def from_params(cls, params):
        return cls(params["l"], params["r"])

    def params(self):
        return {"l": self.a, "r": self.b}


@register
@dataclass(frozen=True)
class Beta(Density):
    alpha: float
    beta: float

    family: ClassVar[str] = "beta"
    positional: ClassVar[tuple[str, ...]] = ("alpha", "beta")

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError("beta needs alpha, beta > 0")

    @property
    def support(self):
        return (0.0, 1.0)

    def _logc(self):
        return -float(special.betaln(self.alpha, self.beta))

    def pdf(self, x):
        if not 0 < x < 1:
            return 0.0
        return math.exp((self.alpha - 1) * math.log(x) + (self.beta - 1) * math.log1p(-x) + self._logc())

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = (x > 0) & (x < 1)
        out[m] = np.exp((self.alpha - 1) * np.log(x[m]) + (self.beta - 1) * np.log1p(-x[m]) + self._logc())
        return out

    def pdf_mp(self, x):
        x = mp.mpf(x)
        if not 0 < x < 1:
            return mp.mpf(0)
        a, b = mp.mpf(self.alpha), mp.mpf(self.beta)
        return x ** (a - 1) * (1 - x) ** (b - 1) / mp.beta(a, b)

    def cdf(self, x):
        return float(special.betainc(self.alpha, self.beta, min(max(x, 0.0), 1.0)))

    def ppf(self, q):
        return float(special.betaincinv(self.alpha, self.beta, q))

    def rvs(self, n, rng):
        return rng.beta(self.alpha, self.beta, size=n)

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}


@register
@dataclass(frozen=True)
class TriangularDown(Density):
    """``2 (1 - x)`` on (0, 1): the law of ``min(U1, U2)``."""

    family: ClassVar[str] = "triangular-down"

    @property
    def support(self):
        return (0.0, 1.0)

    def pdf(self, x):
        return 2.0 * (1.0 - x) if 0 < x < 1 else 0.0

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x > 0) & (x < 1), 2.0 * (1.0 - x), 0.0)

    def pdf_mp(self, x):
        return 2 * (1 - mp.mpf(x)) if 0 < x < 1 else mp.mpf(0)

    def cdf(self, x):
        x = min(max(x, 0.0), 1.0)
        return 1.0 - (1.0 - x) ** 2

    def ppf(self, q):
        return 1.0 - math.sqrt(1.0 - q)

    def rvs(self, n, rng):
        return 1.0 - np.sqrt(1.0 - rng.random(n))

    def params(self):
        return {}


@register
@dataclass(frozen=True)
class UniformProduct(Density):
    """Law of ``U1 * ... * Uk``: ``(-log x)^(k-1) / (k-1)!`` on (0, 1)."""

    count: int

    family: ClassVar[str] = "uniform-product"
    positional: ClassVar[tuple[str, ...]] = ("count",)

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise DomainError("uniform-product needs an integer count >= 1")
        object.__setattr__(self, "count", int(self.count))

    @property
    def support(self):
        return (0.0, 1.0)

    def pdf(self, x):
        if not 0 < x < 1:
            return 0.0
        k = self.count
        return (-math.log(x)) ** (k - 1) / math.factorial(k - 1)

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = (x > 0) & (x < 1)
        out[m] = (-np.log(x[m])) ** (self.count - 1) / math.factorial(self.count - 1)
        return out

    def pdf_mp(self, x):
        x = mp.mpf(x)
        if not 0 < x < 1:
            return mp.mpf(0)
        return (-mp.log(x)) ** (self.count - 1) / mp.factorial(self.count - 1)

    def cdf(self, x):
        if x <= 0:
            return 0.0
        if x >= 1:
            return 1.0
        return float(special.gammaincc(self.count, -math.log(x)))

    def ppf(self, q):
        return math.exp(-float(special.gammainccinv(self.count, q)))

    def rvs(self, n, rng):
        return np.exp(-rng.gamma(self.count, 1.0, size=n))

    def params(self):
        return {"count": self.count}


@register
@dataclass(frozen=True)
class ShiftedGamma(Density):
    shape: float
    rate: float
    shift: float

    family: ClassVar[str] = "shifted-gamma"
    positional: ClassVar[tuple[str, ...]] = ("shape", "rate", "shift")

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0 and self.shift > 0):
            raise DomainError("shifted-gamma needs shape, rate, shift > 0")

    @property
    def _g(self):
        return Gamma(self.shape, self.rate)

    @property
    def support(self):
        return (float(self.shift), INF)

    def pdf(self, x):
        return self._g.pdf(x - self.shift)

    def pdf_array(self, x):
        return self._g.pdf_array(np.asarray(x, dtype=float) - self.shift)

    def pdf_mp(self, x):
        return self._g.pdf_mp(mp.mpf(x) - self.shift)

    def cdf(self, x):
        return self._g.cdf(x - self.shift)

    def ppf(self, q):
        return self.shift + self._g.ppf(q)

    def rvs(self, n, rng):
        return self.shift + self._g.rvs(n, rng)

    def params(self):
        return {"shape": self.shape, "rate": self.rate, "shift": self.shift}


# ---------------------------------------------------------------------------
# transformed densities


def _nested(d):
    return d if isinstance(d, Density) else from_dict(d)


@register
@dataclass(frozen=True)
class PowerOf(Density):
    """Law of ``X**q`` for ``X ~ base``."""

    base: Density
    q: float

    family: ClassVar[str] = "power-of"

    def __post_init__(self):
        object.__setattr__(self, "base", _nested(self.base))
        if self.q == 0:
            raise DomainError("power-of needs q != 0")

    def _map(self, x):
        if x == 0:
            return 0.0 if self.q > 0 else INF
        if math.isinf(x):
            return INF if self.q > 0 else 0.0
        e = self.q * math.log(x)
        return INF if e > 709.0 else math.exp(e)

    @property
    def support(self):
        l, r = self.base.support
        a, b = self._map(l), self._map(r)
        return (min(a, b), max(a, b))

    def pdf(self, y):
        if y <= 0:
            return 0.0
        lx = math.log(y) / self.q
        if lx > 709.0:
            return 0.0
        x = math.exp(lx)
        return self.base.pdf(x) * abs(1.0 / self.q) * x / y

    def pdf_array(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        m = y > 0
        with np.errstate(over="ignore"):
            x = y[m] ** (1.0 / self.q)
        out[m] = self.base.pdf_array(x) * abs(1.0 / self.q) * x / y[m]
        out[~np.isfinite(out)] = 0.0
        return out

    def pdf_mp(self, y):
        y = mp.mpf(y)
        if y <= 0:
            return mp.mpf(0)
        x = y ** (1 / mp.mpf(self.q))
        return self.base.pdf_mp(x) * abs(1 / mp.mpf(self.q)) * x / y

    def mass(self):
        # a monotone change of variables preserves mass; the mapped support
        # endpoints are rounded, so integrate in base coordinates
        return self.base.mass()

    def breakpoints(self):
        return tuple(sorted(self._map(p) for p in self.base.breakpoints()))

    def cdf(self, y):
        if y <= 0:
            return 0.0
        x = y ** (1.0 / self.q)
        return self.base.cdf(x) if self.q > 0 else 1.0 - self.base.cdf(x)

    def ppf(self, p):
        if self.q > 0:
            return self.base.ppf(p) ** self.q
        return self.base.ppf(1.0 - p) ** self.q

    def span(self, eps=1e-6):
        lo, hi = self.base.span(eps)
        a, b = self._map(lo), self._map(hi)
        return (min(a, b), max(a, b))

    def rvs(self, n, rng):
        return self.base.rvs(n, rng) ** self.q

    def params(self):
        return {"base": self.base.to_dict(), "q": self.q}


@register
@dataclass(frozen=True)
class Scaled(Density):
    """Law of ``c * X`` for ``X ~ base``."""

    base: Density
    c: float

    family: ClassVar[str] = "scaled"

    def __post_init__(self):
        object.__setattr__(self, "base", _nested(self.base))
        if not self.c > 0:
            raise DomainError("scaled needs c > 0")

    @property
    def support(self):
        l, r = self.base.support
        return (l * self.c, r * self.c)

    def pdf(self, y):
        return self.base.pdf(y / self.c) / self.c

    def pdf_array(self, y):
        return self.base.pdf_array(np.asarray(y, dtype=float) / self.c) / self.c

    def pdf_mp(self, y):
        c = mp.mpf(self.c)
        return self.base.pdf_mp(mp.mpf(y) / c) / c

    def mass(self):
        # a monotone change of variables preserves mass; the mapped support
        # endpoints are rounded, so integrate in base coordinates
        return self.base.mass()

    def breakpoints(self):
        return tuple(p * self.c for p in self.base.breakpoints())

    def cdf(self, y):
        return self.base.cdf(y / self.c)

    def ppf(self, q):
        return self.c * self.base.ppf(q)

    def span(self, eps=1e-6):
        lo, hi = self.base.span(eps)
        return (lo * self.c, hi * self.c)

    def rvs(self, n, rng):
        return self.c * self.base.rvs(n, rng)

    def params(self):
        return {"base": self.base.to_dict(), "c": self.c}


def _local_exponent_at_zero(f: Density) -> Optional[float]:
    """log-log slope of ``f`` between 1e-120 and 1e-60, None if f vanishes there."""
    x1, x2 = 1e-120, 1e-60
    f1, f2 = f.pdf(x1), f.pdf(x2)
    if f1 <= 0 or f2 <= 0:
        return None
    return (math.log(f2) - math.log(f1)) / (math.log(x2) - math.log(x1))


@register
@dataclass(frozen=True)
class Tilted(Density):
    """Normalized ``x**(-alpha) * exp(-delta / x) * f(x)``."""

    base: Density
    alpha: float = 0.0
    delta: float = 0.0
    _z: float = field(default=0.0, repr=False, compare=False)

    family: ClassVar[str] = "tilted"

    def __post_init__(self):
        object.__setattr__(self, "base", _nested(self.base))
        if self.alpha < 0 or self.delta < 0:
            raise DomainError("tilted needs alpha >= 0 and delta >= 0")
        l, _ = self.base.support
        if self.delta == 0 and self.alpha > 0 and l == 0:
            gamma = _local_exponent_at_zero(self.base)
            if gamma is not None and gamma - self.alpha <= -1.0 + 1e-9:
                raise IntegrabilityError(
                    f"x^-{self.alpha} f(x) is not integrable at 0 (local exponent {gamma:.3g})")
        try:
            z = self._raw_mass()
        except QuadratureError as exc:
            raise IntegrabilityError(f"tilted density not integrable: {exc}") from exc
        if not (z > 0 and math.isfinite(z)):
            raise IntegrabilityError("tilted density has no finite positive mass")
        object.__setattr__(self, "_z", z)

    def _weight(self, x):
        if x <= 0:
            return 0.0
        return math.exp(min(-self.alpha * math.log(x) - self.delta / x, 709.0))

    def _raw_mass(self):
        l, r = self.base.support
        return integrate(lambda x: self._weight(x) * self.base.pdf(x), l, r, self.base.breakpoints())

    @property
    def support(self):
        return self.base.support

    def breakpoints(self):
        return self.base.breakpoints()

    def pdf(self, x):
        return self._weight(x) * self.base.pdf(x) / self._z

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = x > 0
        w = np.exp(np.minimum(-self.alpha * np.log(x[m]) - self.delta / x[m], 709.0))
        out[m] = w * self.base.pdf_array(x[m]) / self._z
        return out

    def pdf_mp(self, x):
        x = mp.mpf(x)
        if x <= 0:
            return mp.mpf(0)
        w = x ** (-mp.mpf(self.alpha))
        if self.delta:
            w *= mp.exp(-mp.mpf(self.delta) / x)
        return w * self.base.pdf_mp(x) / self._z

    def span(self, eps=1e-6):
        lo, hi = self.base.span(eps)
        l, r = self.support
        lo2 = self.ppf(eps) if l == 0 else l
        hi2 = self.ppf(1 - eps) if math.isinf(r) else r
        return (min(lo, lo2) if l == 0 else lo2, hi2)

    def params(self):
        return {"base": self.base.to_dict(), "alpha": self.alpha, "delta": self.delta}

    @classmethod
    def from_params(cls, params):
        return cls(params["base"], params.get("alpha", 0.0), params.get("delta", 0.0))


@register
@dataclass(frozen=True)
class Table(Density):
    """Tabulated density on a positive grid.

    ``interp`` is ``"pchip"`` (monotone cubic, never negative), ``"step"``
    (value ``values[i]`` on ``[grid[i], grid[i+1])``), ``"nearest"`` or
    ``"loglinear"`` (power law between nodes, i.e. linear in log-log
    coordinates; a cell with a zero endpoint is zero).
    ``outside`` decides what happens off the grid: ``"error"`` raises
    :class:`ExtrapolationError`, ``"zero"`` returns 0.
    """

    grid: tuple
    values: tuple
    interp: str = "pchip"
    outside: str = "error"
    normalize: bool = True

    family: ClassVar[str] = "table"

    def __post_init__(self):
        g = tuple(float(v) for v in self.grid)
        v = tuple(float(v) for v in self.values)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if len(g) < 2 or len(g) != len(v):
            raise DomainError("table needs matching grid/values of length >= 2")
        if g[0] < 0 or any(b <= a for a, b in zip(g, g[1:])):
            raise DomainError("table grid must be increasing and nonnegative")
        if any(x < 0 for x in v):
            raise DomainError("table values must be nonnegative")
        if self.interp not in ("pchip", "step", "nearest", "loglinear"):
            raise DomainError(f"unknown interpolation rule {self.interp!r}")
        if self.interp == "loglinear" and g[0] <= 0:
            raise DomainError("loglinear tables need a positive grid")
        if self.outside not in ("error", "zero"):
            raise DomainError(f"unknown outside rule {self.outside!r}")
        x = np.array(g)
        y = np.array(v)
        if self.interp == "pchip":
            raw = interpolate.PchipInterpolator(x, y, extrapolate=False)
            mass = float(raw.integrate(x[0], x[-1]))
        elif self.interp == "step":
            raw = None
            mass = float(np.sum(y[:-1] * np.diff(x)))
        elif self.interp == "loglinear":
            raw = _loglinear_pieces(x, y)
            mass = float(raw[1][-1])
        else:
            raw = None
            mid = 0.5 * (x[1:] + x[:-1])
            edges = np.concatenate([[x[0]], mid, [x[-1]]])
            mass = float(np.sum(y * np.diff(edges)))
        if not mass > 0:
            raise DomainError("table has zero mass")
        object.__setattr__(self, "_raw", raw)
        object.__setattr__(self, "_scale", 1.0 / mass if self.normalize else 1.0)
        object.__setattr__(self, "_mass", mass)

    @property
    def support(self):
        return (self.grid[0], self.grid[-1])

    def breakpoints(self):
        return self.grid[1:-1] if len(self.grid) < 200 else ()

    def _off_grid(self, x):
        if self.outside == "error":
            raise ExtrapolationError(f"table queried at {x} outside [{self.grid[0]}, {self.grid[-1]}]")
        return 0.0

    def _value(self, x):
        g = self.grid
        if self.interp == "pchip":
            return max(0.0, float(self._raw(x)))
        if self.interp == "loglinear":
            return float(self.pdf_array(np.array([x]))[0]) / self._scale
        i = bisect.bisect_right(g, x) - 1
        if self.interp == "step":
            return self.values[min(i, len(g) - 2)]
        j = i + 1 if i + 1 < len(g) and (x - g[i]) > (g[i + 1] - x) else i
        return self.values[j]

    def pdf(self, x):
        if not self.grid[0] <= x <= self.grid[-1]:
            return self._off_grid(x)
        return self._value(x) * self._scale

    def pdf_array(self, x):
        x = np.asarray(x, dtype=float)
        g = np.asarray(self.grid)
        off = (x < g[0]) | (x > g[-1])
        if off.any() and self.outside == "error":
            self._off_grid(float(x[off].flat[0]))
        xc = np.clip(x, g[0], g[-1])
        if self.interp == "pchip":
            val = np.maximum(0.0, self._raw(xc))
        elif self.interp == "loglinear":
            gam = self._raw[0]
            i = np.clip(np.searchsorted(g, xc, side="right") - 1, 0, len(g) - 2)
            y0 = np.asarray(self.values)[i]
            with np.errstate(invalid="ignore", over="ignore"):
                val = np.where(np.isfinite(gam[i]), y0 * (xc / g[i]) ** np.nan_to_num(gam[i]), 0.0)
        else:
            i = np.clip(np.searchsorted(g, xc, side="right") - 1, 0, len(g) - 1)
            vals = np.asarray(self.values)
            if self.interp == "step":
                val = vals[np.minimum(i, len(g) - 2)]
            else:
                j = np.minimum(i + 1, len(g) - 1)
                val = np.where(xc - g[i] > g[j] - xc, vals[j], vals[i])
        return np.where(off, 0.0, val * self._scale)

    def pdf_mp(self, x):
        if not self.grid[0] <= x <= self.grid[-1]:
            return mp.mpf(self._off_grid(x))
        if self.interp == "step":
            # exact comparison against the grid keeps jump locations sharp
            i = bisect.bisect_right(self.grid, x) - 1
            return mp.mpf(self.values[min(i, len(self.grid) - 2)]) * mp.mpf(self._scale)
        if self.interp == "loglinear":
            i = min(bisect.bisect_right(self.grid, x) - 1, len(self.grid) - 2)
            gam = self._raw[0][i]
            if not math.isfinite(gam):
                return mp.mpf(0)
            g0, y0, g1, y1 = self.grid[i], self.values[i], self.grid[i + 1], self.values[i + 1]
            e = mp.log(mp.mpf(y1) / y0) / mp.log(mp.mpf(g1) / g0)
            return mp.mpf(y0) * (mp.mpf(x) / g0) ** e * mp.mpf(self._scale)
        return mp.mpf(self._value(float(x))) * mp.mpf(self._scale)

    def cdf(self, x):
        g = self.grid
        if x <= g[0]:
            return 0.0
        if x >= g[-1]:
            return 1.0 if self.normalize else self._mass
        if self.interp == "pchip":
            return float(self._raw.integrate(g[0], x)) * self._scale
        if self.interp == "step":
            i = bisect.bisect_right(g, x) - 1
            acc = sum(self.values[j] * (g[j + 1] - g[j]) for j in range(i))
            return (acc + self.values[i] * (x - g[i])) * self._scale
        if self.interp == "loglinear":
            gam, cum = self._raw
            i = bisect.bisect_right(g, x) - 1
            return (cum[i] + _power_piece(g[i], self.values[i], gam[i], x)) * self._scale
        return super().cdf(x)

    def span(self, eps=1e-6):
        return self.support

    def rvs(self, n, rng):
        if self.interp == "nearest":
            raise UnsupportedSamplerError("nearest-neighbour tables carry no CDF for sampling")
        if not self.normalize:
            raise UnsupportedSamplerError("unnormalized table cannot be sampled")
        return _inverse_cdf_sample(self, n, rng)

    def params(self):
        return {"grid": list(self.grid), "values": list(self.values), "interp": self.interp,
                "outside": self.outside, "normalize": self.normalize}


def _power_piece(x0, y0, gam, x1):
    """``int_{x0}^{x1} y0 (x / x0)^gam dx`` (zero when ``gam`` is not finite)."""
    if not math.isfinite(gam) or y0 == 0:
        return 0.0
    r = math.log(x1 / x0)
    if abs(gam + 1.0) * abs(r) < 1e-12:
        return y0 * x0 * r
    return y0 * x0 * math.expm1((gam + 1.0) * r) / (gam + 1.0)


def _loglinear_pieces(x, y):
    """Per-cell exponents (``inf`` marks a zero cell) and cumulative masses."""
    gam = np.full(len(x) - 1, np.inf)
    cum = [0.0]
    for i in range(len(x) - 1):
        if y[i] > 0 and y[i + 1] > 0:
            gam[i] = math.log(y[i + 1] / y[i]) / math.log(x[i + 1] / x[i])
        cum.append(cum[-1] + _power_piece(x[i], y[i], gam[i], x[i + 1]))
    return gam, np.array(cum)


# ---------------------------------------------------------------------------
# inverse-CDF sampling


def _cdf_grid(spec: Density, nodes: int = 2048):
    l, r = spec.support
    lo, hi = spec.span(1e-13)
    lo = l if l > 0 else lo
    hi = r if math.isfinite(r) else hi
    if lo > 0 and hi / lo > 50:
        xs = np.geomspace(lo, hi, nodes)
    else:
        xs = np.linspace(lo, hi, nodes)
    # geometric grading into finite endpoints where the density may be singular
    grade = np.geomspace(1e-12, 1.0, 48)[:-1]
    extra = [p for p in spec.breakpoints() if lo < p < hi]
    if lo == l:
        extra.extend(l + (xs[1] - l) * grade)
    if hi == r:
        extra.extend(r - (r - xs[-2]) * grade)
    xs = np.unique(np.concatenate([xs, extra]))
    a, b = xs[:-1], xs[1:]
    half = 0.5 * (b - a)
    nodes = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    pieces = half * (spec.pdf_array(nodes) @ _GL_W)
    if lo == l:
        pieces[0] = integrate(spec.pdf, a[0], b[0])
    if hi == r:
        pieces[-1] = integrate(spec.pdf, a[-1], b[-1])
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    return xs, cum


def _inverse_cdf_sample(spec: Density, n: int, rng: np.random.Generator,
                        xtol: float = 1e-12) -> np.ndarray:
    """Vectorized bisection on the CDF, bracketed by a tabulated grid."""
    xs, cum = _cdf_grid(spec)
    total = cum[-1]
    u = rng.random(n) * total
    idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(xs) - 2)
    a = xs[idx].copy()
    b = xs[idx + 1].copy()
    base = cum[idx]
    lo, hi = a.copy(), b.copy()
    while True:
        width = hi - lo
        if np.all(width <= xtol * np.maximum(1.0, hi)):
            break
        mid = 0.5 * (lo + hi)
        # Gauss-Legendre on [a, mid] for every sample at once
        half = 0.5 * (mid - a)
        nodes = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        part = half * (spec.pdf_array(nodes) @ _GL_W)
        below = base + part < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# GGC / Thorin parameterisation


@dataclass(frozen=True)
class ThorinSpec:
    """GGC with left extremity ``a`` and Thorin measure ``sum u_i delta_{t_i} + u(t) dt``."""

    a: float = 0.0
    atoms: tuple = ()
    u_density: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        atoms = tuple((float(t), float(u)) for t, u in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if self.a < 0:
            raise DomainError("left extremity must be >= 0")
        for t, u in atoms:
            if not (t > 0 and u > 0):
                raise DomainError("Thorin atoms need t > 0 and u > 0")
        if self.u_density is not None:
            self._check_density()

    def _check_density(self):
        g = self.u_density
        try:
            low = integrate(lambda t: abs(math.log(t)) * g(t), 0.0, 1.0)
            high = integrate(lambda t: g(t) / t, 1.0, INF)
        except QuadratureError as exc:
            raise IntegrabilityError(f"Thorin density not integrable: {exc}") from exc
        if not (math.isfinite(low) and math.isfinite(high)):
            raise IntegrabilityError("Thorin density violates the integrability conditions")

    @property
    def total_mass(self) -> float:
        m = sum(u for _, u in self.atoms)
        if self.u_density is not None:
            m += integrate(self.u_density, 0.0, INF)
        return m

    def to_dict(self):
        return {"a": self.a, "atoms": [[t, u] for t, u in self.atoms]}

    @classmethod
    def from_dict(cls, d):
        if "u_density" in d:
            raise DomainError("Thorin densities are not serializable; use atoms")
        return cls(a=float(d.get("a", 0.0)), atoms=tuple(tuple(x) for x in d.get("atoms", [])))


def ggc_laplace(spec: ThorinSpec, s):
    """Laplace transform of the GGC described by ``spec``.

    Float ``s`` gives a float; an ``mpf`` argument is evaluated at the ambient
    mpmath precision.
    """
    if s < 0:
        raise DomainError("Laplace argument must be >= 0")
    if isinstance(s, (mp.mpf, mp.mpc)):
        expo = -mp.mpf(spec.a) * s
        for t, u in spec.atoms:
            expo += u * mp.log(t / (t + s))
        if spec.u_density is not None and s != 0:
            g = spec.u_density
            expo += integrate_mp(lambda t: mp.log(t / (t + s)) * g(float(t)), 0, mp.inf)
        return mp.exp(expo)
    s = float(s)
    expo = -spec.a * s
    for t, u in spec.atoms:
        expo += u * (math.log(t) - math.log(t + s))
    if spec.u_density is not None and s != 0:
        g = spec.u_density
        try:
            expo += integrate(lambda t: -math.log1p(s / t) * g(t), 0.0, INF)
        except QuadratureError as exc:
            raise IntegrabilityError(f"Thorin density part diverges: {exc}") from exc
    return math.exp(expo)


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class SimBatch:
    samples: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", arr)
        if arr.size and not np.all(arr > 0):
            raise DomainError("SimBatch samples must be positive")

    def __len__(self):
        return self.samples.size

    def to_csv(self, path_or_file):
        lines = ["sample"] + [repr(float(v)) for v in self.samples]
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)

    @classmethod
    def from_csv(cls, path, seed=0, meta=None):
        with open(path, encoding="utf-8") as fh:
            rows = fh.read().split()
        return cls(np.array([float(v) for v in rows[1:]]), seed, meta or {})


def sample(spec: Density, n: int, seed: int) -> SimBatch:
    """Draw ``n`` samples with a fresh generator seeded by ``seed``."""
    if n < 1:
        raise DomainError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    draws = np.asarray(spec.rvs(n, rng), dtype=float)
    return SimBatch(draws, seed, {"generator": "numpy.PCG64", "density": spec.to_dict()})


# ---------------------------------------------------------------------------
# evaluation helpers


def eval_density(spec: Density, x: float) -> float:
    if not x > 0:
        raise DomainError(f"density argument must be positive, got {x}")
    return spec.pdf(x)


def normalization(spec: Density) -> float:
    return spec.mass()


def _quadrature_mass(spec: Density) -> float:
    """Falls back to mp quadrature when an endpoint singularity defeats doubles."""
    l, r = spec.support
    if not _edge_mass_unresolved(spec):
        try:
            return integrate(spec.pdf, l, r, spec.breakpoints())
        except QuadratureError:
            pass
    with mp.workdps(_mass_dps(spec)):
        return float(integrate_mp(spec.pdf_mp, l, r, spec.breakpoints()))


def _mass_dps(spec: Density, target: float = 12.0, cap: int = 2000) -> int:
    """Working digits so that mass lost within one ulp of a singular edge stays below 10^-target.

    Near a nonzero endpoint the density behaves like t^(b-1) in the distance t, and mp
    quadrature cannot place nodes closer than about 10^-dps, which drops t^b / b of mass.
    """
    dps = QUAD_DPS
    l, r = spec.support
    for e, sign in ((l, 1), (r, -1)):
        if e == 0.0 or math.isinf(e):
            continue
        with mp.workdps(60):
            t1, t2 = mp.mpf(10) ** -20, mp.mpf(10) ** -24
            f1, f2 = spec.pdf_mp(mp.mpf(e) + sign * t1), spec.pdf_mp(mp.mpf(e) + sign * t2)
            if not (f1 > 0 and f2 > 0):
                continue
            b = float(1 + (mp.log(f1) - mp.log(f2)) / (mp.log(t1) - mp.log(t2)))
        if b >= 1.0:
            continue
        if b <= 0.0:
            raise QuadratureError(f"density is not integrable at {e}")
        need = math.ceil((target + max(0.0, -math.log10(b))) / b) + 10
        if need > cap:
            raise QuadratureError(f"edge singularity at {e} needs {need} digits")
        dps = max(dps, need)
    return dps


def _edge_mass_unresolved(spec: Density, tol: float = 1e-10) -> bool:
    """True when a nonzero finite endpoint hides mass within a few ulps of it."""
    l, r = spec.support
    for e, sign in ((l, 1.0), (r, -1.0)):
        if e == 0.0 or math.isinf(e):
            continue
        d = 64.0 * math.ulp(e)
        if d * spec.pdf(e + sign * d) > tol:
            return True
    return False


def check_normalized(spec: Density, tol: float = 1e-6) -> float:
    z = normalization(spec)
    if abs(z - 1.0) > tol:
        raise NormalizationError(f"density integrates to {z}, not 1")
    return z


def from_dict(d: dict) -> Density:
    if isinstance(d, Density):
        return d
    try:
        cls = FAMILIES[d["family"]]
    except KeyError as exc:
        raise DomainError(f"unknown density family in {d!r}") from exc
    try:
        return cls.from_params(dict(d.get("params", {})))
    except (TypeError, KeyError) as exc:
        raise DomainError(f"bad parameters for {d['family']}: {exc}") from exc


def parse_density(text: str) -> Density:
    """Parse JSON (``{"family": ..., "params": ...}``) or shorthand ``name:p1,p2``."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise DomainError(f"malformed density JSON: {exc}") from exc
    name, _, rest = text.partition(":")
    cls = FAMILIES.get(name)
    if cls is None:
        raise DomainError(f"unknown density family {name!r}")
    args = [float(v) for v in rest.split(",") if v.strip()] if rest else []
    if len(args) > len(cls.positional) and cls.positional:
        raise DomainError(f"too many parameters for {name}")
    if not cls.positional and args:
        raise DomainError(f"{name} takes no parameters")
    try:
        return cls.from_params(dict(zip(cls.positional, args)))
    except (TypeError, KeyError) as exc:
        raise DomainError(f"bad parameters for {name}: {exc}") from exc
