"""Products and ratios of independent positive variables.

``product_density(fY, fX, z) = int f_Y(z / x) f_X(x) dx / x`` and
``ratio_density(fY, fX, z) = int x f_Y(z x) f_X(x) dx`` are evaluated pointwise by
quadrature over the part of the support of ``X`` where the integrand lives.
The catalog collects four Gamma(k) mixtures with closed-form transforms and
densities; ``E1`` below is the exponential integral ``int_1^inf exp(-x y) / y dy``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, ClassVar

import mpmath as mp
import numpy as np
from scipy import special

from .dist import Density, Gamma, PowerOf, Tilted, TriangularDown, Uniform, from_dict, register
from .errors import CatalogError, DomainError
from .quadrature import integrate, integrate_mp

QUAD_DPS = 30
OPS = ("product", "ratio")


def _limits(fY: Density, fX: Density, z, op):
    lY, rY = fY.support
    lX, rX = fX.support
    if op == "product":
        # z / x in (lY, rY)  <=>  x in (z / rY, z / lY)
        a = z / rY if math.isfinite(rY) else 0.0
        b = z / lY if lY > 0 else math.inf
    else:
        # z x in (lY, rY)  <=>  x in (lY / z, rY / z)
        a = lY / z
        b = rY / z if math.isfinite(rY) else math.inf
    return max(a, lX), min(b, rX)


def _cuts(fY: Density, fX: Density, z, op, lo, hi):
    pts = list(fX.breakpoints())
    # where the bulk of Y sits in the x variable
    for p in (*fY.breakpoints(), _median(fY)):
        pts.append(z / p if op == "product" else p / z)
    return [p for p in pts if lo < p < hi]


@functools.lru_cache(maxsize=256)
def _median(f: Density) -> float:
    return f.ppf(0.5)


def _mixture(fY: Density, fX: Density, z, op):
    if op not in OPS:
        raise DomainError(f"unknown mixture operation {op!r}")
    if not z > 0:
        raise DomainError(f"mixture density argument must be positive, got {z}")
    use_mp = isinstance(z, mp.mpf)
    lo, hi = _limits(fY, fX, float(z), op)
    if not lo < hi:
        return mp.mpf(0) if use_mp else 0.0
    pts = _cuts(fY, fX, float(z), op, lo, hi)
    if use_mp:
        if op == "product":
            g = lambda x: fY.pdf_mp(z / x) * fX.pdf_mp(x) / x
        else:
            g = lambda x: x * fY.pdf_mp(z * x) * fX.pdf_mp(x)
        with mp.workdps(min(mp.mp.dps, QUAD_DPS)):
            val = integrate_mp(g, lo, hi, pts)
        return +val
    if op == "product":
        # (1/z) int y f_Y(y) f_X(x) dx with y = z / x keeps the integrand
        # bounded when f_X is singular at 0 and z is tiny
        def g(x):
            y = z / x
            return 0.0 if math.isinf(y) else y * fY.pdf(y) * fX.pdf(x)

        return integrate(g, lo, hi, pts) / z

    def g(x):
        y = z * x
        return 0.0 if math.isinf(y) else x * fY.pdf(y) * fX.pdf(x)

    return integrate(g, lo, hi, pts)


def product_density(fY: Density, fX: Density, z):
    """Density of ``Y * X`` at ``z``."""
    return _mixture(fY, fX, z, "product")


def ratio_density(fY: Density, fX: Density, z):
    """Density of ``Y / X`` at ``z``."""
    return _mixture(fY, fX, z, "ratio")


@register
@dataclass(frozen=True)
class MixtureDensity(Density):
    """Law of ``left * right`` (``op="product"``) or ``left / right`` (``op="ratio"``)."""

    left: Density
    right: Density
    op: str = "product"

    family: ClassVar[str] = "mixture"

    def __post_init__(self):
        object.__setattr__(self, "left", from_dict(self.left))
        object.__setattr__(self, "right", from_dict(self.right))
        if self.op not in OPS:
            raise DomainError(f"unknown mixture operation {self.op!r}")

    @property
    def support(self):
        lY, rY = self.left.support
        lX, rX = self.right.support
        if self.op == "product":
            return (lY * lX, rY * rX)
        lo = lY / rX if math.isfinite(rX) else 0.0
        hi = rY / lX if lX > 0 else math.inf
        return (lo, hi)

    def pdf(self, z):
        return _mixture(self.left, self.right, z, self.op) if z > 0 else 0.0

    def pdf_mp(self, z):
        z = mp.mpf(z)
        return _mixture(self.left, self.right, z, self.op) if z > 0 else mp.mpf(0)

    def span(self, eps=1e-6):
        lY, hY = self.left.span(eps)
        lX, hX = self.right.span(eps)
        if self.op == "product":
            return (lY * lX, hY * hX)
        return (lY / hX, hY / lX)

    def rvs(self, n, rng):
        y = self.left.rvs(n, rng)
        x = self.right.rvs(n, rng)
        return y * x if self.op == "product" else y / x

    def params(self):
        return {"left": self.left.to_dict(), "right": self.right.to_dict(), "op": self.op}


# ---------------------------------------------------------------------------
# closed forms


def e1(x):
    """``int_1^inf exp(-x y) / y dy`` for float or mpf ``x > 0``."""
    if isinstance(x, mp.mpf):
        return mp.e1(x)
    return float(special.exp1(x))


def _closed(fn: Callable) -> Callable:
    """Evaluate ``fn`` in mpmath with guard digits; floats in, floats out."""

    def wrapped(x):
        # small arguments cancel about three digits per decade
        guard = 20 + (int(3 * -math.log10(float(x))) if 0 < x < 1 else 0)
        if isinstance(x, mp.mpf):
            with mp.workdps(mp.mp.dps + guard):
                val = fn(mp.mpf(x))
            return +val
        with mp.workdps(20 + guard):
            return float(fn(mp.mpf(x)))

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


@_closed
def _lt_yu(s):
    return mp.log1p(s) / s if s else mp.mpf(1)


@_closed
def _pdf_yu(x):
    return mp.e1(x)


@_closed
def _lt_y_over_u(s):
    return 1 + s * mp.log(s / (1 + s)) if s else mp.mpf(1)


@_closed
def _pdf_y_over_u(x):
    return (1 - (1 + x) * mp.exp(-x)) / x ** 2


@_closed
def _lt_yx2(s):
    return (2 / s) * (1 - mp.log1p(s) / s) if s else mp.mpf(1)


@_closed
def _pdf_yx2(x):
    return 2 * mp.exp(-x) - 2 * x * mp.e1(x)


@_closed
def _lt_y_over_x2(s):
    return 1 + 6 * s + (6 * s ** 2 + 4 * s) * mp.log(s / (1 + s)) if s else mp.mpf(1)


@_closed
def _pdf_y_over_x2(x):
    return (-12 + 4 * x + (2 * x ** 2 + 8 * x + 12) * mp.exp(-x)) / x ** 3


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    lt: Callable
    pdf: Callable
    construction: MixtureDensity
    k: int

    def to_dict(self):
        return {"name": self.name, "k": self.k, "construction": self.construction.to_dict()}


def _entries():
    u = Uniform(0.0, 1.0)
    tri = TriangularDown()
    return {
        "YU": CatalogEntry("YU", _lt_yu, _pdf_yu, MixtureDensity(Gamma(1, 1.0), u, "product"), 1),
        "Y/U": CatalogEntry("Y/U", _lt_y_over_u, _pdf_y_over_u, MixtureDensity(Gamma(1, 1.0), u, "ratio"), 1),
        "YX2": CatalogEntry("YX2", _lt_yx2, _pdf_yx2, MixtureDensity(Gamma(2, 1.0), tri, "product"), 2),
        "Y/X2": CatalogEntry("Y/X2", _lt_y_over_x2, _pdf_y_over_x2, MixtureDensity(Gamma(2, 1.0), tri, "ratio"), 2),
    }


CATALOG_NAMES = ("YU", "Y/U", "YX2", "Y/X2")


def catalog(name: str) -> CatalogEntry:
    try:
        return _entries()[name]
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; choose from {', '.join(CATALOG_NAMES)}") from None


def min_of_two_uniforms_as_product() -> MixtureDensity:
    """``U1 * U2**(1/2)``, an alternative construction of ``min(U1, U2)``."""
    return MixtureDensity(Uniform(0.0, 1.0), PowerOf(Uniform(0.0, 1.0), 0.5), "product")


# ---------------------------------------------------------------------------
# tilting and export


def tilt(f: Density, alpha: float = 0.0, delta: float = 0.0) -> Density:
    """Normalized ``x**(-alpha) * exp(-delta / x) * f(x)``."""
    if alpha == 0 and delta == 0:
        return f
    if isinstance(f, Gamma) and delta == 0 and f.shape - alpha > 0:
        return Gamma(f.shape - alpha, f.rate)
    return Tilted(f, alpha, delta)


def export_csv(f: Density, xs, path_or_file):
    """Write ``x,f(x)`` rows (UTF-8, LF)."""
    rows = ["x,f"] + [f"{float(x)!r},{float(f.pdf(float(x)))!r}" for x in xs]
    text = "\n".join(rows) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def default_grid(f: Density, n: int = 101):
    lo, hi = f.span()
    return np.geomspace(max(lo, 1e-12), hi, n)
