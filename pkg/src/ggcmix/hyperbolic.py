"""Hyperbolic coordinates ``x = u v``, ``y = u / v`` and the HM_k detector.

For a density ``f`` and a centre ``u`` the slice ``h(w) = f(u v) f(u / v)`` is
a function of ``w = v + 1/v`` only.  ``f`` is HM_k when every slice has
``(-1)^j h^(j) >= 0`` for ``j < k`` and ``(-1)^(k-1) h^(k-1)`` non-increasing.
The detector replaces derivatives by Newton divided differences on a
geometric grid in ``w - 2``, which keeps the test meaningful for
discontinuous densities such as indicators.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np

from .dist import Density
from .errors import DomainError, SplitSupportError


def v_of_w(w):
    """Root ``v >= 1`` of ``v + 1/v = w``."""
    if w < 2:
        raise DomainError(f"w must be >= 2, got {w}")
    if isinstance(w, mp.mpf):
        return (w + mp.sqrt((w - 2) * (w + 2))) / 2
    return 0.5 * (w + math.sqrt((w - 2.0) * (w + 2.0)))


def h_slice(f: Density, u, w):
    """``f(u v) * f(u / v)`` with ``v = v_of_w(w)``."""
    if not u > 0:
        raise DomainError("u must be positive")
    v = v_of_w(w)
    if isinstance(u, mp.mpf) or isinstance(w, mp.mpf):
        return f.pdf_mp(u * v) * f.pdf_mp(u / v)
    return f.pdf(u * v) * f.pdf(u / v)


@dataclass(frozen=True)
class HMConfig:
    n_u: int = 33
    n_w: int = 65
    w_lo: float = 1e-4
    w_hi: float = 1.25
    tol_abs: float = 1e-10
    tol_rel: float = 1e-6
    precision: int = 256
    span_eps: float = 1e-6
    max_witnesses: int = 100
    u_grid: Optional[tuple] = None


@dataclass(frozen=True)
class Witness:
    u: float
    w: float
    j: int
    margin: float
    tol: float


@dataclass
class HMReport:
    order: int
    verdict: str
    witnesses: list
    grid: dict
    tolerance: dict
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "order": self.order,
            "witnesses": [{"u": x.u, "w": x.w, "j": x.j, "margin": x.margin} for x in self.witnesses],
            "grid": self.grid,
            "tolerance": self.tolerance,
            "meta": self.meta,
        }


def _guarded(f: Density):
    """Density evaluator that answers 0 off the support without consulting ``f``."""
    l, r = f.support

    def ev(x):
        if x < l or x > r or x <= 0:
            return mp.mpf(0)
        return f.pdf_mp(x)

    return ev


def _divided_differences(xs, ys, order):
    """Yield ``(j, i, D)`` for every Newton divided difference up to ``order``."""
    table = list(ys)
    yield from ((0, i, y) for i, y in enumerate(table))
    for j in range(1, order + 1):
        table = [(table[i + 1] - table[i]) / (xs[i + j] - xs[i]) for i in range(len(table) - 1)]
        yield from ((j, i, d) for i, d in enumerate(table))


def _u_grid(f: Density, cfg: HMConfig):
    if cfg.u_grid is not None:
        return [float(u) for u in cfg.u_grid]
    lo, hi = f.span(cfg.span_eps)
    edges = np.geomspace(lo, hi, cfg.n_u + 1)
    return list(np.sqrt(edges[:-1] * edges[1:]))


def hm_test(f: Density, k: int, cfg: HMConfig = HMConfig()) -> HMReport:
    """Check HM_k of ``f`` on a (u, w) grid by signed divided differences."""
    if int(k) != k or k < 1:
        raise DomainError("order must be a positive integer")
    k = int(k)
    lo, hi = f.span(cfg.span_eps)
    ev = _guarded(f)
    us = _u_grid(f, cfg)
    frac = np.geomspace(cfg.w_lo, cfg.w_hi, cfg.n_w)
    found = []
    nonzero = False
    with mp.workprec(cfg.precision):
        for u in us:
            v_edge = min(hi / u, u / lo)
            if v_edge <= 1.0:
                continue
            w_edge = v_edge + 1.0 / v_edge
            ws = [mp.mpf(2) + mp.mpf(float(c)) * (w_edge - 2.0) for c in frac]
            mu = mp.mpf(u)
            hs = []
            for w in ws:
                v = v_of_w(w)
                hs.append(ev(mu * v) * ev(mu / v))
            if any(h != 0 for h in hs):
                nonzero = True
            for j, i, d in _divided_differences(ws, hs, k):
                margin = d if j % 2 == 0 else -d
                if margin >= 0:
                    continue
                span = ws[i + j] - ws[i] if j else mp.mpf(1)
                scale = max(abs(h) for h in hs[i:i + j + 1]) / span ** j
                tol = cfg.tol_abs + cfg.tol_rel * scale
                if margin < -tol:
                    found.append(Witness(float(u), float(ws[i]), j, float(margin), float(tol)))
    found.sort(key=lambda x: (x.margin / x.tol, x.u, x.w, x.j))
    report = HMReport(
        order=k,
        verdict="fail" if found else "pass",
        witnesses=found[: cfg.max_witnesses],
        grid={"u": [float(u) for u in us], "w_minus_2_fractions": [float(c) for c in frac],
              "span": [lo, hi]},
        tolerance={"abs": cfg.tol_abs, "rel": cfg.tol_rel, "precision_bits": cfg.precision},
        meta={"violations": len(found), "vacuous": not nonzero},
    )
    return report


@dataclass
class LogConcavityReport:
    logconcave: bool
    hm1_certificate: bool
    psi: list
    witnesses: list

    @property
    def verdict(self):
        return "pass" if self.logconcave else "fail"

    def to_dict(self):
        return asdict(self)


def logconcavity_test(f: Density, n: int = 201, tol_rel: float = 1e-6,
                      span_eps: float = 1e-6) -> LogConcavityReport:
    """Concavity of ``log f`` in ``x`` and monotonicity of ``psi(x) = -x (log f)'(x)``.

    ``psi`` non-decreasing is equivalent to ``log X`` having a log-concave
    density, i.e. to ``f`` being HM_1.
    """
    lo, hi = f.span(span_eps)
    xs = np.geomspace(lo, hi, n + 2)[1:-1]
    vals = np.array([f.pdf(float(x)) for x in xs])
    pos = np.nonzero(vals > 0)[0]
    if pos.size == 0:
        raise SplitSupportError("density vanishes on the whole sampled span")
    if np.any(vals[pos[0]:pos[-1] + 1] <= 0):
        raise SplitSupportError("density has interior zeros")
    xs = xs[pos[0]:pos[-1] + 1]
    lf = np.log(vals[pos[0]:pos[-1] + 1])
    witnesses = []
    concave = True
    for i in range(1, len(xs) - 1):
        d1 = (lf[i] - lf[i - 1]) / (xs[i] - xs[i - 1])
        d2 = (lf[i + 1] - lf[i]) / (xs[i + 1] - xs[i])
        second = (d2 - d1) / (xs[i + 1] - xs[i - 1])
        scale = max(abs(lf[i - 1:i + 2]).max(), 1.0) / (xs[i + 1] - xs[i - 1]) ** 2
        if second > tol_rel * scale:
            concave = False
            witnesses.append({"x": float(xs[i]), "kind": "logconcave", "margin": float(-second)})
    ly = np.log(xs)
    psi = -(lf[2:] - lf[:-2]) / (ly[2:] - ly[:-2])
    psi_x = xs[1:-1]
    certificate = True
    for i in range(len(psi) - 1):
        drop = psi[i] - psi[i + 1]
        scale = max(abs(psi[i]), abs(psi[i + 1]), 1.0)
        if drop > tol_rel * scale:
            certificate = False
            witnesses.append({"x": float(psi_x[i]), "kind": "psi", "margin": float(-drop)})
    return LogConcavityReport(
        logconcave=concave,
        hm1_certificate=certificate,
        psi=[(float(x), float(p)) for x, p in zip(psi_x, psi)],
        witnesses=witnesses[:100],
    )
