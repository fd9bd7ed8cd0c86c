"""Applications to excursion times and exponential functionals of Levy processes.

* Atomic Krein measures ``K = sum kappa_i delta_{z_i}`` with an exponential
  clock of rate ``p``: the mixing density of the excursion time ``Y3`` and
  the ``Gamma(2)``-mixture density of ``Y3`` itself.
* Monte Carlo for ``I = int_0^inf exp(xi_t) dt`` when ``xi`` drifts to ``-inf``.
* The ladder-height factor ``I_H`` (scaled Beta or Gamma) with its HM order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath as mp
import numpy as np
from scipy import stats

from .dist import Beta, Density, Gamma, PowerOf, Scaled, SimBatch, Table, from_dict
from .errors import DegenerateError, DomainError, HorizonError
from .hyperbolic import HMConfig, HMReport, hm_test
from .quadrature import integrate
from .transforms import CMConfig, HCMConfig, HCMReport, hcm_test

TAIL_TOL = 1e-6

# ---------------------------------------------------------------------------
# Krein measures and excursion times


@dataclass(frozen=True)
class KreinAtoms:
    """Atomic Krein measure ``sum kappa_i delta_{z_i}`` and clock rate ``p``."""

    atoms: tuple
    p: float

    def __post_init__(self):
        atoms = tuple(sorted((float(z), float(k)) for z, k in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise DomainError("Krein measure needs at least one atom")
        if any(not (z > 0 and k > 0) for z, k in atoms):
            raise DomainError("Krein atoms need z > 0 and kappa > 0")
        if not self.p > 0:
            raise DomainError("clock rate p must be positive")

    def to_dict(self):
        return {"atoms": [[z, k] for z, k in self.atoms], "p": self.p}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(tuple(a) for a in d["atoms"]), float(d["p"]))


def psi(K: KreinAtoms, lam: Optional[float] = None) -> float:
    """``int (1 - exp(-lam x)) nu(x) dx = sum kappa_i lam / (z_i (z_i + lam))``, default ``lam = p``."""
    lam = K.p if lam is None else lam
    return sum(k * lam / (z * (z + lam)) for z, k in K.atoms)


def _window_mass(K: KreinAtoms, u: float) -> float:
    """``K(((u - p) v 0, u])``."""
    lo = max(u - K.p, 0.0)
    return sum(k for z, k in K.atoms if lo < z <= u)


@dataclass
class ExcursionMixing:
    density: Table
    psi: float
    hm2: Optional[HMReport] = None

    @property
    def hypothesis_met(self) -> Optional[bool]:
        """Whether the detector found the mixing density HM_2."""
        return None if self.hm2 is None else self.hm2.passed


def _smoothed_cdf(K: KreinAtoms):
    """CDF of ``K`` with each atom spread uniformly over its Voronoi cell."""
    zs = np.array([z for z, _ in K.atoms])
    ks = np.array([k for _, k in K.atoms])
    if zs.size == 1:
        raise DomainError("smoothing needs at least two atoms")
    mids = 0.5 * (zs[1:] + zs[:-1])
    lo = max(zs[0] - (mids[0] - zs[0]), 0.0)
    hi = zs[-1] + (zs[-1] - mids[-1])
    edges = np.concatenate([[lo], mids, [hi]])
    cum = np.concatenate([[0.0], np.cumsum(ks)])
    return lambda z: np.interp(z, edges, cum), (lo, hi)


def excursion_mixing_density(K: KreinAtoms, check: bool = True, smooth: bool = False,
                             cfg: HMConfig = HMConfig(), n_grid: int = 161) -> ExcursionMixing:
    """Density of ``X`` with ``Y3 = Y X``, ``Y ~ Gamma(2, 1)``.

    ``f_X(x) = K(((1/x - p) v 0, 1/x]) / psi(p)``.  For the atomic measure this
    is piecewise constant between the points ``1/(z_i + p)`` and ``1/z_i``
    (a step table).  ``smooth=True`` treats the atoms as a discretization of
    a continuous Krein measure: each atom's mass is spread over its Voronoi
    cell and ``f_X`` is tabulated on a geometric grid with log-log linear
    interpolation, which keeps concavity of ``log f(e^y)`` (the HM_1
    property) of the tabulated values.
    """
    ps = psi(K)
    if smooth:
        C, (zlo, zhi) = _smoothed_cdf(K)
        xs = np.geomspace(1.0 / (zhi + K.p), 1.0 / zlo if zlo > 0 else 1e6, n_grid)
        u = 1.0 / xs
        values = (C(u) - C(np.maximum(u - K.p, 0.0))) / ps
        f = Table(tuple(xs), tuple(np.maximum(values, 0.0)), interp="loglinear", outside="zero")
    else:
        cuts = sorted({1.0 / (z + K.p) for z, _ in K.atoms} | {1.0 / z for z, _ in K.atoms})
        values = [_window_mass(K, 2.0 / (a + b)) / ps for a, b in zip(cuts, cuts[1:])]
        values.append(values[-1])
        if not any(values):
            raise DegenerateError("Krein measure puts no mass in any clock window")
        f = Table(tuple(cuts), tuple(values), interp="step", outside="zero")
    return ExcursionMixing(f, ps, hm_test(f, 2, cfg) if check else None)


def excursion_y3_density(K: KreinAtoms, u):
    """``(1/psi) int_0^inf u e^{-u x} K((x - p, x]) dx = (1/psi) sum kappa_i (e^{-u z_i} - e^{-u (z_i + p)})``."""
    if not u > 0:
        raise DomainError("argument must be positive")
    if isinstance(u, mp.mpf):
        acc = sum(k * (mp.exp(-u * z) - mp.exp(-u * (z + K.p))) for z, k in K.atoms)
        return acc / psi(K)
    acc = sum(k * math.exp(-u * z) * -math.expm1(-u * K.p) for z, k in K.atoms)
    return acc / psi(K)


# ---------------------------------------------------------------------------
# Levy processes and exponential functionals


KINDS = ("brownian", "compound-poisson", "drift-minus-subordinator")


def _mean_log(f: Density) -> float:
    l, r = f.support
    try:
        return integrate(lambda y: math.log(y) * f.pdf(y), l, r, f.breakpoints())
    except Exception as exc:
        raise DomainError(f"E[X_1] is not finite for the jump law: {exc}") from exc


@dataclass(frozen=True)
class LevySpec:
    """A Levy process ``xi`` drifting to ``-inf``.

    * ``brownian``: ``xi_t = a t + sigma B_t`` with ``a < 0``.
    * ``compound-poisson``: ``xi_t = a t + sum_{i <= N_t} X_i``, ``N`` of rate
      ``rate``, ``exp(X_i) ~ jump`` and ``a + rate E[X_1] < 0``.
    * ``drift-minus-subordinator``: ``xi_t = a t - S_t`` with ``a < 0`` and
      ``S`` compound Poisson of rate ``rate`` with jump law ``jump`` on (0, inf).
    """

    kind: str
    a: float = -1.0
    sigma2: float = 0.0
    rate: float = 0.0
    jump: Optional[Density] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown Levy kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.jump is not None:
            object.__setattr__(self, "jump", from_dict(self.jump))
        if self.rate < 0:
            raise DomainError("jump rate must be >= 0")
        if self.kind == "brownian":
            if not self.sigma2 > 0:
                raise DomainError("brownian kind needs sigma2 > 0")
            if not self.a < 0:
                raise DomainError("brownian kind needs drift a < 0")
        elif self.kind == "drift-minus-subordinator":
            if not self.a < 0:
                raise DomainError("drift-minus-subordinator needs drift a < 0")
            if self.rate > 0 and self.jump is None:
                raise DomainError("subordinator jumps need a jump law")
        else:
            if self.jump is None or not self.rate > 0:
                raise DomainError("compound-poisson needs rate > 0 and a jump law for exp(X_1)")
            if not self.mean_drift < 0:
                raise DomainError("compound-poisson needs a + rate * E[X_1] < 0")

    @property
    def mean_drift(self) -> float:
        """``E[xi_1]``."""
        if self.kind == "brownian":
            return self.a
        if self.kind == "compound-poisson":
            return self.a + self.rate * _mean_log(self.jump)
        mean_jump = 0.0
        if self.rate > 0:
            l, r = self.jump.support
            mean_jump = integrate(lambda y: y * self.jump.pdf(y), l, r, self.jump.breakpoints())
        return self.a - self.rate * mean_jump

    def default_horizon(self) -> float:
        return 20.0 / abs(self.mean_drift)

    def to_dict(self):
        d = {"kind": self.kind, "a": self.a, "sigma2": self.sigma2, "rate": self.rate}
        if self.jump is not None:
            d["jump"] = self.jump.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], float(d.get("a", -1.0)), float(d.get("sigma2", 0.0)),
                   float(d.get("rate", 0.0)), d.get("jump"))


def _path_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))


def _segment(level, drift, tau):
    """``int_0^tau exp(level + drift s) ds``."""
    if drift == 0:
        return math.exp(level) * tau
    return math.exp(level) * math.expm1(drift * tau) / drift


def _brownian_path(spec: LevySpec, horizon, dt, rng):
    steps = int(math.ceil(horizon / dt))
    h = horizon / steps
    xi = np.cumsum(spec.a * h + math.sqrt(spec.sigma2 * h) * rng.standard_normal(steps))
    e = np.exp(xi)
    # trapezoid rule, xi_0 = 0
    return h * (0.5 + e[:-1].sum() + 0.5 * e[-1]), xi[-1]


def _jump_path(spec: LevySpec, horizon, rng):
    level, t, total = 0.0, 0.0, 0.0
    sign = 1.0 if spec.kind == "compound-poisson" else -1.0
    while True:
        tau = rng.exponential(1.0 / spec.rate) if spec.rate > 0 else math.inf
        if t + tau >= horizon:
            total += _segment(level, spec.a, horizon - t)
            return total, level + spec.a * (horizon - t)
        total += _segment(level, spec.a, tau)
        level += spec.a * tau
        t += tau
        y = float(spec.jump.rvs(1, rng)[0])
        level += sign * (math.log(y) if spec.kind == "compound-poisson" else y)


def simulate_exp_functional(spec: LevySpec, horizon: Optional[float] = None, dt: float = 1e-3,
                            n: int = 1000, seed: int = 0, check_tail: bool = True) -> SimBatch:
    """``n`` draws of ``int_0^horizon exp(xi_t) dt``.

    Brownian paths use exact Gaussian increments on a grid of step ``dt`` and
    the trapezoid rule.  Jump kinds are piecewise deterministic between
    exponentially spaced jumps and are integrated exactly segment by segment.
    Path ``i`` uses the generator seeded by ``(seed, i)``.

    The neglected tail after the horizon is estimated per path as
    ``exp(xi_H) / |E xi_1|``; a :class:`HorizonError` with a suggested
    horizon is raised when its median relative size exceeds ``1e-6``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not dt > 0:
        raise DomainError("dt must be positive")
    horizon = spec.default_horizon() if horizon is None else float(horizon)
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    out = np.empty(n)
    ends = np.empty(n)
    for i in range(n):
        rng = _path_rng(seed, i)
        if spec.kind == "brownian":
            out[i], ends[i] = _brownian_path(spec, horizon, dt, rng)
        else:
            out[i], ends[i] = _jump_path(spec, horizon, rng)
    kappa = abs(spec.mean_drift)
    tail = float(np.median(np.exp(ends) / (kappa * out)))
    if check_tail and tail > TAIL_TOL:
        suggested = horizon + math.log(tail / TAIL_TOL) / kappa + 1.0
        raise HorizonError(f"median neglected tail {tail:.3g} exceeds {TAIL_TOL:g}; "
                           f"try horizon >= {suggested:.4g}", suggested=suggested)
    meta = {"generator": "numpy.PCG64 per path, SeedSequence(seed, spawn_key=(i,))",
            "spec": spec.to_dict(), "horizon": horizon, "dt": dt, "median_tail": tail}
    return SimBatch(out, seed, meta)


def dufresne_law(sigma2: float, a: float) -> Density:
    """Law of ``(2 / sigma2) / G`` with ``G ~ Gamma(2 |a| / sigma2, 1)``."""
    return Scaled(PowerOf(Gamma(2.0 * abs(a) / sigma2, 1.0), -1.0), 2.0 / sigma2)


def ks_distance(batch: SimBatch, ref: Density) -> float:
    """Kolmogorov-Smirnov distance between the sample and ``ref``."""
    x = np.asarray(batch.samples, dtype=float)
    if x.size == 0:
        raise DomainError("empty sample")
    return float(stats.kstest(x, ref.cdf_array).statistic)


# ---------------------------------------------------------------------------
# ladder heights


@dataclass(frozen=True)
class LadderBetaSpec:
    """Ladder-height tail ``c exp(-b s)`` with drift ``a_H``."""

    b: float
    c: float
    a_H: float = 0.0

    def __post_init__(self):
        if not (self.b > 0 and self.c > 0 and self.a_H >= 0):
            raise DomainError("ladder spec needs b > 0, c > 0, a_H >= 0")


@dataclass(frozen=True)
class LadderFactor:
    density: Density
    hm_order: float
    branch: str


def ladder_factor(spec: LadderBetaSpec) -> LadderFactor:
    """``I_H = Z / a_H`` with ``Z ~ Beta(b + 1, c / a_H)``, or ``Gamma(b + 1, rate c)`` when ``a_H = 0``.

    The declared HM order is ``min(floor(b + 1), floor(c / a_H))`` on the Beta
    branch; the Gamma branch is HCM (every order).
    """
    if spec.a_H == 0:
        return LadderFactor(Gamma(spec.b + 1.0, spec.c), math.inf, "gamma")
    beta = Beta(spec.b + 1.0, spec.c / spec.a_H)
    dens = beta if spec.a_H == 1 else Scaled(beta, 1.0 / spec.a_H)
    order = min(math.floor(spec.b + 1.0), math.floor(spec.c / spec.a_H))
    return LadderFactor(dens, order, "beta")


# ---------------------------------------------------------------------------
# GGC screen from samples


def empirical_lt(samples):
    """``s -> mean(exp(-s I))``; accepts float or mpf ``s`` and returns the same kind."""
    x = np.sort(np.asarray(samples, dtype=float))

    def phi(s):
        val = float(np.mean(np.exp(-float(s) * x)))
        return mp.mpf(val) if isinstance(s, mp.mpf) else val

    return phi


def ggc_screen(batch: SimBatch, n_max: int = 3, z: float = 3.0,
               u_grid: Sequence[float] = tuple(np.geomspace(0.1, 10.0, 5))) -> HCMReport:
    """HCM check of the empirical Laplace transform with a sampling tolerance.

    Differences of order ``n`` combine at most ``2^n`` transform values, each
    with standard error at most ``sd(exp(-s I)) / sqrt(N)``; the absolute
    tolerance is ``z * 2^n_max`` times the largest such error on the grid,
    squared-product corrected.  A statistical smoke screen, not a proof.
    """
    x = np.asarray(batch.samples, dtype=float)
    scale = float(np.median(x))
    grid = np.geomspace(1e-2, 1e2, 41) / scale
    se = max(float(np.std(np.exp(-s * x))) for s in grid) / math.sqrt(x.size)
    tol = z * 2 ** n_max * 2.0 * se
    phi = empirical_lt(x)
    cm = CMConfig(n_s=21, tol_abs=tol, tol_rel=1e-12, precision=128, max_precision=256)
    cfg = HCMConfig(u_grid=tuple(float(u) / scale for u in u_grid), n_max=n_max, cm=cm)
    rep = hcm_test(phi, cfg)
    rep.meta.update({"tol_abs": tol, "standard_error": se, "n_samples": int(x.size)})
    return rep
