import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggcmix.dist import Beta, Gamma, Scaled, ThorinSpec, TriangularDown, Uniform, UniformProduct, ggc_laplace
from ggcmix.errors import DomainError, NormalizationError, PrecisionError
from ggcmix.mixtures import MixtureDensity
from ggcmix.transforms import (
    CMConfig,
    HCMConfig,
    cm_test,
    finite_diff,
    hcm_test,
    laplace,
    product_lt,
    stieltjes_k,
)

LOG2 = math.log(2.0)

# -- transforms ------------------------------------------------------------------


def test_laplace_examples():
    assert laplace(Gamma(1, 1), 1.0) == pytest.approx(0.5, rel=1e-12)
    yu = MixtureDensity(Gamma(1, 1), Uniform(0, 1), "product")
    assert laplace(yu, 1.0) == pytest.approx(LOG2, rel=1e-9)
    for f in (Gamma(2, 1), Uniform(0, 1), TriangularDown()):
        assert laplace(f, 0.0) == 1.0


def test_laplace_mp_argument():
    with mp.workdps(30):
        val = laplace(Gamma(2, 1), mp.mpf(1))
        assert isinstance(val, mp.mpf)
        assert abs(val - mp.mpf(1) / 4) < mp.mpf(10) ** -25


def test_laplace_errors():
    with pytest.raises(DomainError):
        laplace(Gamma(1, 1), -1.0)

    class Bad(Uniform):
        def pdf(self, x):
            return 2.0 * super().pdf(x)

    with pytest.raises(NormalizationError):
        laplace(Bad(0, 1), 1.0)


def test_stieltjes_examples():
    assert stieltjes_k(Uniform(0, 1), 1, 1.0) == pytest.approx(0.30685281944005469, rel=1e-10)
    assert stieltjes_k(TriangularDown(), 2, 1.0) == pytest.approx(0.068528194400546906, rel=1e-9)
    for f, k in ((Uniform(0, 1), 1), (TriangularDown(), 3), (Gamma(2, 1), 2)):
        assert stieltjes_k(f, k, 0.0) == 1.0
        assert stieltjes_k(f, k, 1e-10) == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(DomainError):
        stieltjes_k(Uniform(0, 1), 0, 1.0)


def test_stieltjes_real_order():
    # k = 1/2 against mpmath quadrature
    with mp.workdps(30):
        oracle = float(mp.quad(lambda x: mp.sqrt(x / (x + 2)), [0, 1]))
    assert stieltjes_k(Uniform(0, 1), 0.5, 2.0) == pytest.approx(oracle, rel=1e-11)


def test_product_lt_examples():
    assert product_lt(Uniform(0, 1), 1, 1.0) == pytest.approx(LOG2, rel=1e-12)
    assert product_lt(TriangularDown(), 2, 1.0) == pytest.approx(0.61370563888010938, rel=1e-12)
    assert product_lt(TriangularDown(), 2, 0.0) == 1.0


@pytest.mark.parametrize("f,k", [(Uniform(0, 1), 1), (TriangularDown(), 2)])
@pytest.mark.parametrize("s", [0.3, 1.0, 4.0])
def test_stieltjes_is_laplace_of_ratio(f, k, s):
    ratio = MixtureDensity(Gamma(k, 1), f, "ratio")
    assert stieltjes_k(f, k, s) == pytest.approx(laplace(ratio, s), abs=1e-7)


@given(st.sampled_from([Uniform(0, 1), TriangularDown(), Beta(2, 3), Gamma(2, 1), UniformProduct(2)]),
       st.integers(1, 3), st.floats(0.01, 100.0), st.floats(0.1, 10.0))
def test_scale_equivariance(f, k, s, c):
    assert stieltjes_k(Scaled(f, c), k, s) == pytest.approx(stieltjes_k(f, k, s / c), rel=1e-10)


@given(st.sampled_from([Uniform(0, 1), TriangularDown(), Gamma(0.5, 1)]), st.floats(0.0, 50.0))
def test_transforms_lie_in_unit_interval(f, s):
    for val in (laplace(f, s), stieltjes_k(f, 2, s), product_lt(f, 2, s)):
        assert 0.0 < val <= 1.0 + 1e-12


# -- finite differences ----------------------------------------------------------------


def test_finite_diff_examples():
    assert finite_diff(lambda s: s * s, 1.0, 2, 0.5) == 0.5
    assert float(finite_diff(mp.exp, 0.0, 1, 1.0) * 0 + finite_diff(lambda s: mp.exp(-s), 0.0, 1, 1.0)) \
        == pytest.approx(math.exp(-1) - 1, rel=1e-15)
    for n in (1, 3, 6):
        assert finite_diff(lambda s: mp.mpf(7), 2.0, n, 0.3) == 0


@given(st.integers(0, 6), st.floats(0.01, 2.0), st.floats(0.0, 3.0))
def test_finite_diff_of_polynomials(n, h, s):
    # the n-th difference of s^n is n! h^n
    with mp.workprec(256):
        d = finite_diff(lambda x: x ** n, s, n, h, precision=256)
    assert float(d) == pytest.approx(math.factorial(n) * h ** n, rel=1e-12)


def test_finite_diff_precision_error():
    with pytest.raises(PrecisionError) as info:
        finite_diff(lambda s: mp.exp(-s), 1.0, 40, 1e-30, precision=64)
    assert info.value.bits_needed > 64


def test_finite_diff_domain():
    with pytest.raises(DomainError):
        finite_diff(mp.exp, 0.0, 2, 0.0)
    with pytest.raises(DomainError):
        finite_diff(mp.exp, 0.0, -1, 0.1)


# -- CM / HCM -------------------------------------------------------------------------


def test_cm_examples():
    assert cm_test(lambda s: mp.exp(-s), n_max=8).passed
    assert cm_test(lambda s: 1 / (1 + s), n_max=8).passed
    rep = cm_test(lambda s: mp.exp(-s) * (1 + 0.5 * mp.sin(4 * s)), n_max=4)
    assert rep.verdict == "fail"
    w = rep.witnesses[0]
    assert w.value < -w.tol and 1 <= w.n <= 4
    d = rep.to_dict()
    json.dumps(d)
    assert set(d["witnesses"][0]) == {"s", "h", "n", "value"}


def test_cm_report_is_deterministic():
    phi = lambda s: mp.exp(-s) * (1 + 0.5 * mp.sin(4 * s))  # noqa: E731
    assert cm_test(phi, n_max=3).to_dict() == cm_test(phi, n_max=3).to_dict()


def test_cm_rejects_bad_order():
    with pytest.raises(DomainError):
        cm_test(mp.exp, n_max=0)


@pytest.mark.parametrize("f", [Uniform(0, 1), TriangularDown(), Gamma(0.5, 2), Beta(2, 5)])
def test_every_laplace_transform_is_cm(f):
    assert cm_test(lambda s: laplace(f, s), interval=(1e-2, 1e2), n_max=8, cfg=CMConfig(n_s=9)).passed


def test_hcm_gamma_laplace_passes():
    rep = hcm_test(lambda s: 1 / (1 + s))
    assert rep.passed
    assert rep.witnesses == []
    json.dumps(rep.to_dict())


def test_hcm_stieltjes_uniform_passes():
    rep = hcm_test(lambda s: stieltjes_k(Uniform(0, 1), 1, s), HCMConfig(n_max=6))
    assert rep.passed


def test_hcm_detects_non_hcm_function():
    # exp(-s^2) is not CM, hence not HCM
    rep = hcm_test(lambda s: mp.exp(-s * s), HCMConfig(n_max=3))
    assert rep.verdict == "fail"
    assert rep.meta["failing_u"]
    w = rep.witnesses[0]
    assert w["w"] > 2.0


def test_hcm_refinement_grid():
    cfg = HCMConfig().with_refinement(1.0, 4.0, 5)
    assert cfg.refine_u == pytest.approx(tuple(np.geomspace(1.0, 4.0, 5)))
    rep = hcm_test(lambda s: 1 / (1 + s), HCMConfig(u_grid=(1.0,), n_max=3).with_refinement(2.0, 3.0, 2))
    assert rep.grid["u"] == [1.0, 2.0, 3.0]


thorin_atoms = st.lists(st.tuples(st.floats(0.1, 10.0), st.floats(0.1, 3.0)), min_size=1, max_size=3)


@settings(max_examples=6)
@given(st.floats(0.0, 1.0), thorin_atoms)
def test_ggc_laplace_is_hcm(a, atoms):
    spec = ThorinSpec(a, tuple(atoms))
    cfg = HCMConfig(u_grid=tuple(np.geomspace(0.05, 20, 4)), n_max=6, cm=CMConfig(n_s=15))
    assert hcm_test(lambda s: ggc_laplace(spec, s), cfg).passed
