import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggcmix.errors import BranchError, DomainError
from ggcmix.identities import (
    DEFAULT_GRID,
    SUITES,
    ProofPoint,
    asymptotic_check,
    asymptotic_limit,
    closed_form_derivative,
    cm_sweep,
    dlogr_numeric,
    dlogr_rhs,
    gauss_jacobi,
    gf_eval,
    gf_integral,
    gf_radius,
    jacobi_poly,
    jk_closed,
    jk_closed_exact,
    jk_derivative_rhs,
    jk_quadrature,
    tabulated_pq,
    pq_pair,
    random_points,
    rk_reduction,
    series_check,
)

J_A2_B2 = 0.29752473508561301  # log(6.25 / 4) / 1.5

rationals = st.fractions(min_value=Fraction(101, 100), max_value=Fraction(10), max_denominator=200)
ts = st.fractions(min_value=Fraction(1, 10), max_value=Fraction(10), max_denominator=200)


# -- proof point ---------------------------------------------------------------------


def test_proof_point_symbols():
    p = ProofPoint(2.0, 2.0, 1.0, 1)
    assert (p.T, p.A, p.B, p.alpha, p.beta) == (2.0, 4.25, 2.0, 2.5, 2.5)
    assert p.delta(0) == pytest.approx(2.25)
    with pytest.raises(DomainError):
        ProofPoint(2, 0.5, 1, 1)
    with pytest.raises(DomainError):
        ProofPoint(-1, 2, 1, 1)


@given(rationals, rationals, ts)
def test_A_dominates_B(a, b, t):
    p = ProofPoint(a, b, t)
    assert p.T >= 2 and p.A >= p.B


# -- quadrature ---------------------------------------------------------------------------


def test_jk_quadrature_examples():
    assert jk_quadrature(ProofPoint(1, 2, 1, 1)) == pytest.approx(1 / 3, rel=1e-13)
    assert jk_quadrature(ProofPoint(2, 2, 1, 1)) == pytest.approx(J_A2_B2, rel=1e-13)
    for k in (1, 2.5, 4):
        assert jk_quadrature(ProofPoint(1.7, 1, 0.3, k)) == 0.0


def test_jk_quadrature_extended_precision():
    with mp.workdps(30):
        v = jk_quadrature(ProofPoint(mp.mpf(2), mp.mpf(2), mp.mpf(1), 1))
        assert abs(v - mp.log(mp.mpf("6.25") / 4) / mp.mpf("1.5")) < mp.mpf(10) ** -27


def test_jacobi_rule_integrates_polynomials():
    with mp.workdps(30):
        x, w = gauss_jacobi(6, 0.5, 30)
        # int (1-x^2)^(1/2) x^2 dx over [-1, 1] = pi / 8
        assert abs(sum(wi * xi ** 2 for xi, wi in zip(x, w)) - mp.pi / 8) < mp.mpf(10) ** -25
        assert abs(jacobi_poly(2, 0, 0, mp.mpf("0.3")) - (3 * mp.mpf("0.09") - 1) / 2) < mp.mpf(10) ** -28


@settings(max_examples=25)
@given(rationals, rationals, ts, st.integers(1, 4))
def test_invariance_under_t_and_a_inversion(a, b, t, k):
    base = jk_quadrature(ProofPoint(float(a), float(b), float(t), k))
    assert jk_quadrature(ProofPoint(float(a), float(b), float(1 / t), k)) == pytest.approx(base, rel=1e-11)
    assert jk_quadrature(ProofPoint(float(1 / a), float(b), float(t), k)) == pytest.approx(base, rel=1e-11)


# -- closed form ---------------------------------------------------------------------------


def test_jk_closed_table_k1():
    val, pq = jk_closed(ProofPoint(2, 2, 1, 1))
    assert val == pytest.approx(J_A2_B2, rel=1e-15)
    assert pq.P.is_zero()
    assert pq.Q.c == (Fraction(2, 3),)  # 1 / (a - 1/a)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("a,b", [(Fraction(2), Fraction(2)), (Fraction(3, 2), Fraction(7, 3)),
                                 (Fraction(1, 3), Fraction(5, 4))])
def test_pq_matches_tabulated_forms(a, b, k):
    P, Q = tabulated_pq(a, b, k)
    pq = pq_pair(a, b, k)
    assert pq.P == P and pq.Q == Q


@settings(max_examples=20)
@given(rationals, rationals, st.integers(1, 5))
def test_pq_degree_bounds(a, b, k):
    pq = pq_pair(a, b, k)
    assert pq.degree_ok
    assert pq.P.degree <= k - 2
    assert pq.Q.degree == k - 1
    if k == 1:
        assert pq.P.is_zero()


@settings(max_examples=25)
@given(rationals, rationals, ts, st.integers(1, 5))
def test_closed_form_matches_quadrature(a, b, t, k):
    p = ProofPoint(a, b, t, k)
    c, pq = jk_closed(p)
    q = jk_quadrature(ProofPoint(float(a), float(b), float(t), k))
    assert abs(q - c) <= 1e-10 * (1 + abs(c))
    assert pq.consistent


def test_a_equal_one_branch():
    val, pq = jk_closed(ProofPoint(1, 2, 1, 1))
    assert pq is None
    assert val == pytest.approx(1 / 3, rel=1e-15)
    for k in (2, 3, 4):
        for t in (Fraction(1, 2), Fraction(3)):
            val, _ = jk_closed(ProofPoint(1, Fraction(5, 2), t, k))
            assert val == pytest.approx(jk_quadrature(ProofPoint(1.0, 2.5, float(t), k)), rel=1e-12)
    with pytest.raises(DomainError):
        pq_pair(1, 2, 2)


def test_b_equal_one_branch():
    parts = jk_closed_exact(ProofPoint(2, 1, 1, 3))
    assert parts.rational == 0 and parts.log_num == parts.log_den
    assert jk_closed(ProofPoint(2, 1, 1, 3))[0] == 0.0
    assert jk_derivative_rhs(ProofPoint(2, 1, 1, 2)) == 0.0
    assert asymptotic_limit(1.0, 2) == 0.0


def test_closed_form_requires_integer_order():
    with pytest.raises(DomainError):
        jk_closed(ProofPoint(2, 2, 1, 1.5))


# -- derivative identity ------------------------------------------------------------------


def test_derivative_rhs_examples():
    assert jk_derivative_rhs(ProofPoint(2, 2, 1, 1)) == pytest.approx(-0.06, rel=1e-14)
    assert jk_derivative_rhs(ProofPoint(2, 2, 1, 1), exact=True) == Fraction(-3, 50)


@settings(max_examples=15)
@given(rationals, rationals, ts, st.integers(1, 4))
def test_derivative_sign_and_numeric_match(a, b, t, k):
    p = ProofPoint(a, b, t, k)
    rhs = jk_derivative_rhs(p)
    assert math.copysign(1, rhs) == (-1) ** k
    assert float(closed_form_derivative(p)) == pytest.approx(rhs, rel=1e-6)


@settings(max_examples=15)
@given(rationals, rationals, st.integers(1, 5))
def test_rk_reduces_to_constant(a, b, k):
    red = rk_reduction(a, b, k)
    assert red.ok
    assert red.R.degree == 0
    assert red.R.c[0] == (-1) ** k * math.factorial(k - 1) * (b - 1 / b) ** (2 * k - 1)


# -- generating function -------------------------------------------------------------------


def test_gf_examples():
    p = ProofPoint(2.0, 2.0, 1.0)
    assert gf_eval(0.0, p) == pytest.approx(J_A2_B2, rel=1e-14)
    assert dlogr_rhs(0.0, p) == pytest.approx(2.0, rel=1e-15)
    assert float(dlogr_numeric(0.0, p)) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(BranchError):
        gf_eval(-1.0, p)


def test_gf_matches_defining_integral():
    p = ProofPoint(3.0, 2.5, 0.7)
    with mp.workdps(30):
        for z in (0.0, 0.5 * float(gf_radius(p)), -0.5 * float(gf_radius(p))):
            assert abs(gf_eval(mp.mpf(z), p.mp()) - gf_integral(z, p)) < mp.mpf(10) ** -25


@pytest.mark.parametrize("a,b,t", [(2.0, 2.0, 1.0), (3.0, 1.5, 0.4), (0.5, 4.0, 2.5)])
def test_series_coefficients_are_jk(a, b, t):
    series = series_check(ProofPoint(a, b, t), 3)
    for k, val in enumerate(series, start=1):
        assert val == pytest.approx(jk_quadrature(ProofPoint(a, b, t, k)), rel=1e-8)


@settings(max_examples=15)
@given(st.floats(1.05, 9.0), st.floats(1.05, 9.0), st.floats(0.1, 10.0), st.floats(0.0, 1.0))
def test_dlogr_identity(a, b, t, frac):
    p = ProofPoint(a, b, t)
    z = frac * float(gf_radius(p))
    num = dlogr_numeric(z, p)
    rhs = dlogr_rhs(mp.mpf(z), p.mp())
    assert float(abs(num - rhs) / rhs) < 1e-10


# -- asymptotics and the real-order sweep ---------------------------------------------------


def test_asymptotic_limits():
    assert asymptotic_limit(2.0, 1) == pytest.approx(1.5)
    assert asymptotic_limit(2.0, 2) == pytest.approx(0.5625)
    for k in (1, 2, 3):
        rep = asymptotic_check(2.0, 2.0, k)
        errs = rep["rel_err"]
        assert errs[-1] < 1e-2
        assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("k", [2, 3, 4])
def test_sign_propagation_tail(k):
    for a, b in ((2.0, 2.0), (3.0, 1.5), (1.25, 8.0)):
        t = 1e6
        tail = jk_quadrature(ProofPoint(a, b, t, k))
        assert tail < 1e-6 * jk_quadrature(ProofPoint(a, b, 1.0, k))


def test_cm_sweep_examples():
    assert cm_sweep([(2.0, 2.0)], k=1, n_max=8).passed
    assert cm_sweep([(2.0, 2.0)], k=0.5, n_max=6).passed
    rep = cm_sweep([(3.0, 1.5)], k=2.5, n_max=6)
    assert rep.passed
    assert rep.to_dict()["per_point"]["3.0,1.5"]["verdict"] == "pass"
    with pytest.raises(DomainError):
        cm_sweep([(2.0, 2.0)], k=0)


def test_cm_sweep_detects_a_non_cm_perturbation():
    from ggcmix.transforms import cm_test

    rep = cm_test(lambda om: jk_quadrature(ProofPoint(mp.mpf(2), mp.mpf(2), _t_of(2 + om), 1))
                  * (1 + mp.sin(3 * om) / 4), (1e-2, 10), n_max=3)
    assert not rep.passed


def _t_of(T):
    return (T + mp.sqrt(T * T - 4)) / 2


# -- suites ------------------------------------------------------------------------------------


def test_random_points_reproducible():
    assert random_points(2, 5, 3) == random_points(2, 5, 3)
    assert all(p.a != 1 for p in random_points(1, 50, 9))


@pytest.mark.parametrize("name,kwargs", [
    ("eq2eq3", {"k": 2, "trials": 10}),
    ("eq4", {"k": 2, "trials": 4}),
    ("gf", {"k": 2, "trials": 5}),
    ("asymptotic", {"k": 1}),
])
def test_suites_pass(name, kwargs):
    res = SUITES[name](**kwargs)
    assert res.passed, res.witnesses
    assert res.to_dict()["verdict"] == "pass"


def test_default_grid_shape():
    assert len(DEFAULT_GRID) == 25
