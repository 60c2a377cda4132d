import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from flexdist import base

# Frozen oracle values, computed once with mpmath at 40 digits.
INV_SQRT_2PI = 0.3989422804014327          # 1/sqrt(2 pi)
PHI_AT_1 = 0.24197072451914334             # exp(-1/2)/sqrt(2 pi)
Z_975 = 1.9599639845400543                 # sqrt(2) * erfinv(0.95)
INV_2PI = 0.15915494309189535              # Gamma(2)/(2 pi Gamma(1)) = 1/(2 pi)

GRID_41 = np.linspace(-8.0, 8.0, 41)
P_LEVELS = np.array([0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999])

ALL_BASES = [
    base.normal_base(),
    base.student_base(1.0),
    base.student_base(2.0),
    base.student_base(5.0),
    base.student_base(37.0),
    base.logistic_base(),
]


def test_location_scale_validation():
    base.LocationScale(0.0, 1.0)
    with pytest.raises(ValueError):
        base.LocationScale(0.0, 0.0)
    with pytest.raises(ValueError):
        base.LocationScale(0.0, -2.0)
    with pytest.raises(ValueError):
        base.LocationScale(math.inf, 1.0)


def test_normal_pdf_values():
    ls = base.LocationScale(0.0, 1.0)
    assert base.normal_pdf(0.0, ls) == pytest.approx(INV_SQRT_2PI, abs=1e-15)
    assert base.normal_pdf(1.0, ls) == pytest.approx(PHI_AT_1, abs=1e-15)
    for sigma in (0.5, 2.0, 7.0):
        ls2 = base.LocationScale(3.0, sigma)
        assert base.normal_pdf(3.0, ls2) == pytest.approx(
            INV_SQRT_2PI / sigma, rel=1e-14)


def test_student_pdf_k_univariate_cauchy_at_zero():
    mp1 = base.MatrixParams(np.array([0.0]), np.array([[1.0]]))
    assert base.student_pdf_k(np.array([0.0]), mp1, 1.0) == pytest.approx(
        1.0 / math.pi, rel=1e-14)


def test_student_pdf_k_large_nu_approaches_normal():
    mp1 = base.MatrixParams(np.array([0.0]), np.array([[1.0]]))
    ls = base.LocationScale(0.0, 1.0)
    for x in (0.0, 1.0, 2.0):
        t_val = base.student_pdf_k(np.array([x]), mp1, 1e6)
        assert abs(t_val - base.normal_pdf(x, ls)) < 1e-3


def test_student_pdf_k_bivariate_at_origin():
    mp2 = base.MatrixParams(np.zeros(2), np.eye(2))
    assert base.student_pdf_k(np.zeros(2), mp2, 2.0) == pytest.approx(
        INV_2PI, rel=1e-14)


def test_student_pdf_k_normalization():
    # nested 1d quadrature over the plane, moderate tolerance
    mp2 = base.MatrixParams(np.zeros(2), np.array([[2.0, 0.5], [0.5, 1.0]]))

    def inner(x0):
        return base.integrate(
            lambda x1: base.student_pdf_k(np.array([x0, x1]), mp2, 3.0),
            -np.inf, np.inf, tol=1e-9)

    total = base.integrate(inner, -np.inf, np.inf, tol=1e-6)
    assert total == pytest.approx(1.0, abs=1e-4)


def test_student_pdf_k_univariate_normalization():
    for nu in (1.0, 2.0, 5.0):
        mp1 = base.MatrixParams(np.array([0.0]), np.array([[1.0]]))
        total = base.integrate(
            lambda x: base.student_pdf_k(np.array([x]), mp1, nu),
            -np.inf, np.inf, tol=1e-8)
        assert total == pytest.approx(1.0, abs=1e-6)


def test_matrix_params_validation():
    with pytest.raises(ValueError):
        base.MatrixParams(np.zeros(2), np.array([[1.0, 0.0]]))
    with pytest.raises(ValueError):
        base.MatrixParams(np.zeros(3), np.eye(2))
    with pytest.raises(ValueError):
        base.MatrixParams(np.zeros(2), np.array([[1.0, 0.3], [0.2, 1.0]]))
    with pytest.raises(ValueError):
        base.MatrixParams(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        base.student_pdf_k(np.zeros(3), base.MatrixParams(np.zeros(2), np.eye(2)), 2.0)


def test_integrate_normal_normalization():
    nb = base.normal_base()
    assert base.integrate(nb.pdf, -np.inf, np.inf, tol=1e-10) == pytest.approx(
        1.0, abs=1e-10)


def test_integrate_normal_second_moment():
    nb = base.normal_base()
    val = base.integrate(lambda x: x * x * nb.pdf(x), -np.inf, np.inf, tol=1e-9)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_integrate_student_normalization():
    tb = base.student_base(3.0)
    assert base.integrate(tb.pdf, -np.inf, np.inf, tol=1e-9) == pytest.approx(
        1.0, abs=1e-8)


def test_integrate_finite_and_degenerate():
    assert base.integrate(lambda x: x * x, 0.0, 1.0, tol=1e-12) == pytest.approx(
        1.0 / 3.0, abs=1e-13)
    assert base.integrate(lambda x: x, 2.0, 2.0) == 0.0
    fwd = base.integrate(math.exp, 0.0, 1.0, tol=1e-12)
    rev = base.integrate(math.exp, 1.0, 0.0, tol=1e-12)
    assert fwd == pytest.approx(-rev, rel=1e-14)


def test_integrate_half_infinite():
    nb = base.normal_base()
    left = base.integrate(nb.pdf, -np.inf, 0.0, tol=1e-10)
    right = base.integrate(nb.pdf, 0.0, np.inf, tol=1e-10)
    assert left == pytest.approx(0.5, abs=1e-10)
    assert right == pytest.approx(0.5, abs=1e-10)


def test_integrate_budget_exhaustion_raises():
    with pytest.raises(base.IntegrationError):
        base.integrate(lambda x: math.sin(1.0 / (x + 1e-12)), 0.0, 1.0,
                       tol=1e-14, max_intervals=8)


def test_find_root_normal_median():
    nb = base.normal_base()
    r = base.find_root(lambda x: nb.cdf(x) - 0.5, -1.0, 1.0)
    assert abs(r) < 1e-12


def test_find_root_normal_upper_tail():
    nb = base.normal_base()
    r = base.find_root(lambda x: nb.cdf(x) - 0.975, 0.0, 10.0)
    assert r == pytest.approx(Z_975, abs=1e-9)


def test_find_root_degenerate_bracket():
    assert base.find_root(lambda x: x - 2.0, 2.0, 2.0) == 2.0


def test_find_root_no_sign_change():
    with pytest.raises(base.BracketError):
        base.find_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_base_construction_validation():
    with pytest.raises(ValueError):
        base.SymmetricBase("laplace")
    with pytest.raises(ValueError):
        base.student_base(0.0)
    with pytest.raises(ValueError):
        base.student_base(-1.0)
    with pytest.raises(ValueError):
        base.SymmetricBase(base.NORMAL, 4.0)


@pytest.mark.parametrize("b", ALL_BASES, ids=lambda b: f"{b.kind}-{b.nu}")
def test_pdf_symmetric_on_grid(b):
    np.testing.assert_array_equal(b.pdf(GRID_41), b.pdf(-GRID_41))


@pytest.mark.parametrize("b", ALL_BASES, ids=lambda b: f"{b.kind}-{b.nu}")
def test_cdf_reflection(b):
    np.testing.assert_allclose(b.cdf(GRID_41) + b.cdf(-GRID_41), 1.0,
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize("b", ALL_BASES, ids=lambda b: f"{b.kind}-{b.nu}")
def test_quantile_cdf_roundtrip(b):
    q = b.quantile(P_LEVELS)
    np.testing.assert_allclose(b.cdf(q), P_LEVELS, rtol=0, atol=1e-9)


def test_student_cdf_matches_quadrature():
    tb = base.student_base(2.5)
    for x in (-3.0, -1.0, 0.5, 2.0):
        direct = tb.cdf(x)
        oracle = base.integrate(tb.pdf, -np.inf, x, tol=1e-10)
        assert direct == pytest.approx(oracle, abs=1e-9)


def test_logistic_closed_forms():
    lb = base.logistic_base()
    assert lb.cdf(0.0) == 0.5
    assert lb.quantile(0.5) == 0.0
    x = 1.7
    p = 1.0 / (1.0 + math.exp(-x))
    assert lb.cdf(x) == pytest.approx(p, rel=1e-15)
    assert lb.quantile(p) == pytest.approx(x, rel=1e-12)
    assert lb.pdf(0.0) == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("b", [base.normal_base(), base.student_base(2.0),
                               base.logistic_base()],
                         ids=["normal", "t2", "logistic"])
def test_sampler_ks_band(b):
    rng = base.make_rng(20250817)
    x = b.sample(100_000, rng)
    d = stats.kstest(x, b.cdf).statistic
    assert d < 1.95 / math.sqrt(100_000) * 1.5


def test_sampler_seed_reproducibility():
    b = base.student_base(4.0)
    x1 = b.sample(1000, base.make_rng(7))
    x2 = b.sample(1000, base.make_rng(7))
    np.testing.assert_array_equal(x1, x2)
    assert b.sample(0, base.make_rng(7)).shape == (0,)


def test_moment_order_bound():
    assert base.normal_base().moment_order_bound() == math.inf
    assert base.logistic_base().moment_order_bound() == math.inf
    assert base.student_base(2.0).moment_order_bound() == 2.0


def test_golden_section_max():
    arg = base.golden_section_max(lambda x: -(x - 2.0) ** 2, 0.0, 5.0)
    assert arg == pytest.approx(2.0, abs=1e-7)
    nb = base.normal_base()
    assert base.golden_section_max(nb.log_pdf, -10.0, 10.0) == pytest.approx(
        0.0, abs=1e-7)


def test_invert_cdf_matches_quantile():
    nb = base.normal_base()
    for p in (0.025, 0.5, 0.975):
        x = base.invert_cdf(nb.cdf, p, -1.0, 1.0)
        assert x == pytest.approx(nb.quantile(p), abs=1e-9)


@given(st.floats(-30.0, 30.0))
def test_pdf_symmetry_property(x):
    for b in (base.normal_base(), base.student_base(3.0), base.logistic_base()):
        assert abs(b.pdf(x) - b.pdf(-x)) <= 1e-15


@given(st.floats(0.001, 0.999))
@settings(max_examples=50)
def test_quantile_roundtrip_property(p):
    for b in (base.normal_base(), base.student_base(2.0), base.logistic_base()):
        assert abs(b.cdf(b.quantile(p)) - p) < 1e-9


def test_quantile_domain_checks():
    nb = base.normal_base()
    with pytest.raises(ValueError):
        nb.quantile(-0.1)
    with pytest.raises(ValueError):
        nb.quantile(1.1)
    assert nb.quantile(0.0) == -math.inf
    assert nb.quantile(1.0) == math.inf
