import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from direct_mixture import (
    ChiSquared,
    Logistic,
    Normal,
    QuadratureError,
    QuadratureSettings,
    SkewNormal,
    StudentT,
    SupportMismatchError,
    kl_normal,
    kl_numeric,
    sym_kl_normal,
    sym_kl_numeric,
)
from direct_mixture.divergence import GAUSS_WEIGHTS, KRONROD_NODES, KRONROD_WEIGHTS, integrate_gk

# mpmath, 30 digits
KL_N01_N015 = 0.127687330330386604
SYM_SCALE_1PCT = 0.000198024703460445054
# mpmath over the same truncated range (t5 quantiles at 1e-10, 1 - 1e-10)
KL_T5_NORMAL_TRUNCATED = 0.0468462183746625134


def test_kl_normal_shift():
    assert kl_normal(0, 1, 0.3, 1) == pytest.approx(0.045, abs=1e-15)


def test_kl_normal_identical():
    assert kl_normal(2.5, 0.7, 2.5, 0.7) == 0.0


def test_kl_normal_scale_only():
    assert kl_normal(0, 1, 0, 1.5) == pytest.approx(KL_N01_N015, rel=1e-14)


@pytest.mark.parametrize("args", [(0, 0, 0, 1), (0, 1, 0, -1), (0, -2, 0, 1)])
def test_normal_forms_reject_bad_scales(args):
    with pytest.raises(ValueError):
        kl_normal(*args)
    with pytest.raises(ValueError):
        sym_kl_normal(*args)


def test_sym_kl_normal_shift_is_c_squared():
    assert sym_kl_normal(0, 1, 0.01, 1) == pytest.approx(1e-4, rel=1e-12)


def test_sym_kl_normal_one_percent_scale():
    assert sym_kl_normal(0, 1, 0, 1.01) == pytest.approx(SYM_SCALE_1PCT, rel=1e-12)


@settings(max_examples=300)
@given(st.floats(-5, 5), st.floats(0.1, 10), st.floats(-5, 5), st.floats(0.1, 10))
def test_sym_kl_normal_is_sum_of_directed(ma, sa, mb, sb):
    sym = sym_kl_normal(ma, sa, mb, sb)
    total = kl_normal(ma, sa, mb, sb) + kl_normal(mb, sb, ma, sa)
    assert sym == pytest.approx(total, rel=1e-12, abs=1e-15)
    assert sym == pytest.approx(sym_kl_normal(mb, sb, ma, sa), rel=1e-14, abs=0)
    assert sym >= kl_normal(ma, sa, mb, sb) - 1e-15


def test_taylor_limit_scale():
    c = 1e-3
    assert sym_kl_normal(0, 1, 0, 1 + c) / c**2 == pytest.approx(2, rel=1e-2)


def test_gk_tables():
    # the rules integrate constants exactly and are symmetric
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2, rel=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2, rel=1e-15)
    np.testing.assert_allclose(KRONROD_NODES, -KRONROD_NODES[::-1], atol=0)
    # Kronrod 15 is exact to degree 22, Gauss 7 to degree 13
    for deg in range(0, 23, 2):
        assert KRONROD_WEIGHTS @ KRONROD_NODES**deg == pytest.approx(2 / (deg + 1), rel=1e-13)
    for deg in range(0, 14, 2):
        assert GAUSS_WEIGHTS @ KRONROD_NODES**deg == pytest.approx(2 / (deg + 1), rel=1e-13)


def test_integrate_gk_polynomial_and_smooth():
    val, _ = integrate_gk(lambda x: 3 * x**2, [0.0, 2.0], 1e-12, 1e-14, 100)
    assert val == pytest.approx(8.0, rel=1e-14)
    val, err = integrate_gk(np.sin, [0.0, math.pi], 1e-12, 1e-14, 100)
    assert val == pytest.approx(2.0, rel=1e-13)
    assert err < 1e-11


def test_integrate_gk_refines_near_kink():
    val, _ = integrate_gk(lambda x: np.sqrt(np.abs(x - 0.3)), [0.0, 1.0], 1e-10, 1e-13, 2000)
    expected = (2 / 3) * (0.3**1.5 + 0.7**1.5)
    assert val == pytest.approx(expected, rel=1e-9)


def test_integrate_gk_reports_exhaustion():
    with pytest.raises(QuadratureError):
        integrate_gk(lambda x: np.sin(1 / np.maximum(x, 1e-300)), [1e-6, 1.0], 1e-12, 1e-14, 20)


def test_kl_numeric_identical_logistic():
    s = QuadratureSettings()
    assert abs(kl_numeric(Logistic(0, 1), Logistic(0, 1))) <= s.abs_tol
    assert abs(sym_kl_numeric(Logistic(0, 1), Logistic(0, 1))) <= 2 * s.abs_tol


def test_kl_numeric_normal_shift():
    assert kl_numeric(Normal(0, 1), Normal(0.3, 1)) == pytest.approx(0.045, abs=1e-8)


def test_kl_numeric_t_vs_normal():
    val = kl_numeric(StudentT(5), Normal(0, math.sqrt(5 / 3)))
    assert val > 0
    assert val == pytest.approx(KL_T5_NORMAL_TRUNCATED, rel=1e-9)


def test_kl_numeric_support_mismatch():
    with pytest.raises(SupportMismatchError):
        kl_numeric(Normal(5, 1), ChiSquared(3))


def test_kl_numeric_subdivision_limit():
    tight = QuadratureSettings(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=4)
    with pytest.raises(QuadratureError):
        kl_numeric(StudentT(1.5), Normal(0, 1), tight)


@pytest.mark.parametrize("kwargs", [
    {"rel_tol": 0}, {"abs_tol": -1}, {"tail_prob": 0}, {"tail_prob": 0.01}, {"max_subdivisions": 0},
])
def test_settings_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSettings(**kwargs)


def test_numeric_matches_analytic_500_pairs():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(500):
        ma, mb = rng.uniform(-5, 5, 2)
        sa, sb = rng.uniform(0.1, 10, 2)
        exact = kl_normal(ma, sa, mb, sb)
        num = kl_numeric(Normal(ma, sa), Normal(mb, sb))
        worst = max(worst, abs(num - exact) / exact)
    assert worst < 1e-6


def test_sym_numeric_matches_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(50):
        ma, mb = rng.uniform(-5, 5, 2)
        sa, sb = rng.uniform(0.1, 10, 2)
        exact = sym_kl_normal(ma, sa, mb, sb)
        assert sym_kl_numeric(Normal(ma, sa), Normal(mb, sb)) == pytest.approx(exact, rel=1e-6)


def _pair(rng):
    if rng.random() < 0.5:
        return Normal(rng.uniform(-5, 5), rng.uniform(0.1, 10)), Normal(rng.uniform(-5, 5), rng.uniform(0.1, 10))
    return (Logistic(rng.uniform(-5, 5), rng.uniform(0.1, 10)),
            Logistic(rng.uniform(-5, 5), rng.uniform(0.1, 10)))


def test_sym_kl_symmetry_200_pairs():
    rng = np.random.default_rng(3)
    tol = QuadratureSettings().abs_tol
    for _ in range(200):
        p, q = _pair(rng)
        a, b = sym_kl_numeric(p, q), sym_kl_numeric(q, p)
        # both directions are computed by the same quadratures in opposite order
        assert abs(a - b) < 2 * tol + 1e-9 * abs(a)
        assert a >= kl_numeric(p, q) and a >= kl_numeric(q, p)
        assert kl_numeric(p, q) >= -tol


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 3.0))
def test_logistic_shift_even(d):
    a = sym_kl_numeric(Logistic(0, 1), Logistic(d, 1))
    b = sym_kl_numeric(Logistic(0, 1), Logistic(-d, 1))
    assert a == pytest.approx(b, rel=1e-8)
    assert a > 0


def test_skewnormal_zero_shape_numeric_matches_normal():
    val = sym_kl_numeric(SkewNormal(0, 1, 0), SkewNormal(0.2, 1, 0))
    assert val == pytest.approx(0.04, rel=1e-8)
