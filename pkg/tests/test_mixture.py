import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from direct_mixture import (
    ContinuousMixture,
    FiniteMixture,
    Grid,
    Logistic,
    MomentUnavailableError,
    Normal,
    SkewNormal,
    StudentT,
    from_grid,
    location_family,
    normal_scale_family,
)

T5_PDF_0 = 0.379606689822494431
T5_Q975 = 2.57058183563631478
PHI_1 = 0.241970724519143349  # standard normal density at 1

TWO = FiniteMixture([Normal(-1, 1), Normal(1, 1)], [0.5, 0.5])


def test_validation():
    with pytest.raises(ValueError):
        FiniteMixture([], [])
    with pytest.raises(ValueError):
        FiniteMixture([Normal()], [0.5])
    with pytest.raises(ValueError):
        FiniteMixture([Normal(), Normal()], [1.5, -0.5])
    with pytest.raises(ValueError):
        FiniteMixture([Normal()], [1.0, 0.0])


def test_symmetric_pair():
    assert TWO.pdf(0.0) == pytest.approx(PHI_1, rel=1e-14)
    assert TWO.cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert abs(TWO.quantile(0.5)) < 1e-9
    assert TWO.mean == pytest.approx(0.0, abs=1e-15)
    assert TWO.variance == pytest.approx(2.0, rel=1e-14)


def test_cdf_limits():
    assert TWO.cdf(np.inf) == 1.0
    assert TWO.cdf(-np.inf) == 0.0
    assert TWO.sf(-np.inf) == 1.0


def test_single_component_is_the_component():
    comp = SkewNormal(0.3, 1.2, 2)
    m = FiniteMixture([comp], [1.0])
    y = np.linspace(-3, 5, 17)
    np.testing.assert_allclose(m.pdf(y), comp.pdf(y), rtol=1e-14)
    np.testing.assert_allclose(m.cdf(y), comp.cdf(y), rtol=1e-14)
    assert m.quantile(0.3) == pytest.approx(comp.quantile(0.3), abs=1e-10)
    mean, var = m.moments()
    assert mean == pytest.approx(comp.mean) and var == pytest.approx(comp.variance)
    g = Grid([0.3], [], [1.0])
    k1 = from_grid(g, location_family(SkewNormal(0, 1.2, 2)))
    np.testing.assert_allclose(k1.pdf(y), comp.pdf(y), rtol=1e-13)


def test_log_pdf_far_tail_finite():
    m = FiniteMixture([Normal(0, 1), Normal(0, 2)], [0.5, 0.5])
    # both component densities underflow in linear space here
    assert m.pdf(90.0) == 0.0
    lp = m.log_pdf(90.0)
    expected = math.log(0.5) + Normal(0, 2).log_pdf(90.0)
    assert np.isfinite(lp) and lp == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kind", [Normal, Logistic])
def test_vectorised_path_matches_generic(kind):
    rng = np.random.default_rng(5)
    comps = [kind(rng.uniform(-3, 3), rng.uniform(0.2, 2)) for _ in range(7)]
    w = rng.dirichlet(np.ones(7))
    fast = FiniteMixture(comps, w)
    y = np.linspace(-30, 30, 61)
    slow = np.log(sum(wi * np.exp(c.log_pdf(y)) for wi, c in zip(w, comps)))
    np.testing.assert_allclose(fast.log_pdf(y), slow, rtol=1e-12)


def test_mixture_of_mixtures_is_linear():
    a = FiniteMixture([Normal(0, 1), Logistic(1, 2)], [0.3, 0.7])
    b = FiniteMixture([SkewNormal(0, 1, 4)], [1.0])
    w = 0.25
    concat = FiniteMixture(a.components + b.components, np.concatenate([w * a.weights, (1 - w) * b.weights]))
    y = np.linspace(-5, 8, 40)
    np.testing.assert_allclose(concat.pdf(y), w * a.pdf(y) + (1 - w) * b.pdf(y), rtol=1e-12)
    np.testing.assert_allclose(concat.cdf(y), w * a.cdf(y) + (1 - w) * b.cdf(y), rtol=1e-12, atol=1e-15)


def test_sampling(rng):
    assert TWO.sample(rng, 0).size == 0
    m = FiniteMixture([Normal(-50, 1), Normal(50, 1)], [1.0, 0.0])
    assert np.all(m.sample(rng, 10_000) < 0)


def test_moments_unavailable():
    m = FiniteMixture([StudentT(1), Normal()], [0.5, 0.5])
    with pytest.raises(MomentUnavailableError):
        m.moments()


def test_student_t_approximation(t_mixture, t_grid):
    assert t_mixture.k == t_grid.k
    assert t_mixture.pdf(0.0) == pytest.approx(T5_PDF_0, rel=1e-2)
    assert t_mixture.quantile(0.975) == pytest.approx(T5_Q975, rel=5e-3)
    assert t_mixture.variance == pytest.approx(5 / 3, rel=2e-2)
    assert t_mixture.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_from_grid_without_renormalisation(t_grid, t_family):
    with pytest.raises(ValueError):
        from_grid(t_grid, t_family, renormalize=False)  # raw weights lack the dropped tail
    g = Grid(t_grid.reference_points, t_grid.margins, t_grid.weights / t_grid.weights.sum())
    m = from_grid(g, t_family, renormalize=False)
    np.testing.assert_allclose(m.weights, g.weights)


def test_student_t_sample_ks(t_mixture):
    rng = np.random.default_rng(7)
    n = 10**6
    x = np.sort(t_mixture.sample(rng, n))
    f = StudentT(5).cdf(x)
    ks = max(np.max(np.arange(1, n + 1) / n - f), np.max(f - np.arange(n) / n))
    # sampling noise plus the approximation's own cdf error
    sup_err = np.max(np.abs(t_mixture.cdf(np.linspace(-8, 8, 801)) - StudentT(5).cdf(np.linspace(-8, 8, 801))))
    assert ks < 1.95 / math.sqrt(n) + sup_err


def test_pdf_integrates_to_one(t_mixture, conv_mixture):
    for m in (t_mixture, conv_mixture):
        edges = m.quantile(np.array([1e-12, 0.01, 0.5, 0.99, 1 - 1e-12]))
        total = sum(integrate.quad(m.pdf, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                    for a, b in zip(edges[:-1], edges[1:]))
        assert total == pytest.approx(1 - 2e-12, abs=1e-8)


def test_quantile_roundtrip(t_mixture, conv_mixture):
    p = np.array([0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999])
    for m in (t_mixture, conv_mixture):
        np.testing.assert_allclose(m.cdf(m.quantile(p)), p, atol=1e-9)
    med = conv_mixture.quantile(0.5)
    assert conv_mixture.cdf(med) == pytest.approx(0.5, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_mixture_contract(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 8))
    comps = [[Normal, Logistic][int(rng.integers(2))](rng.uniform(-10, 10), rng.uniform(0.05, 5))
             for _ in range(k)]
    m = FiniteMixture(comps, rng.dirichlet(np.ones(k)))
    y = np.sort(rng.uniform(-30, 30, 50))
    assert np.all(m.pdf(y) >= 0)
    assert np.all(np.diff(m.cdf(y)) >= 0)
    p = np.array([1e-4, 0.1, 0.5, 0.9, 1 - 1e-4])
    np.testing.assert_allclose(m.cdf(m.quantile(p)), p, atol=1e-10)


def test_continuous_mixture_reproduces_student_t():
    exact = ContinuousMixture(normal_scale_family(5), __import__("direct_mixture").ChiSquared(5))
    y = np.array([-4.0, 0.0, 1.5, 7.0])
    np.testing.assert_allclose(exact.pdf(y), StudentT(5).pdf(y), rtol=1e-9)
    np.testing.assert_allclose(exact.cdf(y), StudentT(5).cdf(y), rtol=1e-9)


def test_continuous_mixture_normal_location():
    # normal location mixed over a normal is normal with added variances
    exact = ContinuousMixture(location_family(Normal(0, 0.6)), Normal(1, 0.8))
    y = np.array([-1.0, 1.0, 2.5])
    np.testing.assert_allclose(exact.pdf(y), Normal(1, 1.0).pdf(y), rtol=1e-9)
    assert exact.quantile(0.9) == pytest.approx(Normal(1, 1.0).quantile(0.9), abs=1e-8)
