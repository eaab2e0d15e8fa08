import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fransdcp.errors import DomainError, StabilityError
from fransdcp.queueing import (Mg1Fap, Mm1Stage, hypoexp_pdf, mg1_mean_sojourn,
                               mg1_sojourn_cdf, mg1_sojourn_laplace, mg1_sojourn_pdf,
                               mm1_sojourn_cdf)

TABLE_FAP = Mg1Fap(1600.0, 2.4e5, 1.6e5)


def _quad(f, upper=math.inf):
    val, _ = integrate.quad(f, 0.0, upper, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


def _panels(fap, upper=None):
    """Panel edges resolving both decay scales of the sojourn density."""
    scales = sorted(2.0 / abs(r) for r in (fap.varsigma, fap.varsigma_prime))
    edges = {0.0, 80.0 * scales[1]}
    for sc in scales:
        edges.update(sc * k for k in (0.01, 0.1, 0.5, 1, 2, 5, 10, 20, 40))
    edges = sorted(edges)
    if upper is not None:
        edges = [e for e in edges if e < upper] + [upper]
    return edges


def _quad_pdf(fap, weight=lambda t: 1.0, upper=None):
    """Integral of weight(t) * pdf(t); the tail past 80 slow scales is < e^-40."""
    edges = _panels(fap, upper)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda t: weight(t) * mg1_sojourn_pdf(fap, t), a, b,
                                epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total


@st.composite
def stable_fap(draw):
    md = draw(st.floats(1.0, 1e6))
    mc = draw(st.floats(1.0, 1e6))
    rho = draw(st.floats(0.01, 0.95))
    lam = rho / (1.0 / md + 1.0 / mc)
    return Mg1Fap(lam, md, mc)


def test_mm1_values():
    st_ = Mm1Stage(200.0, 1e4)
    assert mm1_sojourn_cdf(st_, 0.0) == 0.0
    assert mm1_sojourn_cdf(st_, math.log(2) / st_.sojourn_param) == pytest.approx(0.5)
    assert mm1_sojourn_cdf(st_, 1e-3) == pytest.approx(1 - math.exp(-9.8), rel=1e-14)


def test_mm1_stability():
    with pytest.raises(StabilityError):
        Mm1Stage(100.0, 100.0)
    with pytest.raises(DomainError):
        Mm1Stage(0.0, 1.0)


def test_mm1_arrays():
    out = mm1_sojourn_cdf(Mm1Stage(1.0, 2.0), np.array([0.0, 1.0]))
    assert out.shape == (2,) and out[0] == 0.0


def test_hypoexp_zero():
    assert hypoexp_pdf(3.0, 5.0, 0.0) == 0.0


@pytest.mark.parametrize("mu", [1.0, 7.5, 2e5])
def test_hypoexp_erlang_limit(mu):
    x = np.linspace(0.0, 10.0 / mu, 50)
    erlang = mu * mu * x * np.exp(-mu * x)
    assert np.allclose(hypoexp_pdf(mu, mu, x), erlang, rtol=1e-12, atol=0)
    near = hypoexp_pdf(mu * (1 + 1e-6), mu, x[1:])
    assert np.allclose(near, erlang[1:], rtol=1e-4)


@pytest.mark.parametrize("md, mc", [(2.4e5, 1.6e5), (5.0, 3.0), (10.0, 10.0)])
def test_hypoexp_normalized(md, mc):
    # integrate in units of the slower mean so the peak is not missed
    sc = 1.0 / min(md, mc)
    assert _quad(lambda u: sc * hypoexp_pdf(md, mc, sc * u)) == pytest.approx(1.0, abs=1e-9)


def test_fap_constants():
    fap = TABLE_FAP
    assert fap.rho == pytest.approx(1600 * (1 / 2.4e5 + 1 / 1.6e5))
    assert fap.varsigma < fap.varsigma_prime < 0
    # roots of s^2 + (mu_hat - lam) s + (mu_dd mu_cp - lam mu_hat) scaled by 2
    s = 0.5 * np.array([fap.varsigma, fap.varsigma_prime])
    poly = s * s + (fap.mu_hat - fap.arrival_rate) * s + (
        fap.mu_dd * fap.mu_cp - fap.arrival_rate * fap.mu_hat)
    assert np.allclose(poly, 0.0, atol=1e-6 * fap.mu_dd * fap.mu_cp)


def test_fap_stability():
    with pytest.raises(StabilityError):
        Mg1Fap(2.0, 3.0, 3.0)
    with pytest.raises(StabilityError):
        Mg1Fap(0.0, 3.0, 3.0)


@given(stable_fap())
def test_mg1_pdf_normalized(fap):
    assert _quad_pdf(fap) == pytest.approx(1.0, abs=1e-8)


def test_mg1_endpoints():
    assert mg1_sojourn_pdf(TABLE_FAP, 0.0) == 0.0
    assert mg1_sojourn_cdf(TABLE_FAP, 0.0) == 0.0
    assert mg1_sojourn_cdf(TABLE_FAP, 1.0) == pytest.approx(1.0, abs=1e-9)


def test_mg1_empty_queue_limit():
    x = np.linspace(1e-7, 1e-4, 40)
    lam = 1e-6
    fap = Mg1Fap(lam, 2.4e5, 1.6e5)
    assert np.allclose(mg1_sojourn_pdf(fap, x), hypoexp_pdf(2.4e5, 1.6e5, x), rtol=1e-6)


@given(stable_fap(), st.floats(0.0, 20.0))
def test_mg1_cdf_is_integral_of_pdf(fap, k):
    t = k / abs(fap.varsigma_prime)
    ref = _quad_pdf(fap, upper=t) if t > 0 else 0.0
    assert mg1_sojourn_cdf(fap, t) == pytest.approx(ref, abs=1e-9)


def test_laplace_at_zero_is_one():
    assert mg1_sojourn_laplace(TABLE_FAP, 0.0) == 1.0


@pytest.mark.parametrize("mult", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("fap", [TABLE_FAP, Mg1Fap(1.0, 3.0, 2.0), Mg1Fap(2.5, 10.0, 10.0)])
def test_laplace_matches_pdf_transform(fap, mult):
    s = mult * fap.mu_hat
    ref = _quad_pdf(fap, lambda t: math.exp(-s * t))
    assert mg1_sojourn_laplace(fap, s) == pytest.approx(ref, abs=1e-7)


@given(stable_fap())
def test_pk_mean_matches_moment_and_laplace_slope(fap):
    mean = mg1_mean_sojourn(fap)
    moment = _quad_pdf(fap, lambda t: t)
    assert mean == pytest.approx(moment, rel=1e-6)
    h = 1e-5 / mean
    slope = (mg1_sojourn_laplace(fap, 0.0) - mg1_sojourn_laplace(fap, h)) / h
    assert slope == pytest.approx(mean, rel=1e-4)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        mg1_sojourn_cdf(TABLE_FAP, -1.0)
    with pytest.raises(DomainError):
        mg1_sojourn_laplace(TABLE_FAP, -1.0)
