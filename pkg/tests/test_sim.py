import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fransdcp.errors import DomainError, StabilityError
from fransdcp.geometry import sample_scenes
from fransdcp.model import CompressionMode
from fransdcp.queueing import (Mg1Fap, Mm1Stage, mg1_mean_sojourn, mg1_sojourn_cdf,
                               mm1_sojourn_cdf)
from fransdcp.sdcp import sdcp, step
from fransdcp.sim import (McConfig, mc_sdcp, mc_step, mc_stp, mc_stp_curve, sir_samples,
                          simulate_sojourns_mg1, simulate_sojourns_mm1, stream,
                          wilson_estimate)
from fransdcp.stp import SirThreshold, stp_approx

Z = 2.5758293035489004


# --- intervals ----------------------------------------------------------------

@given(n=st.integers(1, 10_000), frac=st.floats(0.0, 1.0))
def test_wilson_bounds_solve_score_equation(n, frac):
    k = round(frac * n)
    est = wilson_estimate(k, n)
    p_hat = k / n
    # Wilson bounds are the roots of (p_hat - p)^2 = z^2 p (1 - p) / n
    c = Z * Z / n
    roots = np.sort(np.roots([1 + c, -(2 * p_hat + c), p_hat ** 2]).real)
    assert est.point == p_hat
    assert est.half_width_99 == pytest.approx(max(p_hat - roots[0], roots[1] - p_hat),
                                              abs=1e-12)
    assert est.half_width_99 > 0
    assert 0.0 <= est.lower <= est.point <= est.upper <= 1.0


def test_wilson_rejects_empty():
    with pytest.raises(DomainError):
        wilson_estimate(0, 0)


def test_estimate_covers():
    est = wilson_estimate(500, 1000)
    assert est.covers(0.5) and est.covers(0.54)
    assert not est.covers(0.6)


# --- config and streams -------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(iterations=0), dict(tasks=0), dict(threads=0),
                                dict(warmup_fraction=1.0), dict(warmup_fraction=-0.1),
                                dict(coupling_mode="both"), dict(seed=-1)])
def test_mc_config_validation(kw):
    with pytest.raises((DomainError, ValueError)):
        McConfig(**kw)


def test_streams_reproducible_and_distinct():
    a = stream(7, "step/ue").random(1000)
    assert np.array_equal(a, stream(7, "step/ue").random(1000))
    others = [stream(7, "step/fn").random(1000), stream(7, "step/ue", 1).random(1000),
              stream(8, "step/ue").random(1000)]
    for b in others:
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.15


# --- STP ----------------------------------------------------------------------

def test_sir_is_deterministic(net):
    cfg = McConfig(iterations=1500, seed=3)
    assert np.array_equal(sir_samples(net, cfg), sir_samples(net, cfg))


def test_sir_is_thread_invariant(net):
    cfg = McConfig(iterations=3500, seed=11)
    one = sir_samples(net, cfg)
    four = sir_samples(net, dataclasses.replace(cfg, threads=4))
    assert np.array_equal(one, four)


def test_sir_matches_per_scene_formula_at_any_power(net):
    cfg = McConfig(iterations=200, seed=5)
    fast = sir_samples(net, cfg)
    batch = sample_scenes(net, 200, None, stream(5, "stp", 0))
    for p in (1.0, 37.0):
        loud = dataclasses.replace(net, max_tx_power=p)
        slow = np.array([batch.scene(i).sir(loud) for i in range(len(batch))])
        np.testing.assert_allclose(fast, slow, rtol=1e-10)


def test_zero_threshold_always_succeeds(net):
    est = mc_stp(net, 0.0, McConfig(iterations=2000))
    assert est.point == 1.0


def test_stp_curve_is_monotone(net):
    ests = mc_stp_curve(net, [0.5, 1.0, 2.0, 4.0], McConfig(iterations=3000))
    pts = [e.point for e in ests]
    assert pts == sorted(pts, reverse=True)


@pytest.mark.parametrize("db", [0.0, 3.0])
def test_stp_estimate_covers_approximation(net, db):
    tau = SirThreshold.from_db(db).tau
    est = mc_stp(net, tau, McConfig(seed=42))
    assert est.covers(stp_approx(tau, net))


# --- queues -------------------------------------------------------------------

def _batch_means_covers(x, value, batches=50):
    """99% batch-means interval; batching absorbs the queue's autocorrelation."""
    means = x[: x.size // batches * batches].reshape(batches, -1).mean(axis=1)
    half = stats.t.ppf(0.995, batches - 1) * means.std(ddof=1) / math.sqrt(batches)
    return abs(means.mean() - value) <= half


@pytest.mark.parametrize("lam, mu", [(50.0, 100.0), (900.0, 1000.0), (1e-3, 10.0)])
def test_mm1_sojourn_distribution(lam, mu):
    x = simulate_sojourns_mm1(lam, mu, 1_000_000, stream(1, "t/mm1"))
    assert _batch_means_covers(x, 1.0 / (mu - lam))
    xs = np.sort(x)
    ecdf = np.arange(1, xs.size + 1) / xs.size
    gap = np.max(np.abs(ecdf - mm1_sojourn_cdf(Mm1Stage(lam, mu), xs)))
    assert gap < (0.03 if lam / mu > 0.8 else 0.01)


@pytest.mark.parametrize("fap", [Mg1Fap(1600.0, 2.4e5, 1.6e5), Mg1Fap(60.0, 200.0, 150.0)])
def test_mg1_sojourn_distribution(fap):
    x = simulate_sojourns_mg1(fap, 1_000_000, stream(2, "t/mg1"))
    assert _batch_means_covers(x, mg1_mean_sojourn(fap))
    xs = np.sort(x)
    ecdf = np.arange(1, xs.size + 1) / xs.size
    assert np.max(np.abs(ecdf - mg1_sojourn_cdf(fap, xs))) < 0.01
    median = np.median(x)
    assert mg1_sojourn_cdf(fap, median) == pytest.approx(0.5, abs=0.01)


def test_light_load_mg1_is_pure_service():
    fap = Mg1Fap(1e-3, 200.0, 150.0)
    x = simulate_sojourns_mg1(fap, 1_000_000, stream(3, "t/mg1"))
    assert _batch_means_covers(x, 1 / 200 + 1 / 150)


def test_queue_simulators_reject_unstable():
    with pytest.raises(StabilityError):
        simulate_sojourns_mm1(10.0, 10.0, 10, stream(0, "x"))
    with pytest.raises(DomainError):
        simulate_sojourns_mm1(0.0, 10.0, 10, stream(0, "x"))
    with pytest.raises(DomainError):
        simulate_sojourns_mm1(1.0, 10.0, 0, stream(0, "x"))


def test_warmup_is_dropped():
    n = 1000
    full = simulate_sojourns_mm1(5.0, 10.0, n, stream(4, "w"), warmup_fraction=0.0)
    warm = simulate_sojourns_mm1(5.0, 10.0, n, stream(4, "w"), warmup_fraction=0.5)
    assert full.shape == warm.shape == (n,)
    assert not np.array_equal(full, warm)


# --- STEP ---------------------------------------------------------------------

def test_below_floor_never_succeeds(rates, budget):
    mode = CompressionMode.hybrid(0.6)
    floor = budget.floor(0.6)
    ests = mc_step(mode, rates, budget, [0.5 * floor, floor], McConfig(tasks=20_000))
    assert [e.point for e in ests] == [0.0, 0.0]


@pytest.mark.parametrize("mode", [CompressionMode.local(), CompressionMode.edge()])
def test_coupling_modes_agree_at_endpoints(rates, budget, mode):
    grid = np.linspace(1e-3, 3e-3, 7)
    cfg = McConfig(tasks=50_000, seed=9)
    a = mc_step(mode, rates, budget, grid, cfg)
    b = mc_step(mode, rates, budget, grid,
                dataclasses.replace(cfg, coupling_mode="routing_mixture"))
    assert a == b


@pytest.mark.parametrize("mode", [CompressionMode.local(), CompressionMode.edge(),
                                  CompressionMode.hybrid(0.6)])
def test_step_grid_agrees(rates, budget, mode):
    beta = mode.effective_beta
    floor = budget.floor(beta)
    grid = floor + np.linspace(2e-5, 6e-4, 20)
    ests = mc_step(mode, rates, budget, grid, McConfig(seed=42))
    for rho, est in zip(grid, ests):
        assert est.covers(step(mode, rates, budget.residual(rho, beta)))


def test_ci_shrinks_with_tasks(rates, budget):
    mode = CompressionMode.hybrid(0.6)
    rho = [budget.floor(0.6) + 1e-4]
    small = mc_step(mode, rates, budget, rho, McConfig(tasks=200_000, seed=1))[0]
    large = mc_step(mode, rates, budget, rho, McConfig(tasks=400_000, seed=1))[0]
    assert large.half_width_99 / small.half_width_99 == pytest.approx(1 / math.sqrt(2),
                                                                      rel=0.1)


def test_step_grid_must_ascend(rates, budget):
    with pytest.raises(DomainError):
        mc_step(CompressionMode.local(), rates, budget, [2e-3, 1e-3], McConfig(tasks=10))


# --- SDCP ---------------------------------------------------------------------

@pytest.mark.parametrize("db", [0.0, 3.0])
def test_sdcp_estimate_covers_analytic(net, task, hw, db):
    tau = SirThreshold.from_db(db).tau
    mode = CompressionMode.hybrid(0.6)
    grid = [2e-3, 4e-3, 6e-3]
    ests = mc_sdcp(mode, net, task, hw, tau, grid, McConfig(seed=42))
    for rho, est in zip(grid, ests):
        analytic = sdcp(mode, net, dataclasses.replace(task, target_latency=rho), hw, tau)
        assert est.covers(analytic)


def test_sdcp_estimate_zero_when_step_zero(net, task, hw):
    ests = mc_sdcp(CompressionMode.edge(), net, task, hw, 1.0, [1e-5],
                   McConfig(iterations=1000, tasks=1000))
    assert ests[0].point == 0.0
