"""Monte Carlo oracles for STP, STEP and SDCP.

STP is estimated from sampled interference scenes; STEP from Lindley-recursion
simulations of the UE, FN and FAP queues. Every random stream is derived from
``(seed, label, index)`` so estimates are reproducible and independent of the
number of worker threads.
"""
from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .errors import DomainError, StabilityError
from .geometry import NetworkParams, sample_scenes
from .model import (CompressionMode, DelayBudget, HardwareProfile, ServiceRates,
                    TaskProfile, delay_budget, derive_service_rates, require_stable)
from .queueing import Mg1Fap
from .sdcp import SdcpOptions
from .stp import ergodic_uplink_rate

__all__ = [
    "McConfig",
    "EstimateWithCi",
    "stream",
    "wilson_estimate",
    "sir_samples",
    "mc_stp",
    "mc_stp_curve",
    "simulate_sojourns_mm1",
    "simulate_sojourns_mg1",
    "mc_step",
    "mc_sdcp",
]

Z99 = 2.5758293035489004
_SCENE_BATCH = 1000


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    ``iterations`` counts interference scenes for STP; ``tasks`` counts tagged
    tasks for STEP. ``window_radius=None`` uses the geometry default.
    """

    iterations: int = 10_000
    tasks: int = 1_000_000
    seed: int = 0
    coupling_mode: Literal["weighted_sum", "routing_mixture"] = "weighted_sum"
    warmup_fraction: float = 0.1
    window_radius: float | None = None
    threads: int = 1

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 100:
            raise DomainError(f"iterations must be an integer >= 100, got {self.iterations}")
        if int(self.tasks) != self.tasks or self.tasks < 100:
            raise DomainError(f"tasks must be an integer >= 100, got {self.tasks}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.coupling_mode not in ("weighted_sum", "routing_mixture"):
            raise DomainError(f"unknown coupling mode {self.coupling_mode!r}")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise DomainError("warmup_fraction must lie in [0, 1)")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")


@dataclass(frozen=True)
class EstimateWithCi:
    point: float
    half_width_99: float
    n_effective: int

    @property
    def lower(self) -> float:
        return max(0.0, self.point - self.half_width_99)

    @property
    def upper(self) -> float:
        return min(1.0, self.point + self.half_width_99)

    def covers(self, value: float) -> bool:
        return abs(value - self.point) <= self.half_width_99


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Independent generator for one named stream and chunk index."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(label.encode()), index))
    return np.random.Generator(np.random.PCG64(ss))


def wilson_estimate(successes: int, n: int, z: float = Z99) -> EstimateWithCi:
    """Binomial proportion with the Wilson score interval.

    The half-width is the larger distance from the point estimate to either
    Wilson bound, so it stays positive at 0 and 1 successes-rates.
    """
    if n <= 0:
        raise DomainError("n must be > 0")
    p = successes / n
    z2n = z * z / n
    centre = (p + 0.5 * z2n) / (1.0 + z2n)
    spread = z * math.sqrt(p * (1.0 - p) / n + 0.25 * z2n / n) / (1.0 + z2n)
    lo, hi = centre - spread, centre + spread
    return EstimateWithCi(p, max(p - lo, hi - p), int(n))


# --- STP --------------------------------------------------------------------

def _sir_batch(params, n, window, rng):
    batch = sample_scenes(params, n, window, rng)
    a, eps = params.pathloss_exponent, params.power_control_factor
    interference = kernels.scene_interference(
        batch.fn_distance_sq, batch.own_fn_distance_sq, batch.angle, batch.fade,
        batch.counts, a, eps)
    # transmit power multiplies both signal and interference and cancels
    signal = batch.tagged_fade * batch.tagged_ue_distance_sq ** (-0.5 * a * (1.0 - eps))
    with np.errstate(divide="ignore"):
        return signal / interference


def sir_samples(params: NetworkParams, cfg: McConfig) -> np.ndarray:
    """``cfg.iterations`` SIR draws at the typical FN (``inf`` if no interferer)."""
    sizes = [min(_SCENE_BATCH, cfg.iterations - s)
             for s in range(0, cfg.iterations, _SCENE_BATCH)]

    def job(i):
        return _sir_batch(params, sizes[i], cfg.window_radius,
                          stream(cfg.seed, "stp", i))

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    return np.concatenate(parts)


def mc_stp_curve(params: NetworkParams, taus, cfg: McConfig) -> list[EstimateWithCi]:
    """STP estimates at several thresholds from one shared set of scenes."""
    sir = sir_samples(params, cfg)
    out = []
    for t in taus:
        t = float(t)
        if not t >= 0:
            raise DomainError(f"tau must be >= 0, got {t}")
        out.append(wilson_estimate(int(np.count_nonzero(sir > t)), sir.shape[0]))
    return out


def mc_stp(params: NetworkParams, tau, cfg: McConfig) -> EstimateWithCi:
    return mc_stp_curve(params, [float(tau)], cfg)[0]


# --- queues -----------------------------------------------------------------

def _warm_total(n, warmup_fraction):
    if n < 1:
        raise DomainError("n must be >= 1")
    return n + math.ceil(n * warmup_fraction / (1.0 - warmup_fraction))


def simulate_sojourns_mm1(arrival_rate: float, service_rate: float, n: int,
                          rng: np.random.Generator,
                          warmup_fraction: float = 0.1) -> np.ndarray:
    """``n`` post-warmup sojourn times of an M/M/1 FIFO queue."""
    if not arrival_rate > 0:
        raise DomainError("arrival rate must be > 0")
    if not service_rate > arrival_rate:
        raise StabilityError(
            f"M/M/1 unstable: service rate {service_rate:g} <= arrival rate {arrival_rate:g}")
    total = _warm_total(n, warmup_fraction)
    gaps = rng.exponential(1.0 / arrival_rate, total)
    services = rng.exponential(1.0 / service_rate, total)
    return kernels.lindley_sojourns(gaps, services)[total - n:]


def simulate_sojourns_mg1(fap: Mg1Fap, n: int, rng: np.random.Generator,
                          warmup_fraction: float = 0.1) -> np.ndarray:
    """``n`` post-warmup sojourns with service ``Exp(mu_dd) + Exp(mu_cp)``."""
    if not fap.rho < 1.0:
        raise StabilityError(f"M/G/1 unstable: utilization {fap.rho:g}")
    total = _warm_total(n, warmup_fraction)
    gaps = rng.exponential(1.0 / fap.arrival_rate, total)
    services = (rng.exponential(1.0 / fap.mu_dd, total)
                + rng.exponential(1.0 / fap.mu_cp, total))
    return kernels.lindley_sojourns(gaps, services)[total - n:]


def _grid(rho_grid):
    grid = np.asarray(rho_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("rho grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("rho grid must be strictly ascending")
    return grid


def _task_delays(mode, rates, delays, cfg, thinned):
    beta = mode.effective_beta
    n, w, seed = cfg.tasks, cfg.warmup_fraction, cfg.seed
    fap = simulate_sojourns_mg1(rates.fap(), n, stream(seed, "step/fap"), w)
    if cfg.coupling_mode == "weighted_sum":
        require_stable(rates, beta, thinned)
        lam_ue, lam_fn = rates.dc_arrivals(beta, thinned)
        dc = np.zeros(n)
        if beta < 1.0:
            dc += (1.0 - beta) * simulate_sojourns_mm1(
                lam_ue, rates.mu_uc, n, stream(seed, "step/ue"), w)
        if beta > 0.0:
            dc += beta * simulate_sojourns_mm1(
                lam_fn, rates.mu_nc, n, stream(seed, "step/fn"), w)
        return delays.floor(beta) + dc + fap
    # each task picks one compression site; the queues see thinned traffic
    require_stable(rates, beta, True)
    lam_ue, lam_fn = rates.dc_arrivals(beta, True)
    to_fn = stream(seed, "step/route").random(n) < beta if 0.0 < beta < 1.0 \
        else np.full(n, beta == 1.0)
    k = int(np.count_nonzero(to_fn))
    dc = np.empty(n)
    floor = np.empty(n)
    if k < n:
        dc[~to_fn] = simulate_sojourns_mm1(lam_ue, rates.mu_uc, n - k,
                                           stream(seed, "step/ue"), w)
        floor[~to_fn] = delays.uplink_local + delays.backhaul
    if k > 0:
        dc[to_fn] = simulate_sojourns_mm1(lam_fn, rates.mu_nc, k,
                                          stream(seed, "step/fn"), w)
        floor[to_fn] = delays.uplink_edge + delays.backhaul
    return floor + dc + fap


def mc_step(mode: CompressionMode, rates: ServiceRates, delays: DelayBudget,
            rho_grid, cfg: McConfig, thinned: bool = False) -> list[EstimateWithCi]:
    """Fraction of tagged tasks finishing within each target latency.

    ``weighted_sum`` adds ``beta`` times an FN sojourn to ``1 - beta`` times a
    UE sojourn, with both queues at full load (``thinned`` mirrors the
    analytic option). ``routing_mixture`` sends each task through one site
    with probability ``beta`` and always uses thinned arrivals.
    """
    grid = _grid(rho_grid)
    total = np.sort(_task_delays(mode, rates, delays, cfg, thinned))
    hits = np.searchsorted(total, grid, side="right")
    return [wilson_estimate(int(h), total.shape[0]) for h in hits]


# --- SDCP -------------------------------------------------------------------

def _product(a: EstimateWithCi, b: EstimateWithCi) -> EstimateWithCi:
    point = a.point * b.point
    half = math.hypot(b.point * a.half_width_99, a.point * b.half_width_99)
    return EstimateWithCi(min(max(point, 0.0), 1.0), half,
                          min(a.n_effective, b.n_effective))


def mc_sdcp(mode: CompressionMode, network: NetworkParams, task: TaskProfile,
            hw: HardwareProfile, tau, rho_grid, cfg: McConfig,
            options: SdcpOptions = SdcpOptions()) -> list[EstimateWithCi]:
    """Product of the STP and STEP estimates; the CI follows the delta method.

    Target latencies come from ``rho_grid``; ``task.target_latency`` is
    ignored. The uplink rate entering the delay budget is analytic.
    """
    stp = mc_stp(network, tau, cfg)
    rate = ergodic_uplink_rate(network, options.formula_mode)
    budget = delay_budget(task, hw, rate, options.uplink_numerator)
    rates = derive_service_rates(task, hw, options.cycle_convention)
    steps = mc_step(mode, rates, budget, rho_grid, cfg, options.thinned_arrivals)
    return [_product(stp, s) for s in steps]
