"""Successful task execution probability (STEP), SDCP, and the optimal COR.

STEP is ``P(beta*T_fn + (1-beta)*T_ue + T_fap < rho')`` where the two
compression sojourns are exponential and ``T_fap`` follows the M/G/1 sojourn
law. The single-site cases convolve one exponential with the FAP density
through :func:`a_func`. The hybrid case convolves a two-phase
hypo-exponential with it, written with divided differences of ``exp`` so that
equal phase rates need no special handling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

from .errors import DomainError, NumericalInconsistency
from .geometry import NetworkParams
from .model import (CompressionMode, HardwareProfile, ServiceRates, TaskProfile,
                    delay_budget, derive_service_rates, require_stable)
from .queueing import Mg1Fap, mg1_sojourn_cdf
from .stp import ergodic_uplink_rate, stp_approx

__all__ = [
    "StepInputs",
    "SdcpOptions",
    "SdcpBreakdown",
    "a_func",
    "step_local",
    "step_edge",
    "step_hybrid",
    "step_failure",
    "step",
    "step_inputs",
    "sdcp",
    "evaluate",
    "optimize_beta",
]


@dataclass(frozen=True)
class StepInputs:
    sigma_u: float
    sigma_n: float
    fap: Mg1Fap
    beta: float
    rho_prime: float

    def __post_init__(self):
        if not (self.sigma_u > 0 and self.sigma_n > 0):
            raise DomainError("sojourn parameters must be > 0")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")


def a_func(a: float, b: float, c: float, x: float) -> float:
    """``int_0^x exp(a t / 2) exp(-(c/b)(x - t)) dt`` in closed form."""
    if not b > 0:
        raise DomainError(f"b must be > 0, got {b}")
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    s = 2.0 * c + b * a
    decay = math.exp(-c * x / b)
    if abs(s) < 1e-9 * max(2.0 * c, abs(b * a)):
        return x * decay
    k = s / (2.0 * b)
    if k * x < 1.0:
        return decay * math.expm1(k * x) / k
    return (math.exp(0.5 * a * x) - decay) / k


def _fap_convolution(fap: Mg1Fap, b: float, c: float, x: float) -> float:
    """``int_0^x f_fap(t) exp(-(c/b)(x - t)) dt``."""
    return fap.prefactor * (a_func(fap.varsigma_prime, b, c, x)
                            - a_func(fap.varsigma, b, c, x))


def _check(val: float) -> float:
    if not -1e-8 <= val <= 1.0 + 1e-8:
        raise NumericalInconsistency(f"STEP evaluated to {val!r}")
    return min(max(val, 0.0), 1.0)


def _fap_survival(fap: Mg1Fap, x: float) -> float:
    """``P(T_fap > x)`` as a sum of decaying exponentials (no cancellation)."""
    s, sp = fap.varsigma, fap.varsigma_prime
    return fap.prefactor * (2.0 / s * math.exp(0.5 * s * x)
                            - 2.0 / sp * math.exp(0.5 * sp * x))


def _single_queue_step(sigma: float, fap: Mg1Fap, x: float) -> float:
    if x <= 0:
        return 0.0
    return _check(mg1_sojourn_cdf(fap, x) - _fap_convolution(fap, 1.0, sigma, x))


def _single_queue_failure(sigma: float, fap: Mg1Fap, x: float) -> float:
    if x <= 0:
        return 1.0
    return _check(_fap_survival(fap, x) + _fap_convolution(fap, 1.0, sigma, x))


def step_local(inp: StepInputs) -> float:
    """STEP when every task is compressed at the UE."""
    return _single_queue_step(inp.sigma_u, inp.fap, inp.rho_prime)


def step_edge(inp: StepInputs) -> float:
    """STEP when every task is compressed at the FN."""
    return _single_queue_step(inp.sigma_n, inp.fap, inp.rho_prime)


def _exp_dd1(z0: float, z1: float) -> float:
    """Divided difference ``exp[z0, z1]``; equals ``exp(z0)`` when they coincide."""
    lo, hi = (z0, z1) if z0 <= z1 else (z1, z0)
    h = hi - lo
    if h == 0.0:
        return math.exp(hi)
    return math.exp(hi) * -math.expm1(-h) / h


def _exp_dd2(z0: float, z1: float, z2: float) -> float:
    """Second divided difference ``exp[z0, z1, z2]``, positive and cancellation-free."""
    za, zb, zc = sorted((z0, z1, z2))
    spread = zc - za
    if spread > 1.0:
        return (_exp_dd1(zb, zc) - _exp_dd1(za, zb)) / spread
    # exp[za + 0, za + b, za + c] = e^za sum_n h_n(b, c) / (n + 2)!
    b, c = zb - za, spread
    h, c_pow, fact, acc = 1.0, 1.0, 2.0, 0.5
    for n in range(1, 30):
        c_pow *= c
        h = c_pow + b * h
        fact *= n + 2
        term = h / fact
        acc += term
        if term < 1e-17 * acc:
            break
    return math.exp(za) * acc


def _hybrid_convolution(sigma_u, sigma_n, fap, beta, x):
    """``P(T_fap <= x < T_fap + D)`` with ``D = beta*Exp(sigma_n) + (1-beta)*Exp(sigma_u)``.

    With ``D`` phase rates ``r1, r2`` and a density exponent ``a``, the convolution
    of ``e^{a t}`` with the survival of ``D`` is
    ``x exp[-r1 x, a x] + r1 x^2 exp[-r1 x, -r2 x, a x]``. Both divided
    differences are positive, so equal phase rates need no special case.
    """
    r1, r2 = sorted((sigma_n / beta, sigma_u / (1.0 - beta)))
    z1, z2 = -r1 * x, -r2 * x

    def term(a):
        zq = a * x
        return x * _exp_dd1(z1, zq) + r1 * x * x * _exp_dd2(z1, z2, zq)

    return fap.prefactor * (term(0.5 * fap.varsigma_prime) - term(0.5 * fap.varsigma))


def _hybrid(inp: StepInputs, failure: bool) -> float:
    beta, x = inp.beta, inp.rho_prime
    if not 0.0 < beta < 1.0:
        raise DomainError(f"step_hybrid needs 0 < beta < 1, got {beta}")
    if x <= 0:
        return 1.0 if failure else 0.0
    conv = _hybrid_convolution(inp.sigma_u, inp.sigma_n, inp.fap, beta, x)
    if failure:
        return _check(_fap_survival(inp.fap, x) + conv)
    return _check(mg1_sojourn_cdf(inp.fap, x) - conv)


def step_hybrid(inp: StepInputs) -> float:
    """STEP for a strictly interior offloading ratio."""
    return _hybrid(inp, False)


def step_failure(inp: StepInputs) -> float:
    """``1 - STEP`` evaluated directly.

    The direct sum keeps full relative precision when STEP rounds to 1,
    which is what the offloading-ratio search compares.
    """
    if inp.beta == 0.0:
        return _single_queue_failure(inp.sigma_u, inp.fap, inp.rho_prime)
    if inp.beta == 1.0:
        return _single_queue_failure(inp.sigma_n, inp.fap, inp.rho_prime)
    return _hybrid(inp, True)


def step_inputs(mode: CompressionMode, rates: ServiceRates, rho_prime: float,
                thinned: bool = False) -> StepInputs:
    beta = mode.effective_beta
    require_stable(rates, beta, thinned)
    lam_ue, lam_fn = rates.dc_arrivals(beta, thinned)
    return StepInputs(
        sigma_u=rates.mu_uc - lam_ue,
        sigma_n=rates.mu_nc - lam_fn,
        fap=rates.fap(),
        beta=beta,
        rho_prime=rho_prime,
    )


def _dispatch(inp: StepInputs) -> float:
    if inp.beta == 0.0:
        return step_local(inp)
    if inp.beta == 1.0:
        return step_edge(inp)
    return step_hybrid(inp)


def step(mode: CompressionMode, rates: ServiceRates, rho_prime: float,
         thinned: bool = False) -> float:
    """STEP for any compression mode; hybrid endpoints use the closed forms."""
    return _dispatch(step_inputs(mode, rates, rho_prime, thinned))


@dataclass(frozen=True)
class SdcpOptions:
    cycle_convention: Literal["per_bit", "per_task"] = "per_task"
    formula_mode: Literal["paper_as_written", "standard_ergodic"] = "paper_as_written"
    uplink_numerator: Literal["eq5", "eq16"] = "eq5"
    thinned_arrivals: bool = False


@dataclass(frozen=True)
class SdcpBreakdown:
    stp: float
    step: float
    sdcp: float
    uplink_rate: float
    rho_prime: float
    rates: ServiceRates = field(repr=False)


def evaluate(mode: CompressionMode, network: NetworkParams, task: TaskProfile,
             hw: HardwareProfile, tau, options: SdcpOptions = SdcpOptions()
             ) -> SdcpBreakdown:
    """SDCP together with the intermediate quantities it is built from."""
    stp = stp_approx(tau, network)
    rate = ergodic_uplink_rate(network, options.formula_mode)
    budget = delay_budget(task, hw, rate, options.uplink_numerator)
    rho_prime = budget.residual(task.target_latency, mode.effective_beta)
    rates = derive_service_rates(task, hw, options.cycle_convention)
    st = step(mode, rates, rho_prime, options.thinned_arrivals)
    return SdcpBreakdown(stp, st, stp * st, rate, rho_prime, rates)


def sdcp(mode: CompressionMode, network: NetworkParams, task: TaskProfile,
         hw: HardwareProfile, tau, options: SdcpOptions = SdcpOptions()) -> float:
    """Probability that the uplink SIR clears ``tau`` and the task meets its deadline."""
    return evaluate(mode, network, task, hw, tau, options).sdcp


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_beta(network: NetworkParams, task: TaskProfile, hw: HardwareProfile,
                  tau, options: SdcpOptions = SdcpOptions(), *,
                  grid_points: int = 41, refine_tol: float = 1e-7
                  ) -> tuple[float, float]:
    """Offloading ratio maximizing the hybrid SDCP, and the maximum.

    The STP factor does not depend on the ratio, so the search minimizes the
    STEP failure probability: a coarse grid picks the best bracket and
    golden-section search refines it. Ties go to the larger ratio.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    stp = stp_approx(tau, network)
    rate = ergodic_uplink_rate(network, options.formula_mode)
    budget = delay_budget(task, hw, rate, options.uplink_numerator)
    rates = derive_service_rates(task, hw, options.cycle_convention)

    def failure(beta):
        x = budget.residual(task.target_latency, beta)
        inp = step_inputs(CompressionMode.hybrid(beta), rates, x,
                          options.thinned_arrivals)
        return step_failure(inp)

    grid = [i / (grid_points - 1) for i in range(grid_points)]
    values = [failure(b) for b in grid]
    best = 0
    for i, v in enumerate(values):
        if v <= values[best]:
            best = i
    beta_star, f_star = grid[best], values[best]
    if 0 < best < grid_points - 1:
        lo, hi = grid[best - 1], grid[best + 1]
        c = hi - _INV_PHI * (hi - lo)
        d = lo + _INV_PHI * (hi - lo)
        fc, fd = failure(c), failure(d)
        while hi - lo > refine_tol:
            if fc < fd:
                hi, d, fd = d, c, fc
                c = hi - _INV_PHI * (hi - lo)
                fc = failure(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + _INV_PHI * (hi - lo)
                fd = failure(d)
        mid = 0.5 * (lo + hi)
        f_mid = failure(mid)
        if f_mid < f_star or (f_mid == f_star and mid > beta_star):
            beta_star, f_star = mid, f_mid
    mode = CompressionMode.hybrid(beta_star)
    x = budget.residual(task.target_latency, beta_star)
    return beta_star, stp * step(mode, rates, x, options.thinned_arrivals)
