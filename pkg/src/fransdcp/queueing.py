"""Sojourn-time distributions of the compression and FAP queues.

Compression stages are M/M/1; the FAP runs decompression followed by
computing as one server with hypo-exponential service, i.e. an M/G/1 queue.
All functions accept scalars or numpy arrays for the time argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StabilityError

__all__ = [
    "Mm1Stage",
    "Mg1Fap",
    "mm1_sojourn_cdf",
    "hypoexp_pdf",
    "mg1_sojourn_pdf",
    "mg1_sojourn_cdf",
    "mg1_sojourn_laplace",
    "mg1_mean_sojourn",
]


@dataclass(frozen=True)
class Mm1Stage:
    arrival_rate: float
    service_rate: float

    def __post_init__(self):
        if not self.arrival_rate > 0:
            raise DomainError(
                f"arrival rate must be > 0, got {self.arrival_rate}")
        if not self.service_rate > self.arrival_rate:
            raise StabilityError(
                f"M/M/1 unstable: service rate {self.service_rate:g} <= "
                f"arrival rate {self.arrival_rate:g}")

    @property
    def sojourn_param(self) -> float:
        """Rate of the exponential sojourn time, ``mu - lambda``."""
        return self.service_rate - self.arrival_rate


@dataclass(frozen=True)
class Mg1Fap:
    """FAP queue: Poisson arrivals, service = Exp(mu_dd) + Exp(mu_cp)."""

    arrival_rate: float
    mu_dd: float
    mu_cp: float

    def __post_init__(self):
        if not (self.mu_dd > 0 and self.mu_cp > 0):
            raise DomainError("service rates must be > 0")
        if not self.arrival_rate > 0:
            raise StabilityError(
                "FAP arrival rate must be > 0 (use hypoexp_pdf for an empty queue)")
        if not self.rho < 1.0:
            raise StabilityError(f"M/G/1 unstable: utilization {self.rho:g} >= 1")

    @property
    def mu_hat(self) -> float:
        return self.mu_dd + self.mu_cp

    @property
    def rho(self) -> float:
        return self.arrival_rate * (1.0 / self.mu_dd + 1.0 / self.mu_cp)

    @property
    def eta(self) -> float:
        lam = self.arrival_rate
        return math.sqrt((lam + self.mu_hat) ** 2 - 4.0 * self.mu_dd * self.mu_cp)

    @property
    def varsigma(self) -> float:
        return self.arrival_rate - self.mu_hat - self.eta

    @property
    def varsigma_prime(self) -> float:
        # product of the roots avoids cancellation in the small one
        return 4.0 * self._slack / self.varsigma

    @property
    def _slack(self) -> float:
        """``mu_dd mu_cp (1 - rho)`` without forming ``1 - rho``."""
        return self.mu_dd * self.mu_cp - self.arrival_rate * self.mu_hat

    @property
    def prefactor(self) -> float:
        """``mu_dd mu_cp (1 - rho) / eta``."""
        return self._slack / self.eta


def _check_time(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise DomainError("time must be >= 0")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def mm1_sojourn_cdf(stage: Mm1Stage, t):
    arr = _check_time(t)
    return _out(-np.expm1(-stage.sojourn_param * arr))


_ERLANG_TOL = 1e-9


def hypoexp_pdf(mu_dd: float, mu_cp: float, x):
    """Density of ``Exp(mu_dd) + Exp(mu_cp)``; Erlang-2 when the rates coincide."""
    if not (mu_dd > 0 and mu_cp > 0):
        raise DomainError("rates must be > 0")
    arr = _check_time(x)
    if abs(mu_dd - mu_cp) <= _ERLANG_TOL * max(mu_dd, mu_cp):
        mu = 0.5 * (mu_dd + mu_cp)
        return _out(mu * mu * arr * np.exp(-mu * arr))
    # e^{-a x} - e^{-b x} = e^{-a x} * (-expm1(-(b - a) x))
    lo, hi = sorted((mu_dd, mu_cp))
    val = (mu_dd * mu_cp / (hi - lo)) * np.exp(-lo * arr) * -np.expm1(-(hi - lo) * arr)
    return _out(val)


def mg1_sojourn_pdf(fap: Mg1Fap, t):
    """Sojourn density ``K (e^{varsigma' t/2} - e^{varsigma t/2})``."""
    arr = _check_time(t)
    sp, s = fap.varsigma_prime, fap.varsigma
    val = fap.prefactor * np.exp(0.5 * sp * arr) * -np.expm1(0.5 * (s - sp) * arr)
    return _out(val)


def mg1_sojourn_cdf(fap: Mg1Fap, t):
    arr = _check_time(t)
    sp, s = fap.varsigma_prime, fap.varsigma
    val = fap.prefactor * (2.0 / sp * np.expm1(0.5 * sp * arr)
                           - 2.0 / s * np.expm1(0.5 * s * arr))
    return _out(np.clip(val, 0.0, 1.0))


def mg1_sojourn_laplace(fap: Mg1Fap, s):
    """Pollaczek-Khinchin transform of the FAP sojourn time.

    The factor ``s`` is cancelled analytically, so ``s = 0`` gives 1.
    """
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise DomainError("s must be >= 0")
    lam, md, mc = fap.arrival_rate, fap.mu_dd, fap.mu_cp
    num = md * mc - lam * (md + mc)
    den = arr * arr + (md + mc - lam) * arr + num
    return _out(num / den)


def mg1_mean_sojourn(fap: Mg1Fap) -> float:
    """Pollaczek-Khinchin mean ``E[S] + lambda E[S^2] / (2 (1 - rho))``."""
    md, mc = fap.mu_dd, fap.mu_cp
    es = 1.0 / md + 1.0 / mc
    es2 = 2.0 * (1.0 / md ** 2 + 1.0 / (md * mc) + 1.0 / mc ** 2)
    return es + fap.arrival_rate * es2 / (2.0 * (1.0 - fap.rho))
