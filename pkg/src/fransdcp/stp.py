"""Successful transmission probability (STP) and the average uplink rate."""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from . import kernels
from .errors import DomainError, NumericalInconsistency
from .geometry import NetworkParams
from .numerics import QuadratureSpec, gen_exp_integral, integrate_1d

__all__ = [
    "SirThreshold",
    "h_kernel",
    "stp_exact",
    "zeta",
    "stp_approx",
    "ergodic_uplink_rate",
    "FormulaMode",
]

FormulaMode = Literal["paper_as_written", "standard_ergodic"]


@dataclass(frozen=True)
class SirThreshold:
    """Linear SIR threshold ``tau``."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError(f"SIR threshold must be > 0, got {self.tau}")

    @classmethod
    def from_db(cls, db: float) -> SirThreshold:
        return cls(10.0 ** (db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.tau)

    def __float__(self):
        return self.tau


def _tau(tau) -> float:
    t = float(tau)
    if not t > 0:
        raise DomainError(f"SIR threshold must be > 0, got {t}")
    return t


# --- H kernel -------------------------------------------------------------

def _gl_panels(edges, n):
    xg, wg = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * xg)
        weights.append(0.5 * (b - a) * wg)
    return np.concatenate(nodes), np.concatenate(weights)


@functools.lru_cache(maxsize=None)
def _angle_grid(n=16):
    # Integrand is even in the angle; fold [0, 2pi) onto [0, pi] and grade
    # panels toward 0 where the interferer can sit on top of the target FN.
    y, w = _gl_panels([0.0, math.pi / 64, math.pi / 16, math.pi / 4,
                       math.pi / 2, math.pi], n)
    return y, w / math.pi


@functools.lru_cache(maxsize=None)
def _offset_grid(n=16, extra=()):
    # u^eps singularity at 0 needs geometric grading.
    edges = sorted({0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1,
                    0.2, 0.4, 0.7, 1.0, *extra})
    return _gl_panels(edges, n)


def _h_normalized(xn, v, tau, params, u_grid=None):
    un, uw = u_grid if u_grid is not None else _offset_grid()
    yn, yw = _angle_grid()
    return kernels.h_kernel_grid(xn, v, tau, params.pathloss_exponent,
                                 params.power_control_factor, un, uw, yn, yw)


def h_kernel(v: float, x: float, tau, params: NetworkParams) -> float:
    """Mean per-interferer Laplace factor ``H(v, x)``.

    ``v`` is the tagged UE's squared distance normalized by the cluster
    area ``1/c``; ``x`` is the squared distance (m^2) from the target FN to
    the interferer's FN. The interferer sits at normalized squared distance
    ``c*x + u - 2*sqrt(c*x*u)*cos(y)`` with ``u ~ U(0, 1)`` and
    ``y ~ U(0, 2 pi)``.
    """
    if not 0.0 < v <= 1.0:
        raise DomainError(f"v must lie in (0, 1], got {v}")
    if not x >= 0.0:
        raise DomainError(f"x must be >= 0, got {x}")
    tau = _tau(tau)
    xn = params.cluster_param * x
    extra = (xn,) if 0.0 < xn < 1.0 else ()
    grid = _offset_grid(24, extra)
    return float(_h_normalized(np.array([xn]), v, tau, params, grid)[0])


_EXACT_SPEC = QuadratureSpec(abs_tol=1e-7, rel_tol=1e-6)
# Beyond this normalized distance the asymptotic tail is used.
_X_TRUNC = 1e6


def _interference_integral(v, tau, params, spec):
    """int_0^inf (1 - H(v, x)) d(c x), truncated with an analytic tail."""
    a, eps = params.pathloss_exponent, params.power_control_factor

    def integrand(xn):
        return 1.0 - _h_normalized(xn, v, tau, params)

    edges = [0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 1e2, 1e3,
             1e4, 1e5, _X_TRUNC]
    body = integrate_1d(integrand, 0.0, _X_TRUNC, spec, vectorized=True,
                        breakpoints=edges[1:-1])
    # 1 - H ~ tau (u^eps v^(1-eps))^(a/2) x^(-a/2), averaged over u.
    half = 0.5 * a
    tail = (tau * v ** ((1.0 - eps) * half) / (1.0 + eps * half)
            * _X_TRUNC ** (1.0 - half) / (half - 1.0))
    return body + tail


def stp_exact(tau, params: NetworkParams,
              spec: QuadratureSpec | None = None) -> float:
    """STP by nested quadrature over the exact interferer geometry."""
    tau = _tau(tau)
    spec = spec or _EXACT_SPEC
    density_ratio = math.pi * params.fn_density / params.cluster_param

    def outer(v):
        return math.exp(-density_ratio
                        * _interference_integral(v, tau, params, spec))

    val = integrate_1d(outer, 0.0, 1.0, spec)
    return min(max(val, 0.0), 1.0)


# --- closed-form approximation --------------------------------------------

def zeta(tau, params: NetworkParams) -> float:
    """Interference exponent of the approximate STP (free of ``v``).

    Uses ``lambda_N / c = 1/pi``, which holds exactly because the cluster
    parameter is derived from the FN density.
    """
    a = params.pathloss_exponent
    if not a > 2:
        raise DomainError(f"pathloss exponent must exceed 2, got {a}")
    tau = float(tau)
    if tau < 0:
        raise DomainError("tau must be >= 0")
    eps = params.power_control_factor
    return (2.0 * math.pi * tau ** (2.0 / a)
            / (a * (1.0 + eps) * math.sin(2.0 * math.pi / a)))


_SERIES_MAX_ZETA = 5.0


def _mean_exp_power(z, q):
    """``int_0^1 exp(-z v^q) dv`` for ``z >= 0``, ``0 < q <= 1``."""
    if z == 0.0:
        return 1.0
    if z <= _SERIES_MAX_ZETA:
        # sum_k (-z)^k / (k! (1 + k q)); terms peak near e^z.
        acc, term, k = 0.0, 1.0, 0
        while True:
            contrib = term / (1.0 + k * q)
            acc += contrib
            if abs(contrib) < 1e-17 * max(abs(acc), 1e-300) and k > z:
                return acc
            k += 1
            term *= -z / k
    inv_q = 1.0 / q
    log_lead = math.lgamma(1.0 + inv_q) - inv_q * math.log(z)
    if log_lead < math.log(1e3):
        lead = math.exp(log_lead)
        return lead - gen_exp_integral(1.0 - inv_q, z) * inv_q
    # closed form loses too many digits to cancellation; integrate directly
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-12)
    return integrate_1d(lambda v: np.exp(-z * v ** q), 0.0, 1.0, spec,
                        vectorized=True, breakpoints=(1e-12, 1e-8, 1e-4, 1e-2))


def stp_approx(tau, params: NetworkParams) -> float:
    """Closed-form STP with interferers placed at their FN locations.

    For ``eps < 1`` this is ``int_0^1 exp(-zeta v^(1-eps)) dv``
    ``= zeta^(1/(eps-1)) Gamma(1 + 1/(1-eps)) - E_{eps/(eps-1)}(zeta)/(1-eps)``;
    for ``eps = 1`` it is ``exp(-zeta)``.
    """
    eps = params.power_control_factor
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"power control factor must lie in [0, 1], got {eps}")
    if eps < 0.05:
        warnings.warn(f"stp_approx at eps={eps} < 0.05 has not been validated",
                      stacklevel=2)
    z = zeta(tau, params)
    if eps == 1.0:
        val = math.exp(-z)
    else:
        val = _mean_exp_power(z, 1.0 - eps)
    if not -1e-9 <= val <= 1.0 + 1e-9:
        raise NumericalInconsistency(
            f"approximate STP {val!r} left [0, 1] at tau={float(tau)!r}")
    return min(max(val, 0.0), 1.0)


# --- uplink rate ----------------------------------------------------------

_RATE_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10, max_subdivisions=4000)


@functools.lru_cache(maxsize=256)
def _spectral_efficiency(alpha, eps, formula_mode):
    params = NetworkParams(1.0, pathloss_exponent=alpha,
                           power_control_factor=eps)
    return _integrate_ccdf(lambda t: stp_approx(t, params), formula_mode)


def _integrate_ccdf(ccdf, formula_mode):
    if formula_mode == "paper_as_written":
        def f(t):
            return math.log2(1.0 + t) * ccdf(t)
        return integrate_1d(f, 0.0, math.inf, _RATE_SPEC)
    if formula_mode == "standard_ergodic":
        def f(t):
            return ccdf(t) / (1.0 + t)
        return integrate_1d(f, 0.0, math.inf, _RATE_SPEC) / math.log(2.0)
    raise DomainError(f"unknown formula mode {formula_mode!r}")


def ergodic_uplink_rate(params: NetworkParams,
                        formula_mode: FormulaMode = "paper_as_written",
                        ccdf: Callable[[float], float] | None = None) -> float:
    """Average uplink rate in bit/s.

    ``paper_as_written`` integrates ``log2(1+t)`` against the STP curve;
    ``standard_ergodic`` is ``E[log2(1 + SIR)]``. ``ccdf`` replaces the
    approximate STP curve (for testing with synthetic distributions).
    """
    if ccdf is not None:
        return params.bandwidth * _integrate_ccdf(ccdf, formula_mode)
    eps, a = params.power_control_factor, params.pathloss_exponent
    if formula_mode == "paper_as_written" and eps < 1.0 and (
            2.0 / (a * (1.0 - eps)) <= 1.0):
        # STP decays like tau^(-2/(a(1-eps))); log2(1+tau) times that diverges
        raise DomainError(
            f"paper_as_written rate diverges for eps={eps} <= 1 - 2/alpha")
    return params.bandwidth * _spectral_efficiency(a, eps, formula_mode)
