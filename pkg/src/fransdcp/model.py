"""Task, hardware and compression-mode bookkeeping.

Maps physical parameters onto queue rates and the deterministic delay
components (uplink and backhaul) of the end-to-end latency budget.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .errors import DomainError, StabilityError
from .queueing import Mg1Fap, Mm1Stage

__all__ = [
    "TaskProfile",
    "HardwareProfile",
    "CompressionMode",
    "ServiceRates",
    "Violation",
    "DelayBudget",
    "derive_service_rates",
    "validate_stability",
    "backhaul_delay",
    "uplink_delay",
    "residual_threshold",
    "delay_budget",
]

CycleConvention = Literal["per_bit", "per_task"]
UplinkNumerator = Literal["eq5", "eq16"]


@dataclass(frozen=True)
class TaskProfile:
    packet_bits: float = 2048.0
    compression_ratio: float = 0.6
    gen_rate: float = 200.0
    cycles_compress_ue: float = 1e5
    cycles_compress_fn: float = 1e5
    cycles_decompress: float = 1e5
    cycles_compute: float = 1.5e5
    target_latency: float = 4e-3

    def __post_init__(self):
        if not self.packet_bits > 0:
            raise DomainError("packet_bits must be > 0")
        if not 0.0 < self.compression_ratio <= 1.0:
            raise DomainError(
                f"compression ratio must lie in (0, 1], got {self.compression_ratio}")
        if not self.gen_rate > 0:
            raise DomainError("gen_rate must be > 0")
        for name in ("cycles_compress_ue", "cycles_compress_fn",
                     "cycles_decompress", "cycles_compute"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if not self.target_latency > 0:
            raise DomainError("target_latency must be > 0")


@dataclass(frozen=True)
class HardwareProfile:
    """CPU speeds (cycles/s), backhaul capacity (bit/s) and node counts.

    ``fap_cp_speed`` defaults to ``fap_dd_speed`` when left as ``None``.
    """

    ue_speed: float = 1e9
    fn_speed: float = 5e9
    fap_dd_speed: float = 24e9
    fap_cp_speed: float | None = None
    backhaul_capacity: float = 10e6
    ues_per_fn: int = 4
    fns_per_fap: int = 2
    faps: int = 1

    def __post_init__(self):
        if self.fap_cp_speed is None:
            object.__setattr__(self, "fap_cp_speed", self.fap_dd_speed)
        for name in ("ue_speed", "fn_speed", "fap_dd_speed", "fap_cp_speed",
                     "backhaul_capacity"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        for name in ("ues_per_fn", "fns_per_fap", "faps"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise DomainError(f"{name} must be an integer >= 1")


@dataclass(frozen=True)
class CompressionMode:
    variant: Literal["local", "edge", "hybrid"]
    beta: float | None = None

    def __post_init__(self):
        if self.variant not in ("local", "edge", "hybrid"):
            raise DomainError(f"unknown compression mode {self.variant!r}")
        if self.variant == "hybrid":
            if self.beta is None or not 0.0 <= self.beta <= 1.0:
                raise DomainError(f"hybrid beta must lie in [0, 1], got {self.beta}")
        elif self.beta is not None:
            raise DomainError(f"{self.variant} mode takes no beta")

    @classmethod
    def local(cls):
        return cls("local")

    @classmethod
    def edge(cls):
        return cls("edge")

    @classmethod
    def hybrid(cls, beta: float):
        return cls("hybrid", float(beta))

    @property
    def effective_beta(self) -> float:
        if self.variant == "local":
            return 0.0
        if self.variant == "edge":
            return 1.0
        return self.beta

    @property
    def label(self) -> str:
        if self.variant == "hybrid":
            return f"hybrid({self.beta:g})"
        return self.variant


@dataclass(frozen=True)
class ServiceRates:
    """Queue service rates and full (unthinned) arrival rates, in tasks/s."""

    mu_uc: float
    mu_nc: float
    mu_dd: float
    mu_cp: float
    lambda_ue: float
    lambda_fn: float
    lambda_fap: float

    def dc_arrivals(self, beta: float = 0.0, thinned: bool = False):
        """Arrival rates ``(ue, fn)`` at the two compression queues.

        By default both queues see their full rates regardless of ``beta``;
        ``thinned=True`` splits the traffic by the offloading ratio.
        """
        if thinned:
            return (1.0 - beta) * self.lambda_ue, beta * self.lambda_fn
        return self.lambda_ue, self.lambda_fn

    def ue_stage(self, beta: float = 0.0, thinned: bool = False) -> Mm1Stage:
        return Mm1Stage(self.dc_arrivals(beta, thinned)[0], self.mu_uc)

    def fn_stage(self, beta: float = 1.0, thinned: bool = False) -> Mm1Stage:
        return Mm1Stage(self.dc_arrivals(beta, thinned)[1], self.mu_nc)

    def fap(self) -> Mg1Fap:
        return Mg1Fap(self.lambda_fap, self.mu_dd, self.mu_cp)


@dataclass(frozen=True)
class Violation:
    """A failed stability inequality ``lhs > rhs``; ``margin = lhs - rhs``."""

    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def derive_service_rates(task: TaskProfile, hw: HardwareProfile,
                         cycle_convention: CycleConvention = "per_task"
                         ) -> ServiceRates:
    """Service rates as reciprocals of per-task processing times.

    ``per_bit`` charges the cycle counts per bit of (compressed, for
    decompression) payload; ``per_task`` charges them once per task.
    """
    if cycle_convention == "per_bit":
        size, comp_size = task.packet_bits, task.compression_ratio * task.packet_bits
    elif cycle_convention == "per_task":
        size = comp_size = 1.0
    else:
        raise DomainError(f"unknown cycle convention {cycle_convention!r}")
    psi = task.gen_rate
    return ServiceRates(
        mu_uc=hw.ue_speed / (size * task.cycles_compress_ue),
        mu_nc=hw.fn_speed / (size * task.cycles_compress_fn),
        mu_dd=hw.fap_dd_speed / (comp_size * task.cycles_decompress),
        mu_cp=hw.fap_cp_speed / (size * task.cycles_compute),
        lambda_ue=psi,
        lambda_fn=hw.ues_per_fn * psi,
        lambda_fap=hw.fns_per_fap * hw.ues_per_fn * psi,
    )


def validate_stability(rates: ServiceRates, beta: float = 0.0,
                       thinned: bool = False) -> list[Violation]:
    """Every violated stability inequality; an empty list means stable.

    ``beta`` only matters with ``thinned=True``; a queue that receives no
    traffic is trivially stable.
    """
    lam_ue, lam_fn = rates.dc_arrivals(beta, thinned)
    out = []
    if lam_ue > 0 and not rates.mu_uc > lam_ue:
        out.append(Violation("mu_uc > lambda_ue", rates.mu_uc, lam_ue))
    if lam_fn > 0 and not rates.mu_nc > lam_fn:
        out.append(Violation("mu_nc > lambda_fn", rates.mu_nc, lam_fn))
    rho = rates.lambda_fap * (1.0 / rates.mu_dd + 1.0 / rates.mu_cp)
    if not rho < 1.0:
        out.append(Violation("1 > rho_fap", 1.0, rho))
    return out


def require_stable(rates: ServiceRates, beta: float = 0.0,
                   thinned: bool = False) -> None:
    bad = validate_stability(rates, beta, thinned)
    if bad:
        raise StabilityError("; ".join(
            f"{v.name} violated (margin {v.margin:g})" for v in bad))


def backhaul_delay(task: TaskProfile, hw: HardwareProfile) -> float:
    """Time to ship one FN's compressed batch over the backhaul."""
    return hw.ues_per_fn * task.compression_ratio * task.packet_bits / hw.backhaul_capacity


def uplink_delay(mode: CompressionMode, task: TaskProfile, rate: float,
                 numerator: UplinkNumerator = "eq5") -> float:
    """Average uplink transmission delay at ``rate`` bit/s.

    Tasks compressed at the FN travel uncompressed, so ``beta`` weights the
    full packet size. ``numerator="eq16"`` swaps the weights instead.
    """
    if not rate > 0:
        raise DomainError(f"uplink rate must be > 0, got {rate}")
    kappa, gamma = task.packet_bits, task.compression_ratio
    if mode.variant == "local":
        return gamma * kappa / rate
    if mode.variant == "edge":
        return kappa / rate
    beta = mode.beta
    if numerator == "eq16":
        return (beta * gamma * kappa + (1.0 - beta) * kappa) / rate
    if numerator != "eq5":
        raise DomainError(f"unknown uplink numerator {numerator!r}")
    return beta * (kappa / rate) + (1.0 - beta) * (gamma * kappa / rate)


def residual_threshold(mode: CompressionMode, task: TaskProfile,
                       hw: HardwareProfile, rate: float,
                       numerator: UplinkNumerator = "eq5") -> float:
    """Latency left for compression, decompression and computing (may be <= 0)."""
    return (task.target_latency - uplink_delay(mode, task, rate, numerator)
            - backhaul_delay(task, hw))


@dataclass(frozen=True)
class DelayBudget:
    """Deterministic delay components for one configuration.

    ``uplink_local`` and ``uplink_edge`` are the per-route uplink delays; the
    mode-averaged value is :meth:`uplink`.
    """

    uplink_local: float
    uplink_edge: float
    backhaul: float
    numerator: UplinkNumerator = "eq5"

    def uplink(self, beta: float) -> float:
        if self.numerator == "eq16":
            return beta * self.uplink_local + (1.0 - beta) * self.uplink_edge
        return beta * self.uplink_edge + (1.0 - beta) * self.uplink_local

    def floor(self, beta: float) -> float:
        return self.uplink(beta) + self.backhaul

    def residual(self, target_latency: float, beta: float) -> float:
        return target_latency - self.uplink(beta) - self.backhaul


def delay_budget(task: TaskProfile, hw: HardwareProfile, rate: float,
                 numerator: UplinkNumerator = "eq5") -> DelayBudget:
    return DelayBudget(
        uplink_local=uplink_delay(CompressionMode.local(), task, rate),
        uplink_edge=uplink_delay(CompressionMode.edge(), task, rate),
        backhaul=backhaul_delay(task, hw),
        numerator=numerator,
    )
