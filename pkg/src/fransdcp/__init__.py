"""Success probability of data compression in clustered fog radio access networks.

The joint metric multiplies the probability that the uplink SIR clears a
threshold (stochastic geometry) by the probability that compression,
backhaul and edge computing finish before a deadline (queueing).
"""
__version__ = "0.1.0"

from .errors import (DomainError, FranError, NonConvergence, NumericalInconsistency,
                     ParseError, StabilityError, ValidationError)
from .geometry import NetworkParams
from .model import CompressionMode, HardwareProfile, TaskProfile, derive_service_rates
from .sdcp import SdcpOptions, evaluate, optimize_beta, sdcp, step
from .sim import McConfig, mc_sdcp, mc_step, mc_stp
from .stp import SirThreshold, ergodic_uplink_rate, stp_approx, stp_exact

__all__ = [
    "__version__",
    "FranError",
    "DomainError",
    "NonConvergence",
    "NumericalInconsistency",
    "ParseError",
    "StabilityError",
    "ValidationError",
    "NetworkParams",
    "CompressionMode",
    "HardwareProfile",
    "TaskProfile",
    "derive_service_rates",
    "SdcpOptions",
    "evaluate",
    "optimize_beta",
    "sdcp",
    "step",
    "McConfig",
    "mc_sdcp",
    "mc_step",
    "mc_stp",
    "SirThreshold",
    "ergodic_uplink_rate",
    "stp_approx",
    "stp_exact",
]
