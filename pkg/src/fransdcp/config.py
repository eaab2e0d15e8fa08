"""Strict JSON experiment configuration.

Omitted fields take the reference-scenario defaults. Unknown keys are a
:class:`ParseError`; values that break a model invariant are a
:class:`ValidationError`. Every sweep point is checked for queue stability
before anything is computed.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError, ParseError, StabilityError, ValidationError
from .geometry import NetworkParams
from .model import (CompressionMode, HardwareProfile, TaskProfile,
                    derive_service_rates, validate_stability)
from .sdcp import SdcpOptions
from .sim import McConfig
from .stp import SirThreshold, ergodic_uplink_rate

__all__ = [
    "OPTIMAL",
    "SWEEP_VARIABLES",
    "Sweep",
    "ExperimentConfig",
    "load_config",
    "validate_config",
    "parse_config",
    "config_to_dict",
    "point_setup",
]

# Mode placeholder: hybrid compression at the SDCP-maximizing ratio.
OPTIMAL = "hybrid(opt)"
SWEEP_VARIABLES = ("rho", "beta", "psi", "c_bh", "tau", "fn_speed")
DEFAULT_MODES = (CompressionMode.local(), CompressionMode.edge(),
                 CompressionMode.hybrid(0.6))


def _default_rho():
    return tuple(1e-3 + 7e-3 * i / 19 for i in range(20))


@dataclass(frozen=True)
class Sweep:
    """One swept variable. ``tau`` values are in dB, the rest in SI units."""

    variable: str = "rho"
    values: tuple = field(default_factory=_default_rho)

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValidationError(
                f"sweep.variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if len(self.values) == 0:
            raise ValidationError("sweep.values must be non-empty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValidationError("sweep.values must be finite")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError("sweep.values must be strictly ascending")
        v0 = self.values[0]
        if self.variable == "beta" and not (v0 >= 0 and self.values[-1] <= 1):
            raise ValidationError("beta sweep values must lie in [0, 1]")
        if self.variable in ("rho", "psi", "c_bh", "fn_speed") and not v0 > 0:
            raise ValidationError(f"{self.variable} sweep values must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkParams = field(
        default_factory=lambda: NetworkParams.from_cluster_param(1e-4))
    task: TaskProfile = field(default_factory=TaskProfile)
    hardware: HardwareProfile = field(default_factory=HardwareProfile)
    modes: tuple = DEFAULT_MODES
    tau: float = 1.0
    sweep: Sweep = field(default_factory=Sweep)
    mc: McConfig = field(default_factory=McConfig)
    options: SdcpOptions = field(default_factory=SdcpOptions)


def point_setup(cfg: ExperimentConfig, value: float):
    """``(network, task, hardware, tau, modes)`` at one sweep value."""
    net, task, hw, tau, modes = cfg.network, cfg.task, cfg.hardware, cfg.tau, cfg.modes
    var = cfg.sweep.variable
    if var == "rho":
        task = dataclasses.replace(task, target_latency=value)
    elif var == "beta":
        modes = (CompressionMode.hybrid(value),)
    elif var == "psi":
        task = dataclasses.replace(task, gen_rate=value)
    elif var == "c_bh":
        hw = dataclasses.replace(hw, backhaul_capacity=value)
    elif var == "tau":
        tau = SirThreshold.from_db(value).tau
    elif var == "fn_speed":
        hw = dataclasses.replace(hw, fn_speed=value)
    return net, task, hw, tau, modes


def validate_config(cfg: ExperimentConfig) -> None:
    """Raise :class:`ValidationError` unless every sweep point can be evaluated."""
    try:
        ergodic_uplink_rate(cfg.network, cfg.options.formula_mode)
    except DomainError as exc:
        raise ValidationError(str(exc)) from None
    thinned = cfg.options.thinned_arrivals or cfg.mc.coupling_mode == "routing_mixture"
    for value in cfg.sweep.values:
        try:
            _, task, hw, _, modes = point_setup(cfg, value)
            rates = derive_service_rates(task, hw, cfg.options.cycle_convention)
        except DomainError as exc:
            raise ValidationError(f"sweep value {value!r}: {exc}") from None
        for mode in modes:
            beta = 0.5 if mode == OPTIMAL else mode.effective_beta
            bad = validate_stability(rates, beta, thinned and mode != OPTIMAL)
            if bad:
                msg = "; ".join(f"{v.name} (margin {v.margin:g})" for v in bad)
                raise ValidationError(
                    f"unstable queues at {cfg.sweep.variable}={value!r}: {msg}")


# --- parsing ----------------------------------------------------------------

_NETWORK_KEYS = {"cluster_param", "fn_density", "pathloss_exponent",
                 "power_control_factor", "max_tx_power", "bandwidth", "fap_density"}
_TASK_KEYS = {f.name for f in dataclasses.fields(TaskProfile)}
_HW_KEYS = {f.name for f in dataclasses.fields(HardwareProfile)}
_MC_KEYS = {"iterations", "tasks", "seed", "warmup_fraction", "window_radius"}
_FLAG_KEYS = {"cycle_convention", "formula_mode", "coupling_mode",
              "uplink_numerator", "thinned_arrivals"}
_TOP_KEYS = {"network", "task", "hardware", "mode", "modes", "tau", "sweep",
             "mc", "flags"}
_ENUMS = {
    "cycle_convention": ("per_bit", "per_task"),
    "formula_mode": ("paper_as_written", "standard_ergodic"),
    "coupling_mode": ("weighted_sum", "routing_mixture"),
    "uplink_numerator": ("eq5", "eq16"),
}


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ParseError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _section(obj, name, allowed):
    if not isinstance(obj, dict):
        raise ParseError(f"{name} must be a JSON object")
    for key in obj:
        if key not in allowed:
            raise ParseError(f"unknown key {name}.{key}" if name else f"unknown key {key}")
    return obj


def _number(value, where, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ValidationError(f"{where} must be an integer, got {value!r}")
    return int(value) if integer else float(value)


def _build(cls, where, **kwargs):
    try:
        return cls(**kwargs)
    except (DomainError, StabilityError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def _network(raw):
    sec = _section(raw, "network", _NETWORK_KEYS)
    if "cluster_param" in sec and "fn_density" in sec:
        raise ValidationError("network: give cluster_param or fn_density, not both")
    kw = {k: _number(v, f"network.{k}") for k, v in sec.items()
          if k not in ("cluster_param", "fn_density")}
    if "fn_density" in sec:
        return _build(NetworkParams, "network",
                      fn_density=_number(sec["fn_density"], "network.fn_density"), **kw)
    c = _number(sec.get("cluster_param", 1e-4), "network.cluster_param")
    if not c > 0:
        raise ValidationError("network.cluster_param must be > 0")
    return _build(NetworkParams, "network", fn_density=c / math.pi, **kw)


def _profile(cls, raw, name, keys, ints=()):
    sec = _section(raw, name, keys)
    kw = {}
    for k, v in sec.items():
        if v is None and k == "fap_cp_speed":
            continue
        kw[k] = _number(v, f"{name}.{k}", integer=k in ints)
    return _build(cls, name, **kw)


def _mode(raw, where):
    if raw == OPTIMAL:
        return OPTIMAL
    sec = _section(raw, where, {"variant", "beta"})
    variant = sec.get("variant")
    if variant not in ("local", "edge", "hybrid"):
        raise ValidationError(f"{where}.variant must be local, edge or hybrid, got {variant!r}")
    beta = sec.get("beta")
    if variant == "hybrid" and beta == "optimal":
        return OPTIMAL
    if beta is not None:
        beta = _number(beta, f"{where}.beta")
    return _build(CompressionMode, where, variant=variant, beta=beta)


def _tau(raw):
    sec = _section(raw, "tau", {"db", "linear"})
    if len(sec) != 1:
        raise ValidationError('tau must be exactly one of {"db": x} or {"linear": x}')
    if "db" in sec:
        return SirThreshold.from_db(_number(sec["db"], "tau.db")).tau
    return _build(SirThreshold, "tau", tau=_number(sec["linear"], "tau.linear")).tau


def _sweep(raw):
    sec = _section(raw, "sweep", {"variable", "values"})
    if "variable" not in sec or "values" not in sec:
        raise ValidationError("sweep needs both variable and values")
    if not isinstance(sec["values"], list):
        raise ValidationError("sweep.values must be a list")
    values = tuple(_number(v, "sweep.values") for v in sec["values"])
    return Sweep(sec["variable"], values)


def _flags(raw):
    sec = _section(raw, "flags", _FLAG_KEYS)
    for k, allowed in _ENUMS.items():
        if k in sec and sec[k] not in allowed:
            raise ValidationError(f"flags.{k} must be one of {allowed}, got {sec[k]!r}")
    if "thinned_arrivals" in sec and not isinstance(sec["thinned_arrivals"], bool):
        raise ValidationError("flags.thinned_arrivals must be true or false")
    coupling = sec.get("coupling_mode", "weighted_sum")
    opts = {k: v for k, v in sec.items() if k != "coupling_mode"}
    return SdcpOptions(**opts), coupling


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    top = _section(raw, "", _TOP_KEYS)
    if "mode" in top and "modes" in top:
        raise ValidationError("give mode or modes, not both")
    kw = {}
    if "network" in top:
        kw["network"] = _network(top["network"])
    if "task" in top:
        kw["task"] = _profile(TaskProfile, top["task"], "task", _TASK_KEYS)
    if "hardware" in top:
        kw["hardware"] = _profile(HardwareProfile, top["hardware"], "hardware", _HW_KEYS,
                                  ints=("ues_per_fn", "fns_per_fap", "faps"))
    if "mode" in top:
        kw["modes"] = (_mode(top["mode"], "mode"),)
    if "modes" in top:
        if not isinstance(top["modes"], list) or not top["modes"]:
            raise ValidationError("modes must be a non-empty list")
        kw["modes"] = tuple(_mode(m, f"modes[{i}]") for i, m in enumerate(top["modes"]))
    if "tau" in top:
        kw["tau"] = _tau(top["tau"])
    if "sweep" in top:
        kw["sweep"] = _sweep(top["sweep"])
    options, coupling = _flags(top.get("flags", {}))
    kw["options"] = options
    mc = _section(top.get("mc", {}), "mc", _MC_KEYS)
    mc_kw = {}
    for k, v in mc.items():
        if k == "window_radius" and v is None:
            continue
        mc_kw[k] = _number(v, f"mc.{k}", integer=k in ("iterations", "tasks", "seed"))
    kw["mc"] = _build(McConfig, "mc", coupling_mode=coupling, **mc_kw)
    cfg = ExperimentConfig(**kw)
    validate_config(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file (UTF-8)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not valid UTF-8") from None
    return parse_config(text)


def _mode_dict(mode):
    if mode == OPTIMAL:
        return {"variant": "hybrid", "beta": "optimal"}
    out = {"variant": mode.variant}
    if mode.beta is not None:
        out["beta"] = mode.beta
    return out


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-ready form of a resolved config; round-trips through parse_config."""
    net = cfg.network
    network = {"fn_density": net.fn_density,
               "pathloss_exponent": net.pathloss_exponent,
               "power_control_factor": net.power_control_factor,
               "max_tx_power": net.max_tx_power, "bandwidth": net.bandwidth}
    if net.fap_density is not None:
        network["fap_density"] = net.fap_density
    mc = {"iterations": cfg.mc.iterations, "tasks": cfg.mc.tasks,
          "seed": cfg.mc.seed, "warmup_fraction": cfg.mc.warmup_fraction}
    if cfg.mc.window_radius is not None:
        mc["window_radius"] = cfg.mc.window_radius
    flags = dataclasses.asdict(cfg.options)
    flags["coupling_mode"] = cfg.mc.coupling_mode
    return {
        "network": network,
        "task": dataclasses.asdict(cfg.task),
        "hardware": dataclasses.asdict(cfg.hardware),
        "modes": [_mode_dict(m) for m in cfg.modes],
        "tau": {"linear": cfg.tau},
        "sweep": {"variable": cfg.sweep.variable, "values": list(cfg.sweep.values)},
        "mc": mc,
        "flags": flags,
    }
