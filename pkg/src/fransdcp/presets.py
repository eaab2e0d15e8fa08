"""Figure presets: panels of configs derived from a base config.

Each preset lists ``(tag, config)`` panels, the operation that produces its
curves, and axis labels. The base config supplies everything a preset does
not pin down.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .config import OPTIMAL, ExperimentConfig, Sweep
from .errors import ValidationError
from .model import CompressionMode
from .stp import SirThreshold

__all__ = ["FIGURES", "Preset", "figure_preset"]

FIGURES = ("3", "4", "5", "6", "7", "8a", "8b")

_THREE_MODES = (CompressionMode.local(), CompressionMode.edge(),
                CompressionMode.hybrid(0.6))
_RHO = tuple(1e-3 + 7e-3 * i / 19 for i in range(20))
_PSI = tuple(float(p) for p in range(200, 401, 25))
_BETA = tuple(i / 40 for i in range(41))
_SPEED_RATIO = tuple(float(r) for r in range(1, 11))
_FN_SPEEDS = (2.5e9, 5e9)
_BACKHAULS = (10e6, 20e6)


@dataclass(frozen=True)
class Preset:
    name: str
    operation: str
    panels: tuple
    xlabel: str
    ylabel: str
    x_scale: float = 1.0


def _hw(cfg, **kw):
    return replace(cfg, hardware=replace(cfg.hardware, **kw))


def _task(cfg, **kw):
    return replace(cfg, task=replace(cfg.task, **kw))


def _latency_vs_tau(base):
    cfg = replace(base, modes=_THREE_MODES, sweep=Sweep("rho", _RHO))
    panels = tuple((f"tau={db:g}dB", replace(cfg, tau=SirThreshold.from_db(db).tau))
                   for db in (0.0, 3.0))
    return Preset("3", "validate", panels, "target latency (ms)", "SDCP", 1e3)


def _latency_vs_fn_speed(base):
    cfg = replace(base, modes=_THREE_MODES, sweep=Sweep("rho", _RHO))
    panels = tuple((f"s_nc={s / 1e9:g}GHz", _hw(cfg, fn_speed=s)) for s in _FN_SPEEDS)
    return Preset("4", "validate", panels, "target latency (ms)", "SDCP", 1e3)


def _speed_ratio(base):
    ue = base.hardware.ue_speed
    cfg = replace(base, modes=tuple(CompressionMode.hybrid(b) for b in (0.4, 0.6, 0.8)),
                  sweep=Sweep("fn_speed", tuple(r * ue for r in _SPEED_RATIO)))
    panels = tuple((f"rho={ms:g}ms", _task(cfg, target_latency=ms * 1e-3))
                   for ms in (4.0, 5.0))
    return Preset("5", "sdcp", panels, "FN / UE computing speed ratio", "SDCP", 1.0 / ue)


def _grid_panels(cfg):
    return tuple((f"C_bh={c / 1e6:g}Mbps;s_nc={s / 1e9:g}GHz",
                  _hw(cfg, backhaul_capacity=c, fn_speed=s))
                 for c in _BACKHAULS for s in _FN_SPEEDS)


def _beta_sweep(base):
    cfg = replace(base, modes=(CompressionMode.hybrid(0.5),), sweep=Sweep("beta", _BETA))
    return Preset("6", "sdcp", _grid_panels(cfg), "offloading ratio beta", "SDCP")


def _optimal_beta(base):
    cfg = replace(base, modes=(OPTIMAL,), sweep=Sweep("psi", _PSI))
    return Preset("7", "optimize", _grid_panels(cfg), "task generation rate (1/s)",
                  "optimal offloading ratio")


def _gen_rate(backhaul):
    def build(base):
        cfg = replace(base, modes=(CompressionMode.local(), CompressionMode.edge(), OPTIMAL),
                      sweep=Sweep("psi", _PSI))
        cfg = _hw(cfg, backhaul_capacity=backhaul)
        panels = tuple((f"s_nc={s / 1e9:g}GHz", _hw(cfg, fn_speed=s)) for s in _FN_SPEEDS)
        name = "8a" if backhaul == 10e6 else "8b"
        return Preset(name, "sdcp", panels, "task generation rate (1/s)", "SDCP")
    return build


_BUILDERS = {
    "3": _latency_vs_tau,
    "4": _latency_vs_fn_speed,
    "5": _speed_ratio,
    "6": _beta_sweep,
    "7": _optimal_beta,
    "8a": _gen_rate(10e6),
    "8b": _gen_rate(20e6),
}


def figure_preset(name: str, base: ExperimentConfig | None = None) -> Preset:
    if name not in _BUILDERS:
        raise ValidationError(f"unknown figure {name!r}; choose from {FIGURES}")
    return _BUILDERS[name](base or ExperimentConfig())
