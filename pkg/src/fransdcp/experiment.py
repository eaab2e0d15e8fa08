"""Turn an experiment config into result rows.

Each operation walks the sweep and emits one :class:`Row` per
(sweep value, mode, component). Monte Carlo columns are ``None`` unless
the operation simulates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import OPTIMAL, ExperimentConfig, point_setup
from .errors import DomainError
from .model import CompressionMode, delay_budget, derive_service_rates
from .sdcp import optimize_beta, step
from .sim import McConfig, mc_step, mc_stp
from .stp import ergodic_uplink_rate, stp_approx

__all__ = ["Row", "OPERATIONS", "run_operation", "rows_agree", "with_seed"]

OPERATIONS = ("stp", "step", "sdcp", "optimize", "validate")


@dataclass(frozen=True)
class Row:
    sweep_var: str
    value: float
    mode: str
    analytic: float
    mc_point: float | None = None
    mc_ci99: float | None = None
    component: str = "sdcp"

    def agrees(self) -> bool:
        if self.mc_point is None:
            return True
        return abs(self.analytic - self.mc_point) <= self.mc_ci99


def _label(mode, cfg):
    if cfg.sweep.variable == "beta":
        return "hybrid"
    return OPTIMAL if mode == OPTIMAL else mode.label


class _Point:
    """Analytic quantities at one sweep value."""

    def __init__(self, cfg, value):
        self.net, self.task, self.hw, self.tau, self.modes = point_setup(cfg, value)
        opts = cfg.options
        self.opts = opts
        self.rate = ergodic_uplink_rate(self.net, opts.formula_mode)
        self.budget = delay_budget(self.task, self.hw, self.rate, opts.uplink_numerator)
        self.rates = derive_service_rates(self.task, self.hw, opts.cycle_convention)
        self.stp = stp_approx(self.tau, self.net)
        self._opt = None

    def optimum(self):
        if self._opt is None:
            self._opt = optimize_beta(self.net, self.task, self.hw, self.tau, self.opts)
        return self._opt

    def resolve(self, mode) -> CompressionMode:
        return CompressionMode.hybrid(self.optimum()[0]) if mode == OPTIMAL else mode

    def step(self, mode) -> float:
        mode = self.resolve(mode)
        x = self.budget.residual(self.task.target_latency, mode.effective_beta)
        return step(mode, self.rates, x, self.opts.thinned_arrivals)


def _analytic(cfg, component):
    var = cfg.sweep.variable
    for value in cfg.sweep.values:
        pt = _Point(cfg, value)
        for mode in pt.modes:
            if component == "stp":
                val = pt.stp
            elif component == "step":
                val = pt.step(mode)
            else:
                val = pt.stp * pt.step(mode)
            yield Row(var, value, _label(mode, cfg), val, component=component)


def _optimize(cfg):
    var = cfg.sweep.variable
    if var == "beta":
        # the ratio is searched continuously, so report one argmax
        pt = _Point(cfg, cfg.sweep.values[0])
        beta, best = pt.optimum()
        yield Row(var, beta, OPTIMAL, beta, component="beta_star")
        yield Row(var, beta, OPTIMAL, best, component="sdcp")
        return
    for value in cfg.sweep.values:
        beta, best = _Point(cfg, value).optimum()
        yield Row(var, value, OPTIMAL, beta, component="beta_star")
        yield Row(var, value, OPTIMAL, best, component="sdcp")


def _product(a, ha, b, hb):
    return min(max(a * b, 0.0), 1.0), math.hypot(b * ha, a * hb)


def _validate(cfg):
    var, mc = cfg.sweep.variable, cfg.mc
    stp_cache = {}

    def stp_est(pt):
        key = (pt.net, pt.tau)
        if key not in stp_cache:
            stp_cache[key] = mc_stp(pt.net, pt.tau, mc)
        return stp_cache[key]

    points = [_Point(cfg, v) for v in cfg.sweep.values]
    # the target latency only moves the threshold, so one simulation per
    # fixed mode serves the whole latency sweep
    step_est = {}
    if var == "rho":
        pt0 = points[0]
        for mode in pt0.modes:
            if mode == OPTIMAL:
                continue
            est = mc_step(pt0.resolve(mode), pt0.rates, pt0.budget, cfg.sweep.values,
                          mc, cfg.options.thinned_arrivals)
            for v, e in zip(cfg.sweep.values, est):
                step_est[(v, mode)] = e
    for value, pt in zip(cfg.sweep.values, points):
        s = stp_est(pt)
        for mode in pt.modes:
            label = _label(mode, cfg)
            e = step_est.get((value, mode))
            if e is None:
                e = mc_step(pt.resolve(mode), pt.rates, pt.budget,
                            [pt.task.target_latency], mc,
                            cfg.options.thinned_arrivals)[0]
            a_step = pt.step(mode)
            point, half = _product(s.point, s.half_width_99, e.point, e.half_width_99)
            yield Row(var, value, label, pt.stp, s.point, s.half_width_99, "stp")
            yield Row(var, value, label, a_step, e.point, e.half_width_99, "step")
            yield Row(var, value, label, pt.stp * a_step, point, half, "sdcp")


def run_operation(cfg: ExperimentConfig, operation: str) -> list[Row]:
    if operation in ("stp", "step", "sdcp"):
        return list(_analytic(cfg, operation))
    if operation == "optimize":
        return list(_optimize(cfg))
    if operation == "validate":
        return list(_validate(cfg))
    raise DomainError(f"unknown operation {operation!r}")


def rows_agree(rows) -> bool:
    return all(r.agrees() for r in rows)


def with_seed(mc: McConfig, seed: int | None, threads: int | None) -> McConfig:
    kw = {}
    if seed is not None:
        kw["seed"] = seed
    if threads is not None:
        kw["threads"] = threads
    return replace(mc, **kw) if kw else mc
