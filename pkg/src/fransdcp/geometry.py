"""Spatial model: PPP fog nodes with Matern-cluster UEs.

Every sampler takes an explicit :class:`numpy.random.Generator`; nothing here
touches global random state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "NetworkParams",
    "InterferenceScene",
    "SceneBatch",
    "default_window_radius",
    "sample_ppp",
    "sample_scene",
    "sample_scenes",
    "sample_mcp",
]


@dataclass(frozen=True)
class NetworkParams:
    """Spatial and radio parameters.

    The cluster parameter is tied to the FN density through ``c = pi * lambda_N``
    and is therefore derived rather than stored. ``fap_density`` is carried
    for completeness; no formula depends on it.
    """

    fn_density: float
    pathloss_exponent: float = 4.0
    power_control_factor: float = 0.8
    max_tx_power: float = 1.0
    bandwidth: float = 5e6
    fap_density: float | None = None
    fading_rate: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not self.fn_density > 0:
            raise DomainError(f"fn_density must be > 0, got {self.fn_density}")
        if not self.pathloss_exponent > 2:
            raise DomainError(
                f"pathloss exponent must exceed 2, got {self.pathloss_exponent}")
        if not 0.0 <= self.power_control_factor <= 1.0:
            raise DomainError(
                "power control factor must lie in [0, 1], got "
                f"{self.power_control_factor}")
        if not self.max_tx_power > 0:
            raise DomainError("max_tx_power must be > 0")
        if not self.bandwidth > 0:
            raise DomainError("bandwidth must be > 0")
        if self.fap_density is not None and not self.fap_density > 0:
            raise DomainError("fap_density must be > 0 when given")

    @classmethod
    def from_cluster_param(cls, cluster_param: float, **kwargs) -> NetworkParams:
        if not cluster_param > 0:
            raise DomainError(f"cluster_param must be > 0, got {cluster_param}")
        return cls(fn_density=cluster_param / math.pi, **kwargs)

    @property
    def cluster_param(self) -> float:
        return math.pi * self.fn_density

    @property
    def cluster_radius(self) -> float:
        return 1.0 / math.sqrt(self.cluster_param)


@dataclass(frozen=True)
class InterferenceScene:
    """One snapshot seen from a target FN placed at the origin.

    Interferer attributes are parallel arrays, one entry per foreign FN.
    """

    tagged_ue_distance_sq: float
    tagged_fade: float
    fn_distance_sq: np.ndarray
    own_fn_distance_sq: np.ndarray
    angle: np.ndarray
    fade: np.ndarray

    @property
    def n_interferers(self) -> int:
        return int(self.fn_distance_sq.shape[0])

    def interferer_distance_sq(self) -> np.ndarray:
        x, r = self.fn_distance_sq, self.own_fn_distance_sq
        return x + r - 2.0 * np.sqrt(x * r) * np.cos(self.angle)

    def sir(self, params: NetworkParams) -> float:
        """Uplink SIR under fractional channel inversion power control."""
        a, eps, p = (params.pathloss_exponent, params.power_control_factor,
                     params.max_tx_power)
        signal = p * self.tagged_fade * self.tagged_ue_distance_sq ** (
            -0.5 * a * (1.0 - eps))
        interference = float(np.sum(
            p * self.fade * self.own_fn_distance_sq ** (0.5 * a * eps)
            * self.interferer_distance_sq() ** (-0.5 * a)))
        if interference == 0.0:
            return math.inf
        return signal / interference


@dataclass(frozen=True)
class SceneBatch:
    """Many scenes with interferer records concatenated; ``counts`` splits them."""

    tagged_ue_distance_sq: np.ndarray
    tagged_fade: np.ndarray
    counts: np.ndarray
    fn_distance_sq: np.ndarray
    own_fn_distance_sq: np.ndarray
    angle: np.ndarray
    fade: np.ndarray

    def __len__(self):
        return int(self.counts.shape[0])

    def scene(self, i: int) -> InterferenceScene:
        start = int(np.sum(self.counts[:i]))
        stop = start + int(self.counts[i])
        return InterferenceScene(
            float(self.tagged_ue_distance_sq[i]), float(self.tagged_fade[i]),
            self.fn_distance_sq[start:stop], self.own_fn_distance_sq[start:stop],
            self.angle[start:stop], self.fade[start:stop])


def default_window_radius(params: NetworkParams) -> float:
    return 20.0 / math.sqrt(math.pi * params.fn_density)


def _check_window(params, window_radius):
    if window_radius is None:
        return default_window_radius(params)
    minimum = 10.0 / math.sqrt(math.pi * params.fn_density)
    if window_radius < minimum:
        raise DomainError(
            f"window radius {window_radius:g} m is below the minimum "
            f"{minimum:g} m (10 mean FN spacings)")
    return window_radius


def sample_ppp(density: float, window_radius: float,
               rng: np.random.Generator) -> np.ndarray:
    """Squared distances from the origin of a PPP restricted to a disk."""
    if not density > 0 or not window_radius > 0:
        raise DomainError("density and window_radius must be positive")
    n = rng.poisson(density * math.pi * window_radius ** 2)
    return window_radius ** 2 * rng.random(n)


def sample_scene(params: NetworkParams, window_radius: float | None,
                 rng: np.random.Generator) -> InterferenceScene:
    window_radius = _check_window(params, window_radius)
    inv_c = 1.0 / params.cluster_param
    v = inv_c * rng.random()
    h0 = rng.exponential(1.0 / params.fading_rate)
    x2 = sample_ppp(params.fn_density, window_radius, rng)
    n = x2.shape[0]
    return InterferenceScene(
        tagged_ue_distance_sq=v,
        tagged_fade=h0,
        fn_distance_sq=x2,
        own_fn_distance_sq=inv_c * rng.random(n),
        angle=2.0 * math.pi * rng.random(n),
        fade=rng.exponential(1.0 / params.fading_rate, n),
    )


def sample_scenes(params: NetworkParams, n: int, window_radius: float | None,
                  rng: np.random.Generator) -> SceneBatch:
    """Vectorized equivalent of ``n`` calls to :func:`sample_scene`."""
    window_radius = _check_window(params, window_radius)
    inv_c = 1.0 / params.cluster_param
    v = inv_c * rng.random(n)
    h0 = rng.exponential(1.0 / params.fading_rate, n)
    counts = rng.poisson(params.fn_density * math.pi * window_radius ** 2, n)
    total = int(counts.sum())
    return SceneBatch(
        tagged_ue_distance_sq=v,
        tagged_fade=h0,
        counts=counts.astype(np.int64),
        fn_distance_sq=window_radius ** 2 * rng.random(total),
        own_fn_distance_sq=inv_c * rng.random(total),
        angle=2.0 * math.pi * rng.random(total),
        fade=rng.exponential(1.0 / params.fading_rate, total),
    )


def sample_mcp(params: NetworkParams, ues_per_fn: int, window_radius: float,
               rng: np.random.Generator):
    """Planar Matern cluster realization: ``(fn_xy, ue_xy, parent_index)``.

    Parents are a PPP in the disk; each hosts ``ues_per_fn`` UEs uniform in a
    disk of radius ``1/sqrt(c)`` around it.
    """
    if ues_per_fn < 1:
        raise DomainError("ues_per_fn must be >= 1")
    d2 = sample_ppp(params.fn_density, window_radius, rng)
    theta = 2.0 * math.pi * rng.random(d2.shape[0])
    r = np.sqrt(d2)
    fn_xy = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    parent = np.repeat(np.arange(fn_xy.shape[0]), ues_per_fn)
    rr = params.cluster_radius * np.sqrt(rng.random(parent.shape[0]))
    phi = 2.0 * math.pi * rng.random(parent.shape[0])
    ue_xy = fn_xy[parent] + np.column_stack([rr * np.cos(phi), rr * np.sin(phi)])
    return fn_xy, ue_xy, parent
