"""Effectiveness-nuisance generative model and its closed-form consequences.

Private values are normal, v_i ~ N(mu_v, sigma_v^2).  Hidden costs mix a
fraction of the advertiser's own value with an independent normal noise
component:

    z_i = theta * c * v_i + (1 - theta) * y_i,      y_i ~ N(mu_y, sigma_y^2)

``theta`` in [0, 1] measures the strength of the effectiveness-nuisance
tradeoff (theta = 0: costs independent of values; theta = 1: costs exactly
proportional).  Adjusted offers v_i - z_i are then normal with

    mu_a    = (1 - c*theta) * mu_v - (1 - theta) * mu_y
    sigma_a = sqrt((1 - c*theta)^2 * sigma_v^2 + (1 - theta)^2 * sigma_y^2)

Two closed-form consequences drive the analysis:

* dispersion condition: adjusted offers are more spread out than raw
  offers (sigma_a > sigma_v), the prerequisite for the adjusted mechanism
  to raise winning-advertiser profits;
* market depth: n = 2 / Phi(mu_a / sigma_a) - 1 estimates how many
  participating advertisers are needed before the adjusted auction has a
  nonnegative runner-up offer on average, i.e. before the profit advantage
  can materialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import AdvertiserDraw
from .stats import normal_cdf


class ParameterError(ValueError):
    """A parameterization the model rejects (degenerate or out of range)."""


def _sigma_a(sigma_v: float, sigma_y: float, c: float, theta: float) -> float:
    return math.sqrt((1.0 - c * theta) ** 2 * sigma_v ** 2
                     + (1.0 - theta) ** 2 * sigma_y ** 2)


@dataclass(frozen=True)
class TradeoffParams:
    """Six-parameter generative model for advertiser values and hidden costs."""

    mu_v: float
    sigma_v: float
    mu_y: float
    sigma_y: float
    c: float
    theta: float

    def __post_init__(self) -> None:
        for name in ("mu_v", "sigma_v", "mu_y", "sigma_y", "c", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite, got {getattr(self, name)}")
        if self.sigma_v <= 0.0:
            raise ParameterError(f"sigma_v must be > 0, got {self.sigma_v}")
        if self.sigma_y < 0.0:
            raise ParameterError(f"sigma_y must be >= 0, got {self.sigma_y}")
        if not 0.0 <= self.theta <= 1.0:
            raise ParameterError(f"theta must be in [0, 1], got {self.theta}")
        if _sigma_a(self.sigma_v, self.sigma_y, self.c, self.theta) == 0.0:
            raise ParameterError(
                "degenerate parameterization: sigma_a = 0 (adjusted offers have "
                f"no spread at c={self.c}, theta={self.theta}, sigma_y={self.sigma_y})")


@dataclass(frozen=True)
class AdjustedParams:
    """Normal parameters (mu_a, sigma_a) of the adjusted offers v_i - z_i."""

    mu_a: float
    sigma_a: float

    @property
    def z_score(self) -> float:
        """Standardized mean mu_a / sigma_a of the adjusted offers."""
        return self.mu_a / self.sigma_a

    @property
    def bid_probability(self) -> float:
        """Probability Phi(mu_a / sigma_a) that an advertiser has a
        nonnegative adjusted offer and therefore bids."""
        return normal_cdf(self.z_score)


def adjusted_params(p: TradeoffParams) -> AdjustedParams:
    """Mean and standard deviation of the adjusted offers v_i - z_i."""
    mu_a = (1.0 - p.c * p.theta) * p.mu_v - (1.0 - p.theta) * p.mu_y
    return AdjustedParams(mu_a=mu_a,
                          sigma_a=_sigma_a(p.sigma_v, p.sigma_y, p.c, p.theta))


def sample_value_cost(p: TradeoffParams, n: int, rng: np.random.Generator
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Draw n advertisers as parallel (value, hidden_cost) arrays.

    Consumes exactly 2n draws from ``rng``: first the n values, then the n
    independent noise components.  Callers relying on stream positions
    (replication substreams) depend on that order.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    v = rng.normal(p.mu_v, p.sigma_v, n)
    y = rng.normal(p.mu_y, p.sigma_y, n)
    z = p.theta * p.c * v + (1.0 - p.theta) * y
    return v, z


def sample_advertisers(p: TradeoffParams, n: int, rng: np.random.Generator
                       ) -> list[AdvertiserDraw]:
    """Draw n i.i.d. advertisers from the tradeoff model."""
    v, z = sample_value_cost(p, n, rng)
    return [AdvertiserDraw(value=float(vi), hidden_cost=float(zi))
            for vi, zi in zip(v, z)]


def costs_identically_zero(p: TradeoffParams) -> bool:
    """True when z_i is almost surely zero, collapsing both mechanisms."""
    return (p.theta * p.c == 0.0
            and (1.0 - p.theta) * p.sigma_y == 0.0
            and (1.0 - p.theta) * p.mu_y == 0.0)


class DispersionCondition(NamedTuple):
    holds: bool
    sigma_y_threshold: float


def dispersion_condition(p: TradeoffParams) -> DispersionCondition:
    """Whether adjusted offers are more dispersed than raw offers.

    ``holds`` is the direct comparison sigma_a > sigma_v, which is always
    well defined and is authoritative.  ``sigma_y_threshold`` is the
    closed-form boundary sqrt(1 - (1 - c*theta)^2) / (1 - theta) * sigma_v:
    the condition holds iff sigma_y exceeds it.  The threshold is 0 when
    (1 - c*theta)^2 >= 1 (the dependent component alone already adds
    spread) and infinite at theta = 1, where sigma_y no longer enters
    sigma_a and no finite threshold exists.
    """
    adj = adjusted_params(p)
    holds = adj.sigma_a > p.sigma_v
    if p.theta == 1.0:
        return DispersionCondition(holds=holds, sigma_y_threshold=math.inf)
    radicand = 1.0 - (1.0 - p.c * p.theta) ** 2
    if radicand <= 0.0:
        return DispersionCondition(holds=holds, sigma_y_threshold=0.0)
    threshold = math.sqrt(radicand) / (1.0 - p.theta) * p.sigma_v
    return DispersionCondition(holds=holds, sigma_y_threshold=threshold)


def market_depth_from_z(z_score: float) -> float:
    """Participating advertisers needed for two bidders: 2/Phi(z) - 1.

    ``z_score`` is the standardized mean of adjusted offers.  Derived from
    the runner-up of n uniforms averaging (n-1)/(n+1): solving
    Phi(-z) = (n-1)/(n+1) for n puts the expected runner-up adjusted offer
    at zero.  Returned as a real; callers round up.
    """
    return 2.0 / normal_cdf(z_score) - 1.0


def market_depth(p: TradeoffParams) -> float:
    """Market-depth estimate for the tradeoff model (heuristic, not a bound)."""
    return market_depth_from_z(adjusted_params(p).z_score)
