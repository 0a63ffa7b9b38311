"""Single-slot second-price auction and its hidden-cost-adjusted variant.

Two mechanisms over the same pool of advertisers:

* ``sp_auction``: plain second price.  Offers are the private values v_i;
  the highest offer wins and pays the runner-up offer.
* ``as_auction``: second price over cost-adjusted offers v_i - z_i, where
  z_i is the hidden cost the ad imposes on the platform (a Pigovian charge
  for degraded viewer experience).  The winner pays the runner-up adjusted
  offer plus its own hidden cost z_w.

An advertiser abstains from a mechanism when its offer for that mechanism
is negative; an offer of exactly zero still participates.  When only one
advertiser participates the runner-up offer is defined as 0 (an implicit
zero reserve), so the lone SP bidder pays nothing and the lone adjusted
bidder pays exactly its hidden cost.

Outcome accounting (>= 2 bidders):

==========================  ==============  =========================
quantity                    second price    cost-adjusted
==========================  ==============  =========================
price paid by winner        v_s             (v_s - z_s) + z_w
winning advertiser profit   v_w - v_s       (v_w - z_w) - (v_s - z_s)
platform revenue            v_s - z_w       v_s - z_s
viewer hidden cost          z_w             z_w
==========================  ==============  =========================

where w/s index the winner and runner-up of the respective ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class AdvertiserDraw:
    """One advertiser's private value and hidden cost, in currency units.

    ``hidden_cost`` is the net-present-value impact of showing the ad on
    the platform's future revenue; it may be negative for ads viewers like.
    """

    value: float
    hidden_cost: float


@dataclass(frozen=True)
class AuctionOutcome:
    """Result of one auction.

    ``winner`` is None when nobody participates, in which case every other
    field is zero.  ``num_bidders`` counts advertisers with nonnegative
    offers for the mechanism that produced this outcome.  ``price`` can be
    negative only in the cost-adjusted mechanism (for z_w < 0); it is
    recorded unclamped because the accounting is purely algebraic.
    """

    winner: int | None
    price: float
    advertiser_profit: float
    platform_revenue: float
    viewer_hidden_cost: float
    num_bidders: int


_EMPTY = AuctionOutcome(winner=None, price=0.0, advertiser_profit=0.0,
                        platform_revenue=0.0, viewer_hidden_cost=0.0,
                        num_bidders=0)


def _resolve(rng) -> np.random.Generator:
    return rng() if callable(rng) else rng


def _to_arrays(draws: Sequence[AdvertiserDraw]) -> tuple[np.ndarray, np.ndarray]:
    values = np.array([d.value for d in draws], dtype=np.float64)
    costs = np.array([d.hidden_cost for d in draws], dtype=np.float64)
    return values, costs


def _validate(values: np.ndarray, hidden_costs: np.ndarray) -> None:
    if values.shape != hidden_costs.shape or values.ndim != 1:
        raise ValueError("values and hidden_costs must be 1-d arrays of equal length")
    if values.size and not (np.isfinite(values).all() and np.isfinite(hidden_costs).all()):
        raise ValueError("auction inputs must be finite (no NaN or infinity)")


def _select_winner(offers: np.ndarray, rng) -> tuple[int, float, int] | None:
    """Pick the winning offer and the runner-up offer.

    Returns (winner_index, runner_offer, num_bidders), or None when no
    offer is nonnegative.  Ties at the top are broken uniformly at random;
    ``rng`` is consumed only when a tie actually occurs.  The runner-up
    offer is 0.0 for a single bidder.
    """
    n = offers.size
    if n == 0:
        return None
    top = float(offers.max())
    if top < 0.0:
        return None
    num_bidders = int((offers >= 0.0).sum())
    tied = np.flatnonzero(offers == top)
    if tied.size > 1:
        winner = int(tied[_resolve(rng).integers(tied.size)])
    else:
        winner = int(tied[0])
    if num_bidders == 1:
        return winner, 0.0, 1
    runner = float(np.partition(offers, n - 2)[n - 2])
    return winner, runner, num_bidders


def sp_auction_arrays(values: np.ndarray, hidden_costs: np.ndarray, rng,
                      validate: bool = True) -> AuctionOutcome:
    """Second-price auction on parallel arrays; see ``sp_auction``.

    ``rng`` may be a generator or a zero-argument callable returning one;
    it is only consumed to break a tie at the top.  ``validate=False``
    skips the finiteness check for inputs known finite by construction.
    """
    values = np.asarray(values, dtype=np.float64)
    hidden_costs = np.asarray(hidden_costs, dtype=np.float64)
    if validate:
        _validate(values, hidden_costs)
    selected = _select_winner(values, rng)
    if selected is None:
        return _EMPTY
    winner, runner, num_bidders = selected
    z_w = float(hidden_costs[winner])
    return AuctionOutcome(
        winner=winner,
        price=runner,
        advertiser_profit=float(values[winner]) - runner,
        platform_revenue=runner - z_w,
        viewer_hidden_cost=z_w,
        num_bidders=num_bidders,
    )


def as_auction_arrays(values: np.ndarray, hidden_costs: np.ndarray, rng,
                      validate: bool = True) -> AuctionOutcome:
    """Cost-adjusted second-price auction on parallel arrays; see ``as_auction``."""
    values = np.asarray(values, dtype=np.float64)
    hidden_costs = np.asarray(hidden_costs, dtype=np.float64)
    if validate:
        _validate(values, hidden_costs)
    adjusted = values - hidden_costs
    selected = _select_winner(adjusted, rng)
    if selected is None:
        return _EMPTY
    winner, runner, num_bidders = selected
    z_w = float(hidden_costs[winner])
    return AuctionOutcome(
        winner=winner,
        price=runner + z_w,
        advertiser_profit=float(adjusted[winner]) - runner,
        platform_revenue=runner,
        viewer_hidden_cost=z_w,
        num_bidders=num_bidders,
    )


def sp_auction(draws: Sequence[AdvertiserDraw], rng) -> AuctionOutcome:
    """Run a second-price auction over the advertisers in ``draws``.

    Advertisers with negative value abstain.  With at least two bidders the
    highest value wins and pays the second-highest; a lone bidder wins at
    price zero; with no bidders the outcome is empty.  ``rng`` is used only
    to break ties uniformly at random.
    """
    values, costs = _to_arrays(draws)
    return sp_auction_arrays(values, costs, rng)


def as_auction(draws: Sequence[AdvertiserDraw], rng) -> AuctionOutcome:
    """Run the hidden-cost-adjusted auction over the advertisers in ``draws``.

    Advertisers with negative adjusted offer (value - hidden_cost) abstain.
    The highest adjusted offer wins, pays the runner-up adjusted offer plus
    its own hidden cost; a lone bidder pays exactly its hidden cost.
    """
    values, costs = _to_arrays(draws)
    return as_auction_arrays(values, costs, rng)


def advertiser_profit_pair(draws: Sequence[AdvertiserDraw], rng) -> tuple[float, float]:
    """Winning-advertiser profit under both mechanisms on identical draws.

    The two auctions share the draw list but break ties on independent
    substreams derived from ``rng``.  A mechanism with no participants
    contributes profit 0.
    """
    from .stats import lazy_substreams  # local import keeps layering one-way

    values, costs = _to_arrays(draws)
    _validate(values, costs)
    tie_sp, tie_as = lazy_substreams(_resolve(rng), 2)
    out_sp = sp_auction_arrays(values, costs, tie_sp, validate=False)
    out_as = as_auction_arrays(values, costs, tie_as, validate=False)
    return out_sp.advertiser_profit, out_as.advertiser_profit
