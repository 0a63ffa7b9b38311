"""Replicated Monte Carlo experiments over the two auction mechanisms.

Replication ``r`` of an experiment with master seed ``m`` consumes the
stream keyed ``(m, r)``: first the 2n model draws (n values, then n noise
components), then, only if a tie must be broken, key material for two
independent tie-break substreams (second price first).  Both mechanisms
run on the identical draw set, so per-replication outcome differences are
common-random-number paired.  Because each replication owns its stream and
aggregation uses exact compensated summation over replication order,
results are bit-identical for any worker count.

The probability estimate ``prob_as_gt_sp`` compares the two mechanisms'
winning-advertiser profits at shared top-two uniform ranks: with u_1 > u_2
the top two of n uniforms and F, G the clamped offer distributions of the
two mechanisms, it counts replications where
G^{-1}(u_1) - G^{-1}(u_2) > F^{-1}(u_1) - F^{-1}(u_2) strictly.  The ranks
are taken from the replication's own value draws, so the estimate is a
deterministic function of the shared draw set.  (Comparing the two auction
outcomes' profits directly estimates a different, coupling-dependent
quantity that does not converge to 1 under the dispersion condition;
profit *expectations* are coupling-free and come from the outcomes.)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .core import AuctionOutcome, as_auction_arrays, sp_auction_arrays
from .model import (TradeoffParams, adjusted_params, sample_value_cost)
from .stats import MASK64, RekeyableStream, derive_seed, lazy_substreams

SWEEP_AXES = ("n_advertisers", "theta", "c")

REPLICATION_COLUMNS = (
    "p_sp", "p_as",
    "rev_sp", "rev_as",
    "viewer_cost_sp", "viewer_cost_as",
    "price_sp", "price_as",
    "num_bidders_sp", "num_bidders_as",
    "sp_winner_value",
    "cmp_p_sp", "cmp_p_as",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Model parameters plus experiment shape and the master seed."""

    params: TradeoffParams
    n_advertisers: int
    replications: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.n_advertisers < 1:
            raise ValueError(f"n_advertisers must be >= 1, got {self.n_advertisers}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError(f"master_seed must be a 64-bit unsigned int, "
                             f"got {self.master_seed}")


@dataclass(frozen=True)
class SimSummary:
    """Monte Carlo estimates with standard errors (sample std / sqrt(R))."""

    prob_as_gt_sp: float
    prob_as_gt_sp_se: float
    mean_p_sp: float
    mean_p_sp_se: float
    mean_p_as: float
    mean_p_as_se: float
    mean_rev_sp: float
    mean_rev_sp_se: float
    mean_rev_as: float
    mean_rev_as_se: float
    mean_viewer_cost_sp: float
    mean_viewer_cost_sp_se: float
    mean_viewer_cost_as: float
    mean_viewer_cost_as_se: float
    replications_used: int

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in SUMMARY_FIELDS}


SUMMARY_FIELDS = (
    "prob_as_gt_sp", "prob_as_gt_sp_se",
    "mean_p_sp", "mean_p_sp_se",
    "mean_p_as", "mean_p_as_se",
    "mean_rev_sp", "mean_rev_sp_se",
    "mean_rev_as", "mean_rev_as_se",
    "mean_viewer_cost_sp", "mean_viewer_cost_sp_se",
    "mean_viewer_cost_as", "mean_viewer_cost_as_se",
    "replications_used",
)


def _model_sampler(params: TradeoffParams, rng: np.random.Generator, n: int
                   ) -> tuple[np.ndarray, np.ndarray]:
    # module-level so worker processes can unpickle the partial
    return sample_value_cost(params, n, rng)


def run_replication(params: TradeoffParams, n_advertisers: int,
                    rng: np.random.Generator
                    ) -> tuple[AuctionOutcome, AuctionOutcome]:
    """One paired replication: both mechanisms on one draw set.

    ``rng`` must sit at the start of the replication's stream.  The 2n
    model draws are consumed first; tie-break substream keys are drawn
    after them only when a tie occurs.
    """
    v, z = sample_value_cost(params, n_advertisers, rng)
    tie_sp, tie_as = lazy_substreams(rng, 2)
    out_sp = sp_auction_arrays(v, z, tie_sp, validate=False)
    out_as = as_auction_arrays(v, z, tie_as, validate=False)
    return out_sp, out_as


def _clamped_gap(mu: float, sigma: float, s1: float, s2: float | None) -> float:
    """Quantile-coupled profit: gap of the clamped offer quantiles at the
    shared standardized ranks s1 >= s2 (s2 None for a single advertiser)."""
    hi = mu + sigma * s1
    if hi < 0.0:
        hi = 0.0
    lo = 0.0
    if s2 is not None:
        lo = mu + sigma * s2
        if lo < 0.0:
            lo = 0.0
    return hi - lo


def _replicate_block(sampler: Callable, n_advertisers: int, master_seed: int,
                     lo: int, hi: int,
                     quantile_pair: tuple[float, float, float, float] | None,
                     ) -> dict[str, np.ndarray]:
    """Compute replications lo..hi-1; returns one array per column."""
    size = hi - lo
    cols = {name: np.empty(size, dtype=np.float64) for name in REPLICATION_COLUMNS}
    stream = RekeyableStream()
    for i in range(size):
        r = lo + i
        gen = stream.rekey(master_seed, r)
        v, z = sampler(gen, n_advertisers)
        tie_sp, tie_as = lazy_substreams(gen, 2)
        out_sp = sp_auction_arrays(v, z, tie_sp, validate=False)
        out_as = as_auction_arrays(v, z, tie_as, validate=False)

        cols["p_sp"][i] = out_sp.advertiser_profit
        cols["p_as"][i] = out_as.advertiser_profit
        cols["rev_sp"][i] = out_sp.platform_revenue
        cols["rev_as"][i] = out_as.platform_revenue
        cols["viewer_cost_sp"][i] = out_sp.viewer_hidden_cost
        cols["viewer_cost_as"][i] = out_as.viewer_hidden_cost
        cols["price_sp"][i] = out_sp.price
        cols["price_as"][i] = out_as.price
        cols["num_bidders_sp"][i] = out_sp.num_bidders
        cols["num_bidders_as"][i] = out_as.num_bidders
        cols["sp_winner_value"][i] = v[out_sp.winner] if out_sp.winner is not None else 0.0

        if quantile_pair is None:
            cols["cmp_p_sp"][i] = 0.0
            cols["cmp_p_as"][i] = 0.0
        else:
            mu_v, sigma_v, mu_a, sigma_a = quantile_pair
            n = v.size
            if n >= 2:
                top = np.partition(v, n - 2)
                s1 = (top[n - 1] - mu_v) / sigma_v
                s2 = (top[n - 2] - mu_v) / sigma_v
            else:
                s1 = (v[0] - mu_v) / sigma_v
                s2 = None
            cols["cmp_p_sp"][i] = _clamped_gap(mu_v, sigma_v, s1, s2)
            cols["cmp_p_as"][i] = _clamped_gap(mu_a, sigma_a, s1, s2)
    return cols


def _block_ranges(total: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, total))
    base, extra = divmod(total, workers)
    ranges, lo = [], 0
    for w in range(workers):
        hi = lo + base + (1 if w < extra else 0)
        ranges.append((lo, hi))
        lo = hi
    return ranges


def collect_paired_outcomes(sampler: Callable, n_advertisers: int,
                            replications: int, master_seed: int,
                            workers: int = 1,
                            quantile_pair: tuple[float, float, float, float] | None = None,
                            ) -> dict[str, np.ndarray]:
    """Per-replication outcome columns for a generic (value, cost) sampler.

    ``sampler(rng, n) -> (values, hidden_costs)`` defines the cost model;
    everything else (streams, pairing, tie-breaking) is shared machinery.
    The result is indexed by replication regardless of ``workers``.
    """
    ranges = _block_ranges(replications, workers)
    job = partial(_replicate_block, sampler, n_advertisers, master_seed)
    if len(ranges) == 1:
        blocks = [job(*ranges[0], quantile_pair)]
    else:
        with ProcessPoolExecutor(max_workers=len(ranges)) as pool:
            blocks = list(pool.map(job, *zip(*ranges),
                                   [quantile_pair] * len(ranges)))
    return {name: np.concatenate([b[name] for b in blocks])
            for name in REPLICATION_COLUMNS}


def collect_replications(cfg: ExperimentConfig, workers: int = 1
                         ) -> dict[str, np.ndarray]:
    """Per-replication outcome columns for the tradeoff model."""
    adj = adjusted_params(cfg.params)
    quantile_pair = (cfg.params.mu_v, cfg.params.sigma_v, adj.mu_a, adj.sigma_a)
    sampler = partial(_model_sampler, cfg.params)
    return collect_paired_outcomes(sampler, cfg.n_advertisers, cfg.replications,
                                   cfg.master_seed, workers=workers,
                                   quantile_pair=quantile_pair)


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    """Exact-summation mean and standard error (sample std / sqrt(R)).

    math.fsum is order-exact, so the statistics cannot depend on how
    replications were distributed over workers.
    """
    r = values.size
    mean = math.fsum(values) / r
    if r < 2:
        return mean, 0.0
    residuals = values - mean
    var = math.fsum(residuals * residuals) / (r - 1)
    return mean, math.sqrt(var / r)


def summarize(columns: dict[str, np.ndarray]) -> SimSummary:
    """Reduce per-replication columns to a SimSummary."""
    wins = (columns["cmp_p_as"] > columns["cmp_p_sp"]).astype(np.float64)
    prob, prob_se = mean_and_se(wins)
    p_sp, p_sp_se = mean_and_se(columns["p_sp"])
    p_as, p_as_se = mean_and_se(columns["p_as"])
    rev_sp, rev_sp_se = mean_and_se(columns["rev_sp"])
    rev_as, rev_as_se = mean_and_se(columns["rev_as"])
    vc_sp, vc_sp_se = mean_and_se(columns["viewer_cost_sp"])
    vc_as, vc_as_se = mean_and_se(columns["viewer_cost_as"])
    return SimSummary(
        prob_as_gt_sp=prob, prob_as_gt_sp_se=prob_se,
        mean_p_sp=p_sp, mean_p_sp_se=p_sp_se,
        mean_p_as=p_as, mean_p_as_se=p_as_se,
        mean_rev_sp=rev_sp, mean_rev_sp_se=rev_sp_se,
        mean_rev_as=rev_as, mean_rev_as_se=rev_as_se,
        mean_viewer_cost_sp=vc_sp, mean_viewer_cost_sp_se=vc_sp_se,
        mean_viewer_cost_as=vc_as, mean_viewer_cost_as_se=vc_as_se,
        replications_used=columns["p_sp"].size,
    )


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> SimSummary:
    """Run the paired experiment; a deterministic function of ``cfg``."""
    return summarize(collect_replications(cfg, workers=workers))


def sweep(cfg_base: ExperimentConfig, axis: str, values: Sequence,
          workers: int = 1) -> list[tuple[float, SimSummary]]:
    """One experiment per axis value.

    ``axis`` is one of ``n_advertisers``, ``theta``, ``c``.  Entry j runs
    with master seed ``derive_seed(cfg_base.master_seed, j)`` so entries
    are mutually independent yet fully reproducible.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if len(values) == 0:
        raise ValueError("sweep requires at least one axis value")
    results = []
    for j, value in enumerate(values):
        seed_j = derive_seed(cfg_base.master_seed, j)
        if axis == "n_advertisers":
            if int(value) != value:
                raise ValueError(f"n_advertisers must be an integer, got {value}")
            cfg_j = replace(cfg_base, n_advertisers=int(value), master_seed=seed_j)
        else:
            params_j = replace(cfg_base.params, **{axis: float(value)})
            cfg_j = replace(cfg_base, params=params_j, master_seed=seed_j)
        results.append((float(value), run_experiment(cfg_j, workers=workers)))
    return results
