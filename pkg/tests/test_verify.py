"""Oracle behavior at reduced replication counts (full scale lives in
test_acceptance.py)."""

import math

import numpy as np
import pytest

from adauction.core import AdvertiserDraw
from adauction.model import TradeoffParams
from adauction.sim import run_replication
from adauction.stats import make_generator
from adauction.verify import (DEFAULT_DEVIATIONS, TheoremId, check_beta_u2,
                              check_counterexample, check_pit_equivalence,
                              check_theorem1, check_theorem2, check_theorem3,
                              check_truthfulness, truthfulness_suite)

DISPERSED = TradeoffParams(mu_v=2.0, sigma_v=1.0, mu_y=1.0, sigma_y=2.0,
                           c=0.5, theta=0.0)
COMPRESSED = TradeoffParams(mu_v=2.0, sigma_v=1.0, mu_y=1.0, sigma_y=2.0,
                            c=0.5, theta=1.0)
ZERO_COST = TradeoffParams(mu_v=2.0, sigma_v=1.0, mu_y=0.0, sigma_y=0.0,
                           c=0.0, theta=1.0)


def rng(seed=0):
    return make_generator(seed, 1000)


def test_t1_passes_on_dispersed_model():
    report = check_theorem1(DISPERSED, (5, 10, 20), reps=4000, rng=rng(1),
                            delta=0.1)
    assert not report.skipped
    assert report.passed
    assert report.statistic >= 0.9


def test_t1_skips_without_dispersion():
    report = check_theorem1(COMPRESSED, (5, 10), reps=100, rng=rng(2))
    assert report.skipped
    assert "dispersion" in report.detail


def test_t1_flags_degenerate_costs():
    report = check_theorem1(ZERO_COST, (5, 10), reps=100, rng=rng(3))
    assert report.skipped
    assert "identically zero" in report.detail


def test_t1_deterministic_given_seed():
    a = check_theorem1(DISPERSED, (5, 10), reps=500, rng=rng(4))
    b = check_theorem1(DISPERSED, (5, 10), reps=500, rng=rng(4))
    assert a == b


def test_t2_locates_crossover():
    # Z-score -1 parameterization; the mean-profit difference turns
    # positive between n=3 and n=6 (verified at acceptance scale too)
    p = TradeoffParams(mu_v=2.0, sigma_v=1.0, mu_y=2.0 + math.sqrt(5.0),
                       sigma_y=2.0, c=0.5, theta=0.0)
    report = check_theorem2(p, (3, 6, 12, 24), reps=20000, rng=rng(5))
    assert report.passed
    assert report.statistic <= 12
    assert "market-depth estimate = 11.61" in report.detail


def test_t2_skips_like_t1():
    assert check_theorem2(COMPRESSED, (3, 6), reps=100, rng=rng(6)).skipped
    assert check_theorem2(ZERO_COST, (3, 6), reps=100, rng=rng(6)).skipped


def test_t2_positive_immediately_when_mean_adjusted_offer_positive():
    report = check_theorem2(DISPERSED, (3, 6, 12), reps=20000, rng=rng(7))
    assert report.passed
    assert report.statistic == 3.0


def test_t3_holds_on_grid_point():
    report = check_theorem3(DISPERSED, (3, 10), reps=10000, rng=rng(8))
    assert report.passed
    assert report.statistic >= -3.0


def test_t3_trivial_on_zero_costs():
    report = check_theorem3(ZERO_COST, (3, 10), reps=2000, rng=rng(9))
    assert report.passed
    assert report.statistic == 0.0


def test_t3_preconditions():
    neg_c = TradeoffParams(mu_v=2.0, sigma_v=1.0, mu_y=1.0, sigma_y=2.0,
                           c=-0.5, theta=0.5)
    with pytest.raises(ValueError, match="counterexample"):
        check_theorem3(neg_c, (3, 10), reps=10, rng=rng(10))
    with pytest.raises(ValueError, match="n >= 3"):
        check_theorem3(DISPERSED, (2, 10), reps=10, rng=rng(10))


def test_counterexample_reverses_revenue():
    report = check_counterexample(reps=20000, rng=rng(11))
    assert report.passed
    assert report.statistic <= -3.0
    assert "0 violations" in report.detail


def test_counterexample_excludes_thin_replications():
    # values almost surely negative: both mechanisms empty, the identity
    # check is vacuous and the significance test cannot pass
    report = check_counterexample(reps=500, rng=rng(24), mu_v=-3.0)
    assert not report.passed
    assert "checked on 0 of 500" in report.detail


def test_counterexample_identity_by_hand():
    # v = (10, 6), z = -v/2: adjusted offers are 1.5 v, same ranking;
    # revenue difference must be (6 - 10)/2 = -2 exactly
    draws = [AdvertiserDraw(10.0, -5.0), AdvertiserDraw(6.0, -3.0)]
    from adauction.core import as_auction, sp_auction
    out_sp = sp_auction(draws, rng(12))
    out_as = as_auction(draws, rng(13))
    assert out_as.platform_revenue - out_sp.platform_revenue == -2.0


def test_pit_equivalence_small_n():
    report = check_pit_equivalence(DISPERSED, n=2, reps=4000, rng=rng(14))
    assert report.passed
    assert report.statistic < report.threshold


def test_pit_equivalence_rejects_single_advertiser():
    with pytest.raises(ValueError):
        check_pit_equivalence(DISPERSED, n=1, reps=100, rng=rng(15))


def test_pit_ks_oracle_has_power():
    # the 1% critical value separates genuinely different profit
    # distributions at these sample sizes, so a transform mismatch in the
    # equivalence check could not slip through
    from adauction.sim import ExperimentConfig, collect_replications
    from adauction.stats import ks_critical_value, ks_distance

    wrong = TradeoffParams(mu_v=2.0, sigma_v=1.5, mu_y=1.0, sigma_y=2.0,
                           c=0.5, theta=0.0)
    a = np.sort(collect_replications(
        ExperimentConfig(DISPERSED, 5, 4000, 321))["p_sp"])
    b = np.sort(collect_replications(
        ExperimentConfig(wrong, 5, 4000, 322))["p_sp"])
    assert ks_distance(a, b) > ks_critical_value(0.01, 4000, 4000)


def test_beta_u2_small_ranks():
    for n, reps in ((2, 50000), (3, 50000)):
        report = check_beta_u2(n, reps, rng(17))
        assert report.passed, report.detail


def test_beta_u2_mean_formula():
    report = check_beta_u2(2, 200_000, rng(18))
    assert "0.333333" in report.detail     # mean of min of two uniforms


def test_beta_u2_rejects_n1():
    with pytest.raises(ValueError):
        check_beta_u2(1, 100, rng(19))


def test_truthfulness_hand_instance():
    draws = [AdvertiserDraw(10.0, 3.0), AdvertiserDraw(6.0, 1.0)]
    report = check_truthfulness(draws, (-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0),
                                rng(20))
    assert report.passed
    assert report.statistic <= report.threshold


def test_truthfulness_overbidding_loser_goes_negative():
    # the losing advertiser can grab the slot by overbidding, but then
    # pays more than its value; that must never look like an improvement
    draws = [AdvertiserDraw(10.0, 0.0), AdvertiserDraw(6.0, 0.0)]
    report = check_truthfulness(draws, (4.1, 5.0, 20.0), rng(21))
    assert report.passed


def test_truthfulness_suite_random_instances():
    report = truthfulness_suite(DISPERSED, rng(22), instances=40, max_n=5)
    assert report.passed
    assert len(DEFAULT_DEVIATIONS) == 11


def test_reports_serialize():
    report = check_beta_u2(3, 1000, rng(23))
    d = report.to_dict()
    assert d["theorem_id"] == "BETA_U2"
    assert set(d) == {"theorem_id", "passed", "statistic", "threshold",
                      "detail", "skipped"}
    assert TheoremId(d["theorem_id"]) is TheoremId.BETA_U2
