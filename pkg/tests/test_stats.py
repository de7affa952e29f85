"""Moment estimators, KS distance, chi-square, and reports."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from periodic_urns import (
    EmptySample,
    GenGammaParams,
    InsufficientCounts,
    build_comparison_report,
    chi_square_pmf,
    empirical_moments,
    gengamma_cdf,
    gengamma_moment,
    gengamma_sample,
    ks_distance,
)


def test_empty_sample_errors():
    with pytest.raises(EmptySample):
        empirical_moments([], 2)
    with pytest.raises(EmptySample):
        ks_distance([], lambda x: x)
    with pytest.raises(EmptySample):
        chi_square_pmf([], {0: 1.0})


def test_constant_sample_moments():
    est = empirical_moments([3.0] * 100, 3)
    assert [m.value for m in est] == [3.0, 9.0, 27.0]
    assert all(m.se == 0.0 for m in est)


def test_known_moments():
    rng = np.random.default_rng(42)
    uni = rng.random(200_000)
    est = empirical_moments(uni, 2)
    assert abs(est[1].value - 1 / 3) < 4 * est[1].se
    gg = gengamma_sample(rng, GenGammaParams(1, 3), size=200_000)
    est = empirical_moments(gg, 1)
    assert abs(est[0].value - gengamma_moment(1, GenGammaParams(1, 3))) < 4 * est[0].se


def test_se_halves_when_sample_doubles():
    rng = np.random.default_rng(0)
    ratios = []
    for _ in range(40):
        xs = rng.standard_normal(4000) ** 2
        small = empirical_moments(xs[:2000], 1)[0].se
        large = empirical_moments(xs, 1)[0].se
        ratios.append(small / large)
    mean_ratio = float(np.mean(ratios))
    assert abs(mean_ratio - math.sqrt(2)) < 0.2 * math.sqrt(2)


def test_ks_distance_calibration():
    # DKW-type bound at a fixed seed: distance below 1.95 / sqrt(n)
    rng = np.random.default_rng(1)
    params = GenGammaParams(1, 3)
    draws = gengamma_sample(rng, params, size=100_000)
    d = ks_distance(draws, lambda x: gengamma_cdf(x, params))
    assert d <= 1.95 / math.sqrt(100_000)


def test_ks_distance_detects_shift():
    rng = np.random.default_rng(2)
    params = GenGammaParams(1, 3)
    draws = gengamma_sample(rng, params, size=20_000) + 10.0
    d = ks_distance(draws, lambda x: gengamma_cdf(x, params))
    assert d > 0.99


def test_ks_invariance_under_monotone_transform():
    rng = np.random.default_rng(3)
    params = GenGammaParams(4, 3)
    draws = gengamma_sample(rng, params, size=5_000)
    base = ks_distance(draws, lambda x: gengamma_cdf(x, params))
    transformed = ks_distance(np.exp(draws), lambda y: gengamma_cdf(np.log(y), params))
    assert transformed == pytest.approx(base, abs=1e-12)


def test_ks_exact_small_case():
    # one point at the median of U(0,1): distance is 1/2
    assert ks_distance([0.5], lambda x: np.asarray(x)) == pytest.approx(0.5)


def test_chi_square_exact_fit_and_power():
    pmf = {k: Fraction(v, 30) for k, v in {1: 8, 2: 8, 3: 8, 4: 6}.items()}
    rng = np.random.default_rng(8)
    draws = rng.choice([1, 2, 3, 4], p=[float(pmf[k]) for k in (1, 2, 3, 4)], size=100_000)
    good = chi_square_pmf(draws, pmf)
    assert good.pvalue > 0.001
    wrong = {1: pmf[1], 2: pmf[2], 3: pmf[4], 4: pmf[3]}  # swap two unequal masses
    bad = chi_square_pmf(draws, wrong)
    assert bad.pvalue < 1e-6


def test_chi_square_pvalue_roughly_uniform_under_null():
    pmf = {0: 0.5, 1: 0.3, 2: 0.2}
    pvals = []
    for seed in range(120):
        rng = np.random.default_rng(seed)
        draws = rng.choice([0, 1, 2], p=[0.5, 0.3, 0.2], size=3000)
        pvals.append(chi_square_pmf(draws, pmf).pvalue)
    assert 0.35 < float(np.mean(pvals)) < 0.65
    assert np.mean(np.asarray(pvals) < 0.05) < 0.15


def test_chi_square_bin_merging():
    # thin tails must be merged inward until every expected count is >= 5
    pmf = {0: 0.001, 1: 0.002, 2: 0.497, 3: 0.497, 4: 0.002, 5: 0.001}
    rng = np.random.default_rng(4)
    draws = rng.choice(6, p=[pmf[k] for k in range(6)], size=5_000)
    res = chi_square_pmf(draws, pmf)
    assert res.bins >= 2
    assert res.dof == res.bins - 1


def test_chi_square_insufficient():
    with pytest.raises(InsufficientCounts):
        chi_square_pmf([0, 1], {0: 0.5, 1: 0.5})
    with pytest.raises(Exception):
        chi_square_pmf([7], {0: 1.0})  # value outside support


def test_comparison_report_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    params = GenGammaParams(1, 3)
    draws = gengamma_sample(rng, params, size=50_000)
    report = build_comparison_report(
        draws,
        lambda r: gengamma_moment(r, params),
        r_max=3,
        cdf=lambda x: gengamma_cdf(x, params),
        metadata={"name": "unit"},
        moment_rtol=0.05,
        ks_threshold=0.02,
    )
    assert report.passed
    assert report.ks is not None and report.ks < 0.02
    assert {m.r for m in report.moments} == {1, 2, 3}
    assert all(abs(m.z) < 5 for m in report.moments)
    json_path = tmp_path / "report.json"
    csv_path = tmp_path / "moments.csv"
    report.write_json(json_path)
    report.write_moments_csv(csv_path)
    doc = json.loads(json_path.read_text())
    assert doc["passed"] is True
    assert doc["metadata"] == {"name": "unit"}
    assert len(doc["moments"]) == 3
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "r,empirical,analytic,se,z"
    assert len(lines) == 4


def test_comparison_report_failure_flags():
    rng = np.random.default_rng(6)
    draws = rng.random(10_000)  # uniform, compared against a wrong law
    params = GenGammaParams(4, 3)
    report = build_comparison_report(
        draws,
        lambda r: gengamma_moment(r, params),
        r_max=2,
        cdf=lambda x: gengamma_cdf(x, params),
        ks_threshold=0.05,
    )
    assert not report.passed
    assert not report.verdicts["ks"]
