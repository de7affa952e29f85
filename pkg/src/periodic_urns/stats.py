"""Empirical-versus-analytic comparisons for Monte Carlo output.

Pure functions over immutable samples: plug-in moment estimators with their
standard errors, the Kolmogorov-Smirnov sup distance against a reference CDF,
Pearson chi-square against an exact pmf on a finite support, and a
machine-readable report bundling all of it with pass/fail verdicts.

KS p-values are deliberately not computed: the experiments compare samples at
finite n against a limit law, so the deterministic finite-size bias dominates
sampling noise and acceptance works off fixed distance thresholds instead.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy.stats import chi2

from .errors import EmptySample, InsufficientCounts, InvalidParams

__all__ = [
    "MomentEstimate",
    "MomentComparison",
    "ChiSquareResult",
    "ComparisonReport",
    "empirical_moments",
    "ks_distance",
    "chi_square_pmf",
    "build_comparison_report",
]


@dataclass(frozen=True)
class MomentEstimate:
    r: int
    value: float
    se: float


def empirical_moments(sample, r_max: int) -> list[MomentEstimate]:
    """Plug-in estimates of E[X^r] for r = 1..r_max with plug-in standard
    errors sd(X^r)/sqrt(len)."""
    if r_max < 1:
        raise InvalidParams(f"r_max must be >= 1, got {r_max}")
    xs = np.asarray(sample, dtype=np.float64)
    if xs.size == 0:
        raise EmptySample("cannot estimate moments of an empty sample")
    out = []
    for r in range(1, r_max + 1):
        powers = xs**r
        value = float(powers.mean())
        se = float(powers.std(ddof=1) / math.sqrt(xs.size)) if xs.size > 1 else 0.0
        out.append(MomentEstimate(r, value, se))
    return out


def ks_distance(sample, cdf: Callable) -> float:
    """sup_x |F_hat(x) - F(x)| for the empirical CDF of the sample."""
    xs = np.sort(np.asarray(sample, dtype=np.float64))
    if xs.size == 0:
        raise EmptySample("cannot compute a KS distance for an empty sample")
    ref = np.asarray(cdf(xs), dtype=np.float64)
    steps = np.arange(1, xs.size + 1) / xs.size
    return float(np.max(np.maximum(np.abs(steps - ref), np.abs(steps - 1.0 / xs.size - ref))))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    pvalue: float
    bins: int


def _merge_bins(expected: list[float], observed: list[float], min_expected: float):
    """Merge adjacent bins from the tails inward until every expected count
    reaches ``min_expected``."""
    exp = list(expected)
    obs = list(observed)
    while len(exp) > 1 and exp[0] < min_expected:
        exp[1] += exp[0]
        obs[1] += obs[0]
        del exp[0], obs[0]
    while len(exp) > 1 and exp[-1] < min_expected:
        exp[-2] += exp[-1]
        obs[-2] += obs[-1]
        del exp[-1], obs[-1]
    merged_exp: list[float] = []
    merged_obs: list[float] = []
    acc_e = acc_o = 0.0
    for e, o in zip(exp, obs):
        acc_e += e
        acc_o += o
        if acc_e >= min_expected:
            merged_exp.append(acc_e)
            merged_obs.append(acc_o)
            acc_e = acc_o = 0.0
    if acc_e > 0:
        if merged_exp:
            merged_exp[-1] += acc_e
            merged_obs[-1] += acc_o
        else:
            merged_exp.append(acc_e)
            merged_obs.append(acc_o)
    return merged_exp, merged_obs


def chi_square_pmf(
    sample,
    pmf: Mapping[int, Fraction | float],
    min_expected: float = 5.0,
) -> ChiSquareResult:
    """Pearson goodness of fit of integer draws against an exact pmf."""
    xs = np.asarray(sample)
    if xs.size == 0:
        raise EmptySample("cannot run a chi-square test on an empty sample")
    support = sorted(pmf)
    lookup = {k: i for i, k in enumerate(support)}
    observed = [0.0] * len(support)
    vals, counts = np.unique(xs, return_counts=True)
    for v, c in zip(vals.tolist(), counts.tolist()):
        if v not in lookup:
            raise InvalidParams(f"sample value {v} outside the pmf support")
        observed[lookup[v]] = float(c)
    n = float(xs.size)
    expected = [float(pmf[k]) * n for k in support]
    exp, obs = _merge_bins(expected, observed, min_expected)
    if len(exp) < 2 or min(exp) < min_expected:
        raise InsufficientCounts(
            f"cannot form >= 2 bins with expected count >= {min_expected}"
        )
    stat = sum((o - e) ** 2 / e for o, e in zip(obs, exp))
    dof = len(exp) - 1
    return ChiSquareResult(stat, dof, float(chi2.sf(stat, dof)), len(exp))


@dataclass(frozen=True)
class MomentComparison:
    r: int
    empirical: float
    analytic: float
    se: float
    z: float


@dataclass
class ComparisonReport:
    metadata: dict
    moments: list[MomentComparison]
    ks: float | None = None
    chi_square: ChiSquareResult | None = None
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json_dict(self) -> dict:
        doc = {
            "metadata": self.metadata,
            "moments": [
                {
                    "r": m.r,
                    "empirical": m.empirical,
                    "analytic": m.analytic,
                    "se": m.se,
                    "z": m.z,
                }
                for m in self.moments
            ],
            "verdicts": dict(self.verdicts),
            "passed": self.passed,
        }
        if self.ks is not None:
            doc["ks_distance"] = self.ks
        if self.chi_square is not None:
            doc["chi_square"] = {
                "statistic": self.chi_square.statistic,
                "dof": self.chi_square.dof,
                "pvalue": self.chi_square.pvalue,
                "bins": self.chi_square.bins,
            }
        return doc

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    def write_moments_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "empirical", "analytic", "se", "z"])
            for m in self.moments:
                writer.writerow([m.r, repr(m.empirical), repr(m.analytic), repr(m.se), repr(m.z)])


def build_comparison_report(
    sample,
    analytic_moment: Callable[[int], float],
    r_max: int = 4,
    cdf: Callable | None = None,
    metadata: dict | None = None,
    moment_rtol: float = 0.05,
    ks_threshold: float | None = None,
) -> ComparisonReport:
    """Compare a sample against a reference law.

    Verdicts: each moment within ``moment_rtol`` relative error of its
    analytic value, and, when a CDF and threshold are supplied, the KS
    distance at or below the threshold.
    """
    estimates = empirical_moments(sample, r_max)
    moments = []
    verdicts = {}
    for est in estimates:
        ref = analytic_moment(est.r)
        if est.se > 0:
            z = (est.value - ref) / est.se
        else:
            z = 0.0 if est.value == ref else math.inf
        moments.append(MomentComparison(est.r, est.value, ref, est.se, float(z)))
        verdicts[f"moment_{est.r}"] = abs(est.value - ref) <= moment_rtol * abs(ref)
    ks = None
    if cdf is not None:
        ks = ks_distance(sample, cdf)
        if ks_threshold is not None:
            verdicts["ks"] = ks <= ks_threshold
    return ComparisonReport(metadata or {}, moments, ks, None, verdicts)
