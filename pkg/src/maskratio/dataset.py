"""Death-ratio windows, labels, scaling and descriptive summaries.

The death ratio of a window is ``100 * mean daily deaths / mean daily cases``
(0 when there are no cases). A county's ``dr_delta`` is the after-window
ratio minus the before-window ratio, in percentage points.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConstantInput,
    DataError,
    EmptyFit,
    EmptySamples,
    MissingLabel,
    TooShort,
    WindowOutOfRange,
    ZeroBaseline,
)

FEATURES = (
    "population",
    "median_income",
    "education_level",
    "mask_never",
    "mask_rarely",
    "mask_sometimes",
    "mask_frequently",
    "mask_always",
)

DEFAULT_ORDER_DATES = {
    "CA": date(2020, 6, 18),
    "OR": date(2020, 6, 19),
    "WA": date(2020, 6, 26),
}
DEFAULT_WINDOW_DAYS = 30


class Label(str, enum.Enum):
    DECREASE = "Decrease"
    INCREASE = "Increase"
    NO_CHANGE = "NoChange"


# Increase is the positive class for every learner and for ROC/AUC.
POSITIVE = Label.INCREASE


@dataclass(frozen=True)
class InterventionSpec:
    order_dates: dict = field(default_factory=lambda: dict(DEFAULT_ORDER_DATES))
    window_days: int = DEFAULT_WINDOW_DAYS

    def __post_init__(self):
        if int(self.window_days) < 1:
            raise DataError(f"window_days must be >= 1, got {self.window_days}")

    def anchor(self, state):
        try:
            return self.order_dates[state]
        except KeyError:
            raise DataError(f"no order date configured for state {state!r}") from None


class Daily(NamedTuple):
    values: np.ndarray
    anomalies: int


class DatedSeries(NamedTuple):
    """Daily values; ``values[i]`` belongs to ``start + i days``."""

    start: date
    values: np.ndarray

    def date_at(self, i):
        return self.start + timedelta(days=i)


class RatioDelta(NamedTuple):
    before: float
    after: float
    delta: float


@dataclass(frozen=True)
class LabeledSample:
    fips: str
    state: str
    features: tuple
    dr_delta: float
    label: Label

    def __post_init__(self):
        if len(self.features) != len(FEATURES):
            raise DataError(f"{self.fips}: expected {len(FEATURES)} features")
        if not math.isfinite(self.dr_delta):
            raise DataError(f"{self.fips}: dr_delta not finite")
        if self.label is not label_from_delta(self.dr_delta) or self.label is Label.NO_CHANGE:
            raise DataError(f"{self.fips}: label {self.label} inconsistent with {self.dr_delta}")


@dataclass(frozen=True)
class ScalerParams:
    feature_min: np.ndarray
    feature_max: np.ndarray
    output_max_abs: float
    degenerate: np.ndarray


def daily_from_cumulative(cumulative):
    """First differences of a cumulative series, negatives clipped to 0.

    Returns ``Daily(values, anomalies)`` where ``anomalies`` counts the
    clipped entries.
    """
    cum = np.asarray(cumulative, dtype=np.int64)
    if cum.ndim != 1 or cum.size < 2:
        raise TooShort("need at least two cumulative values")
    diff = np.diff(cum)
    neg = diff < 0
    return Daily(np.where(neg, 0, diff), int(neg.sum()))


def window_bounds(anchor, side, window_days):
    """Inclusive first and last date of a window."""
    if side == "before":
        return anchor - timedelta(days=window_days), anchor - timedelta(days=1)
    if side == "after":
        return anchor, anchor + timedelta(days=window_days - 1)
    raise ValueError(f"side must be 'before' or 'after', got {side!r}")


def window_mean(daily, anchor, side, window_days=DEFAULT_WINDOW_DAYS):
    first, last = window_bounds(anchor, side, window_days)
    lo = (first - daily.start).days
    hi = (last - daily.start).days
    n = len(daily.values)
    if lo < 0 or hi >= n:
        have_first = daily.start
        have_last = daily.date_at(n - 1)
        gaps = []
        if lo < 0:
            gaps.append(f"{first.isoformat()}..{min(last, have_first - timedelta(days=1)).isoformat()}")
        if hi >= n:
            gaps.append(f"{max(first, have_last + timedelta(days=1)).isoformat()}..{last.isoformat()}")
        raise WindowOutOfRange(
            f"{side} window {first.isoformat()}..{last.isoformat()} needs missing dates "
            + ", ".join(gaps)
        )
    return float(np.mean(daily.values[lo : hi + 1], dtype=np.float64))


def death_ratio(mean_deaths, mean_cases):
    if mean_cases == 0:
        return 0.0
    return 100.0 * mean_deaths / mean_cases


def daily_series(series):
    """Daily case and death series of a CountySeries."""
    start = series.dates[0] + timedelta(days=1)
    cases = daily_from_cumulative(series.cumulative_cases)
    deaths = daily_from_cumulative(series.cumulative_deaths)
    return DatedSeries(start, cases.values), DatedSeries(start, deaths.values)


def window_means(record, intervention):
    """(cases_before, deaths_before, cases_after, deaths_after) daily means."""
    anchor = intervention.anchor(record.state)
    cases, deaths = daily_series(record.series)
    w = intervention.window_days
    return (
        window_mean(cases, anchor, "before", w),
        window_mean(deaths, anchor, "before", w),
        window_mean(cases, anchor, "after", w),
        window_mean(deaths, anchor, "after", w),
    )


def death_ratio_delta(record, intervention):
    cb, db, ca, da = window_means(record, intervention)
    before = death_ratio(db, cb)
    after = death_ratio(da, ca)
    return RatioDelta(before, after, after - before)


def label_from_delta(dr_delta):
    if dr_delta < 0:
        return Label.DECREASE
    if dr_delta > 0:
        return Label.INCREASE
    return Label.NO_CHANGE


def features_of(covariates):
    return tuple(float(getattr(covariates, name)) for name in FEATURES)


def county_deltas(records, intervention):
    """``[(record, RatioDelta)]`` for every record, in input order."""
    return [(r, death_ratio_delta(r, intervention)) for r in records]


def build_labeled_dataset(records, intervention):
    """Label every county and drop the NoChange ones.

    Returns ``(samples, class_counts)``; ``class_counts`` still counts the
    dropped NoChange counties.
    """
    counts = {label: 0 for label in Label}
    samples = []
    for record, rd in county_deltas(records, intervention):
        label = label_from_delta(rd.delta)
        counts[label] += 1
        if label is Label.NO_CHANGE:
            continue
        samples.append(
            LabeledSample(record.fips, record.state, features_of(record.covariates), rd.delta, label)
        )
    samples.sort(key=lambda s: s.fips)
    return samples, counts


def samples_to_arrays(samples):
    """``(X, dr_delta, y)`` with y = 1 for Increase."""
    if not samples:
        return np.empty((0, len(FEATURES))), np.empty(0), np.empty(0, dtype=np.int64)
    X = np.array([s.features for s in samples], dtype=np.float64)
    dr = np.array([s.dr_delta for s in samples], dtype=np.float64)
    y = np.array([1 if s.label is POSITIVE else 0 for s in samples], dtype=np.int64)
    return X, dr, y


def _features(data):
    if isinstance(data, np.ndarray):
        return data, None
    X, dr, _ = samples_to_arrays(list(data))
    return X, dr


def fit_scaler(X, dr_delta=None):
    """Min-max parameters for the features, max-abs for the output.

    ``X`` may be a feature matrix or a sequence of LabeledSample.
    """
    X, dr_from_samples = _features(X)
    if dr_delta is None:
        dr_delta = dr_from_samples
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyFit("cannot fit a scaler on an empty set")
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    out = 0.0
    if dr_delta is not None and len(dr_delta):
        out = float(np.max(np.abs(dr_delta)))
    return ScalerParams(lo, hi, out, hi == lo)


def apply_scaler(params, X, dr_delta=None):
    """Scale features (no clamping) and, if given, the output.

    Returns ``(X_scaled, dr_scaled)``; ``dr_scaled`` is None when no output
    was passed.
    """
    X, dr_from_samples = _features(X)
    if dr_delta is None:
        dr_delta = dr_from_samples
    X = np.asarray(X, dtype=np.float64)
    span = params.feature_max - params.feature_min
    safe = np.where(params.degenerate, 1.0, span)
    Xs = np.where(params.degenerate, 0.0, (X - params.feature_min) / safe)
    drs = None
    if dr_delta is not None:
        dr = np.asarray(dr_delta, dtype=np.float64)
        drs = dr / params.output_max_abs if params.output_max_abs > 0 else np.zeros_like(dr)
    return Xs, drs


def pearson_correlation(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("pearson_correlation needs two 1-D sequences of equal length")
    if x.size < 2:
        raise DataError("pearson_correlation needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        raise ConstantInput("correlation undefined for a constant input")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def feature_correlations(samples):
    """Pearson r between each feature and dr_delta; None for constant features."""
    X, dr, _ = samples_to_arrays(samples)
    out = {}
    for j, name in enumerate(FEATURES):
        try:
            out[name] = pearson_correlation(X[:, j], dr)
        except ConstantInput:
            out[name] = None
    return out


@dataclass(frozen=True)
class StateSummary:
    state: str
    n_counties: int
    ratio_before: float
    ratio_after: float
    pct_change: float
    cases_change: float
    deaths_change: float
    county_ratio_sum_before: float
    county_ratio_sum_after: float

    @property
    def pct_change_rounded(self):
        return round_half_away(self.pct_change)


def round_half_away(x):
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def state_summary(records, intervention):
    """Statewide death ratios from county series summed per state.

    Also carries the sum of county-level ratios per window, an alternative
    aggregate kept for comparison.
    """
    by_state = {}
    for r in records:
        by_state.setdefault(r.state, []).append(r)
    rows = []
    for state in sorted(by_state):
        group = by_state[state]
        cb = db = ca = da = 0.0
        sum_before = sum_after = 0.0
        for r in group:
            m = window_means(r, intervention)
            cb += m[0]
            db += m[1]
            ca += m[2]
            da += m[3]
            sum_before += death_ratio(m[1], m[0])
            sum_after += death_ratio(m[3], m[2])
        before = death_ratio(db, cb)
        after = death_ratio(da, ca)
        if before == 0:
            raise ZeroBaseline(f"{state}: death ratio before the order is 0")
        rows.append(
            StateSummary(
                state=state,
                n_counties=len(group),
                ratio_before=before,
                ratio_after=after,
                pct_change=100.0 * (after - before) / before,
                cases_change=ca - cb,
                deaths_change=da - db,
                county_ratio_sum_before=sum_before,
                county_ratio_sum_after=sum_after,
            )
        )
    return rows


DESCRIBE_STATS = ("count", "mean", "std", "min", "25%", "50%", "75%", "max")
DESCRIBE_COLUMNS = FEATURES + ("dr_delta",)


@dataclass(frozen=True)
class Description:
    columns: tuple
    stats: dict  # stat name -> array over columns
    std_defined: bool

    def value(self, stat, column):
        return float(self.stats[stat][self.columns.index(column)])


def describe_dataset(samples: Sequence[LabeledSample]):
    """Count, mean, sample std (n-1), min, quartiles and max per column.

    Quartiles interpolate linearly between closest ranks. With a single
    sample the std is reported as 0 and ``std_defined`` is False.
    """
    if not samples:
        raise EmptySamples("cannot describe an empty dataset")
    X, dr, _ = samples_to_arrays(list(samples))
    data = np.column_stack([X, dr])
    n = data.shape[0]
    std_defined = n > 1
    stats = {
        "count": np.full(data.shape[1], float(n)),
        "mean": data.mean(axis=0),
        "std": data.std(axis=0, ddof=1) if std_defined else np.zeros(data.shape[1]),
        "min": data.min(axis=0),
        "25%": np.percentile(data, 25, axis=0),
        "50%": np.percentile(data, 50, axis=0),
        "75%": np.percentile(data, 75, axis=0),
        "max": data.max(axis=0),
    }
    return Description(DESCRIBE_COLUMNS, stats, std_defined)


def group_means(samples, by_state=False):
    """Per-label feature means: ``{label: {feature: mean}}``.

    With ``by_state`` the keys are ``(state, label)`` pairs; state/label
    combinations without samples are omitted.
    """
    present = {s.label for s in samples}
    missing = [lab for lab in (Label.DECREASE, Label.INCREASE) if lab not in present]
    if missing:
        raise MissingLabel(f"no samples labelled {', '.join(m.value for m in missing)}")
    groups = {}
    for s in samples:
        key = (s.state, s.label) if by_state else s.label
        groups.setdefault(key, []).append(s.features)
    order = {Label.DECREASE: 0, Label.INCREASE: 1}
    keys = sorted(groups, key=lambda k: (k[0], order[k[1]]) if by_state else order[k])
    out = {}
    for key in keys:
        means = np.mean(np.asarray(groups[key], dtype=np.float64), axis=0)
        out[key] = dict(zip(FEATURES, (float(v) for v in means)))
    return out
