from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maskratio.dataset import (
    DatedSeries,
    InterventionSpec,
    Label,
    LabeledSample,
    apply_scaler,
    build_labeled_dataset,
    daily_from_cumulative,
    death_ratio_delta,
    describe_dataset,
    fit_scaler,
    group_means,
    label_from_delta,
    pearson_correlation,
    round_half_away,
    state_summary,
    window_bounds,
    window_mean,
)
from maskratio.errors import (
    ConstantInput,
    EmptyFit,
    EmptySamples,
    MissingLabel,
    TooShort,
    WindowOutOfRange,
    ZeroBaseline,
)
from maskratio.ingest import CountyCovariates, CountyRecord, CountySeries

ANCHOR = date(2020, 6, 18)
SPEC = InterventionSpec({"CA": ANCHOR, "OR": date(2020, 6, 19), "WA": date(2020, 6, 26)}, 30)


def record(fips, daily_cases, daily_deaths, start=date(2020, 5, 1), state="CA", population=1000):
    """County whose daily series (dated from ``start``) are the given arrays."""
    cum_c = np.r_[0, np.cumsum(daily_cases)]
    cum_d = np.r_[0, np.cumsum(daily_deaths)]
    dates = tuple(start - timedelta(days=1) + timedelta(days=i) for i in range(len(cum_c)))
    series = CountySeries(fips, "x", state, dates, tuple(int(v) for v in cum_c), tuple(int(v) for v in cum_d))
    cov = CountyCovariates(fips, population, 50000.0, 0.9, 0.1, 0.1, 0.1, 0.2, 0.5)
    return CountyRecord(series, cov)


def windowed(before_cases, before_deaths, after_cases, after_deaths, **kw):
    """Daily arrays dated from 2020-05-19 with constant values in each CA window."""
    c = np.r_[np.full(30, before_cases), np.full(30, after_cases)]
    d = np.r_[np.full(30, before_deaths), np.full(30, after_deaths)]
    return record(kw.pop("fips", "06001"), c, d, start=date(2020, 5, 19), **kw)


def test_daily_examples():
    out = daily_from_cumulative([0, 1, 3, 3, 2])
    assert out.values.tolist() == [1, 2, 0, 0] and out.anomalies == 1
    out = daily_from_cumulative([5, 5, 5])
    assert out.values.tolist() == [0, 0] and out.anomalies == 0
    with pytest.raises(TooShort):
        daily_from_cumulative([0])


@given(st.lists(st.integers(0, 10**6), min_size=2, max_size=40))
def test_daily_reconstructs_monotone_series(steps):
    cum = np.cumsum(steps)
    d = daily_from_cumulative(cum)
    assert d.anomalies == 0
    assert np.array_equal(np.r_[cum[0], cum[0] + np.cumsum(d.values)], cum)


def test_window_examples():
    daily = DatedSeries(date(2020, 4, 1), np.full(120, 4))
    assert window_mean(daily, ANCHOR, "before", 30) == 4.0
    assert window_mean(daily, ANCHOR, "after", 30) == 4.0
    assert window_bounds(ANCHOR, "before", 30) == (date(2020, 5, 19), date(2020, 6, 17))
    assert window_bounds(ANCHOR, "after", 30) == (ANCHOR, date(2020, 7, 17))
    with pytest.raises(WindowOutOfRange, match="2020-05-19"):
        window_mean(DatedSeries(date(2020, 6, 1), np.ones(60)), ANCHOR, "before", 30)


@given(st.integers(1, 90), st.dates(date(2020, 1, 1), date(2021, 1, 1)))
def test_windows_disjoint_and_adjacent(w, anchor):
    b0, b1 = window_bounds(anchor, "before", w)
    a0, a1 = window_bounds(anchor, "after", w)
    assert b1 < a0 and (a0 - b1).days == 1
    assert (a1 - b0).days + 1 == 2 * w


def test_ratio_delta_examples():
    rd = death_ratio_delta(windowed(100, 2, 100, 1), SPEC)
    assert (rd.before, rd.after, rd.delta) == (2.0, 1.0, -1.0)
    assert death_ratio_delta(windowed(0, 0, 0, 0), SPEC).delta == 0.0


def test_order_date_in_after_window():
    c = np.full(60, 10)
    d = np.zeros(60, dtype=int)
    d[30] = 30  # 2020-06-18 only
    rd = death_ratio_delta(record("06001", c, d, start=date(2020, 5, 19)), SPEC)
    assert rd.before == 0.0 and rd.after == pytest.approx(10.0)


def test_labels():
    assert label_from_delta(-0.44) is Label.DECREASE
    assert label_from_delta(0.0) is Label.NO_CHANGE
    assert label_from_delta(7.69) is Label.INCREASE


def test_build_dataset_counts_and_drops_nochange():
    recs = [
        windowed(100, 2, 100, 1, fips="06003"),
        windowed(100, 1, 100, 2, fips="06001"),
        windowed(0, 0, 0, 0, fips="06002"),
    ]
    samples, counts = build_labeled_dataset(recs, SPEC)
    assert [s.fips for s in samples] == ["06001", "06003"]
    assert counts == {Label.DECREASE: 1, Label.INCREASE: 1, Label.NO_CHANGE: 1}
    samples, counts = build_labeled_dataset([windowed(0, 0, 0, 0, fips=f"0600{i}") for i in range(1, 4)], SPEC)
    assert samples == [] and counts[Label.NO_CHANGE] == 3


def _sample(features, delta, fips="06001", state="CA"):
    return LabeledSample(fips, state, tuple(features), delta, label_from_delta(delta))


def test_sample_label_must_match_sign():
    with pytest.raises(Exception):
        LabeledSample("06001", "CA", (1.0,) * 8, -1.0, Label.INCREASE)


def test_scaler_examples():
    X = np.array([[10.0, 7.0], [20.0, 7.0], [30.0, 7.0]])
    p = fit_scaler(X, np.array([-2.0, 1.0, 0.5]))
    Xs, drs = apply_scaler(p, X, np.array([-2.0, 1.0, 0.5]))
    assert Xs[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert Xs[:, 1].tolist() == [0.0, 0.0, 0.0] and p.degenerate.tolist() == [False, True]
    assert drs.tolist() == [-1.0, 0.5, 0.25]
    Xt, _ = apply_scaler(p, np.array([[40.0, 9.0]]))
    assert Xt[0, 0] == 1.5
    with pytest.raises(EmptyFit):
        fit_scaler(np.empty((0, 2)))


@given(
    arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)), elements=st.floats(-1e6, 1e6)),
    st.data(),
)
@settings(max_examples=60, deadline=None)
def test_scaler_range_and_order(X, data):
    dr = data.draw(arrays(np.float64, X.shape[0], elements=st.floats(-50, 50)))
    Xs, drs = apply_scaler(fit_scaler(X, dr), X, dr)
    assert np.all((Xs >= 0) & (Xs <= 1))
    assert np.all((drs >= -1) & (drs <= 1))
    assert np.array_equal(np.sign(drs), np.sign(dr))  # labels derive from the sign
    for j in range(X.shape[1]):
        x, xs = X[:, j], Xs[:, j]
        # monotone map: order never reverses; argsort identical unless rounding merged values
        assert not np.any((np.subtract.outer(x, x) > 0) & (np.subtract.outer(xs, xs) < 0))
        if np.unique(xs).size == np.unique(x).size:
            assert np.array_equal(np.argsort(xs, kind="stable"), np.argsort(x, kind="stable"))


def test_pearson_examples():
    assert pearson_correlation([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert pearson_correlation([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)
    # hand value: 3 / sqrt(2 * (14/3))
    assert pearson_correlation([1, 2, 3], [1, 2, 4]) == pytest.approx(0.9819805060619657, abs=1e-12)
    with pytest.raises(ConstantInput):
        pearson_correlation([1, 1, 1], [1, 2, 3])


vec = arrays(np.float64, st.integers(3, 15), elements=st.floats(-100, 100))


@given(vec, st.data(), st.floats(0.1, 10), st.floats(-10, 10))
@settings(max_examples=60, deadline=None)
def test_pearson_properties(x, data, a, b):
    y = data.draw(arrays(np.float64, x.size, elements=st.floats(-100, 100)))
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    r = pearson_correlation(x, y)
    assert -1 <= r <= 1
    assert pearson_correlation(y, x) == pytest.approx(r, abs=1e-9)
    assert pearson_correlation(a * x + b, y) == pytest.approx(r, abs=1e-7)
    assert pearson_correlation(-x, y) == pytest.approx(-r, abs=1e-9)


def test_state_summary_sums_counties():
    recs = [windowed(100, 2, 200, 2, fips="06001"), windowed(100, 2, 0, 0, fips="06003")]
    (row,) = state_summary(recs, SPEC)
    # statewide: before 4/200 = 2 %, after 2/200 = 1 %
    assert (row.ratio_before, row.ratio_after, row.pct_change) == (2.0, 1.0, -50.0)
    assert row.cases_change == 0.0 and row.deaths_change == -2.0
    assert row.county_ratio_sum_before == 4.0 and row.county_ratio_sum_after == 1.0
    same = windowed(100, 3, 100, 3)
    assert state_summary([same], SPEC)[0].pct_change_rounded == 0
    with pytest.raises(ZeroBaseline):
        state_summary([windowed(100, 0, 100, 1)], SPEC)


def test_round_half_away():
    assert [round_half_away(v) for v in (2.5, -2.5, 0.4, -47.6)] == [3, -3, 0, -48]


def test_describe():
    samples = [_sample([i, 2, 0.5, 0.1, 0.1, 0.1, 0.2, 0.5], d, fips=f"0600{i}") for i, d in ((1, -1.0), (2, 2.0), (3, 5.0), (4, -4.0))]
    desc = describe_dataset(samples)
    assert desc.value("count", "dr_delta") == 4
    assert desc.value("mean", "dr_delta") == 0.5
    assert desc.value("std", "dr_delta") == pytest.approx(np.std([-1, 2, 5, -4], ddof=1))
    assert desc.value("25%", "population") == 1.75  # linear interpolation
    assert desc.value("std", "median_income") == 0.0 and desc.value("75%", "median_income") == 2.0
    one = describe_dataset(samples[:1])
    assert one.value("std", "dr_delta") == 0.0 and not one.std_defined
    with pytest.raises(EmptySamples):
        describe_dataset([])


@given(st.lists(st.floats(-20, 20).filter(lambda v: v != 0), min_size=1, max_size=30))
def test_describe_quantiles_monotone(deltas):
    samples = [_sample([1, 1, 0.5, 0.1, 0.1, 0.1, 0.2, 0.5], d, fips=f"{i:05d}") for i, d in enumerate(deltas)]
    desc = describe_dataset(samples)
    qs = [desc.value(s, "dr_delta") for s in ("min", "25%", "50%", "75%", "max")]
    assert qs == sorted(qs)


def test_group_means():
    a = _sample([1, 2, 0.5, 0.1, 0.1, 0.1, 0.2, 0.5], -1.0, "06001", "CA")
    b = _sample([3, 4, 0.7, 0.2, 0.1, 0.1, 0.1, 0.5], 1.0, "41001", "OR")
    gm = group_means([a, b])
    assert tuple(gm[Label.DECREASE].values()) == a.features
    assert tuple(gm[Label.INCREASE].values()) == b.features
    assert set(group_means([a, b], by_state=True)) == {("CA", Label.DECREASE), ("OR", Label.INCREASE)}
    with pytest.raises(MissingLabel):
        group_means([a])
