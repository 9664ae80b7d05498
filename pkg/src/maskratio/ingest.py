"""Parse the three source CSV families and join them on county FIPS.

Sources:

* epidemic time series (one file for cumulative cases, one for deaths),
  header ``countyFIPS,County Name,State,StateFIPS,<date>,...``;
* census covariates, header ``fips,population,median_income,hs_completion``;
* mask-usage survey, header ``COUNTYFP,NEVER,RARELY,SOMETIMES,FREQUENTLY,ALWAYS``.

FIPS codes are kept as zero-padded 5-character strings throughout.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta

from .errors import (
    BadFractionSum,
    BadValue,
    DataError,
    DuplicateFips,
    EmptyJoin,
    MalformedHeader,
    NonMonotonicDates,
)

SERIES_PREFIX = ["countyFIPS", "County Name", "State", "StateFIPS"]
CENSUS_HEADER = ["fips", "population", "median_income", "hs_completion"]
MASK_HEADER = ["COUNTYFP", "NEVER", "RARELY", "SOMETIMES", "FREQUENTLY", "ALWAYS"]
MASK_FIELDS = ("mask_never", "mask_rarely", "mask_sometimes", "mask_frequently", "mask_always")
MASK_SUM_TOLERANCE = 0.02

STATE_FIPS = {
    "AL": "01", "AK": "02", "AZ": "04", "AR": "05", "CA": "06", "CO": "08", "CT": "09",
    "DE": "10", "DC": "11", "FL": "12", "GA": "13", "HI": "15", "ID": "16", "IL": "17",
    "IN": "18", "IA": "19", "KS": "20", "KY": "21", "LA": "22", "ME": "23", "MD": "24",
    "MA": "25", "MI": "26", "MN": "27", "MS": "28", "MO": "29", "MT": "30", "NE": "31",
    "NV": "32", "NH": "33", "NJ": "34", "NM": "35", "NY": "36", "NC": "37", "ND": "38",
    "OH": "39", "OK": "40", "OR": "41", "PA": "42", "RI": "44", "SC": "45", "SD": "46",
    "TN": "47", "TX": "48", "UT": "49", "VT": "50", "VA": "51", "WA": "53", "WV": "54",
    "WI": "55", "WY": "56", "PR": "72",
}
FIPS_STATE = {v: k for k, v in STATE_FIPS.items()}


@dataclass(frozen=True)
class PartialSeries:
    """One county row of a cases or deaths file."""

    fips: str
    county_name: str
    state: str
    dates: tuple[date, ...]
    values: tuple[int, ...]
    kind: str


@dataclass(frozen=True)
class CountySeries:
    fips: str
    county_name: str
    state: str
    dates: tuple[date, ...]
    cumulative_cases: tuple[int, ...]
    cumulative_deaths: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.dates) == len(self.cumulative_cases) == len(self.cumulative_deaths)):
            raise DataError(f"{self.fips}: series lengths differ")
        _check_dates(self.dates)


@dataclass(frozen=True)
class CensusRow:
    population: int
    median_income: float
    education_level: float


@dataclass(frozen=True)
class MaskRow:
    never: float
    rarely: float
    sometimes: float
    frequently: float
    always: float

    def as_tuple(self):
        return (self.never, self.rarely, self.sometimes, self.frequently, self.always)


@dataclass(frozen=True)
class CountyCovariates:
    fips: str
    population: int
    median_income: float
    education_level: float
    mask_never: float
    mask_rarely: float
    mask_sometimes: float
    mask_frequently: float
    mask_always: float

    def __post_init__(self):
        if self.population < 1:
            raise BadValue(f"{self.fips}: population must be >= 1")
        if not self.median_income > 0:
            raise BadValue(f"{self.fips}: median income must be > 0")
        if not 0.0 <= self.education_level <= 1.0:
            raise BadValue(f"{self.fips}: education level outside [0, 1]")


@dataclass(frozen=True)
class CountyRecord:
    series: CountySeries
    covariates: CountyCovariates

    def __post_init__(self):
        if self.series.fips != self.covariates.fips:
            raise DataError(f"record fips mismatch {self.series.fips} != {self.covariates.fips}")

    @property
    def fips(self):
        return self.series.fips

    @property
    def state(self):
        return self.series.state


@dataclass
class JoinResult:
    records: list[CountyRecord]
    missing: dict[str, list[str]] = field(default_factory=dict)


def normalize_fips(raw, row=None, column=None):
    text = str(raw).strip()
    if not text.isdigit() or len(text) > 5:
        raise BadValue(f"bad FIPS code {raw!r}", row=row, column=column)
    return text.zfill(5)


def parse_date(text):
    """Parse an ISO (2020-06-01) or US short (6/1/20, 6/1/2020) date."""
    text = text.strip()
    for fmt in ("%Y-%m-%d", "%m/%d/%y", "%m/%d/%Y"):
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise MalformedHeader(f"unrecognised date column {text!r}")


def _check_dates(dates):
    for prev, cur in zip(dates, dates[1:]):
        if cur <= prev:
            raise NonMonotonicDates(f"date {cur.isoformat()} does not follow {prev.isoformat()}")
        if cur - prev > timedelta(days=1):
            raise NonMonotonicDates(
                f"gap between {prev.isoformat()} and {cur.isoformat()} (missing days)"
            )


def _reader(text):
    # csv handles both LF and CRLF line endings
    return csv.reader(io.StringIO(text.lstrip("\ufeff"), newline=""))


def _parse_count(cell, row, column):
    try:
        value = int(cell.strip())
    except ValueError:
        raise BadValue(f"non-integer value {cell!r}", row=row, column=column) from None
    if value < 0:
        raise BadValue(f"negative value {cell!r}", row=row, column=column)
    return value


def _parse_float(cell, row, column):
    try:
        value = float(cell.strip())
    except ValueError:
        raise BadValue(f"non-numeric value {cell!r}", row=row, column=column) from None
    if not math.isfinite(value):
        raise BadValue(f"non-finite value {cell!r}", row=row, column=column)
    return value


def parse_county_timeseries(text, value_kind):
    """Parse a cumulative cases or deaths file into :class:`PartialSeries`.

    Rows with FIPS 0 (unallocated counts) are dropped.
    """
    if value_kind not in ("cases", "deaths"):
        raise ValueError(f"value_kind must be 'cases' or 'deaths', got {value_kind!r}")
    rows = _reader(text)
    try:
        header = [h.strip() for h in next(rows)]
    except StopIteration:
        raise MalformedHeader("empty file") from None
    if header[:4] != SERIES_PREFIX or len(header) < 5:
        raise MalformedHeader(f"expected header starting {','.join(SERIES_PREFIX)},<date>...")
    dates = tuple(parse_date(h) for h in header[4:])
    _check_dates(dates)

    out = []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise BadValue(f"expected {len(header)} cells, found {len(row)}", row=lineno)
        fips = normalize_fips(row[0], row=lineno, column="countyFIPS")
        if fips == "00000":
            continue
        values = tuple(
            _parse_count(cell, lineno, header[4 + i]) for i, cell in enumerate(row[4:])
        )
        out.append(
            PartialSeries(
                fips=fips,
                county_name=row[1].strip(),
                state=row[2].strip().upper(),
                dates=dates,
                values=values,
                kind=value_kind,
            )
        )
    return out


def parse_census_covariates(text):
    """Parse census covariates into ``{fips: CensusRow}``.

    ``hs_completion`` above 1 is read as a percentage and divided by 100.
    """
    rows = _reader(text)
    try:
        header = [h.strip() for h in next(rows)]
    except StopIteration:
        raise MalformedHeader("empty file") from None
    if header != CENSUS_HEADER:
        raise MalformedHeader(f"expected header {','.join(CENSUS_HEADER)}")
    out = {}
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise BadValue(f"expected {len(header)} cells, found {len(row)}", row=lineno)
        fips = normalize_fips(row[0], row=lineno, column="fips")
        if fips in out:
            raise DuplicateFips(f"fips {fips} appears twice (row {lineno})")
        population = _parse_count(row[1], lineno, "population")
        if population < 1:
            raise BadValue("population must be >= 1", row=lineno, column="population")
        income = _parse_float(row[2], lineno, "median_income")
        if income <= 0:
            raise BadValue("median income must be > 0", row=lineno, column="median_income")
        hs = _parse_float(row[3], lineno, "hs_completion")
        if hs > 1:
            hs = hs / 100.0
        if not 0.0 <= hs <= 1.0:
            raise BadValue(f"hs_completion {row[3]!r} out of range", row=lineno, column="hs_completion")
        out[fips] = CensusRow(population, income, hs)
    return out


def parse_mask_survey(text):
    """Parse the mask-usage survey into ``{fips: MaskRow}``."""
    rows = _reader(text)
    try:
        header = [h.strip() for h in next(rows)]
    except StopIteration:
        raise MalformedHeader("empty file") from None
    if header != MASK_HEADER:
        raise MalformedHeader(f"expected header {','.join(MASK_HEADER)}")
    out = {}
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise BadValue(f"expected {len(header)} cells, found {len(row)}", row=lineno)
        fips = normalize_fips(row[0], row=lineno, column="COUNTYFP")
        if fips in out:
            raise DuplicateFips(f"fips {fips} appears twice (row {lineno})")
        fracs = []
        for name, cell in zip(header[1:], row[1:]):
            v = _parse_float(cell, lineno, name)
            if not 0.0 <= v <= 1.0:
                raise BadValue(f"fraction {cell!r} outside [0, 1]", row=lineno, column=name)
            fracs.append(v)
        total = math.fsum(fracs)
        if abs(total - 1.0) > MASK_SUM_TOLERANCE:
            raise BadFractionSum(fips, total)
        out[fips] = MaskRow(*fracs)
    return out


def _state_of(fips):
    return FIPS_STATE.get(fips[:2])


def _merge_series(cases, deaths):
    common = sorted(set(cases.dates) & set(deaths.dates))
    if not common:
        raise DataError(f"{cases.fips}: cases and deaths share no dates")
    ci = {d: i for i, d in enumerate(cases.dates)}
    di = {d: i for i, d in enumerate(deaths.dates)}
    return CountySeries(
        fips=cases.fips,
        county_name=cases.county_name,
        state=cases.state,
        dates=tuple(common),
        cumulative_cases=tuple(cases.values[ci[d]] for d in common),
        cumulative_deaths=tuple(deaths.values[di[d]] for d in common),
    )


def join_records(series_cases, series_deaths, census, mask, states):
    """Inner-join the four sources on FIPS, restricted to ``states``.

    Counties seen in any source but absent from another are listed in
    ``JoinResult.missing`` (fips -> missing source names) and excluded.
    """
    states = {s.upper() for s in states}
    prefixes = {STATE_FIPS[s] for s in states if s in STATE_FIPS}

    def in_scope(fips, state=None):
        return (state in states) if state else fips[:2] in prefixes

    cases = {}
    for s in series_cases:
        if in_scope(s.fips, s.state):
            if s.fips in cases:
                raise DuplicateFips(f"fips {s.fips} appears twice in the cases series")
            cases[s.fips] = s
    deaths = {}
    for s in series_deaths:
        if in_scope(s.fips, s.state):
            if s.fips in deaths:
                raise DuplicateFips(f"fips {s.fips} appears twice in the deaths series")
            deaths[s.fips] = s
    census_in = {f: r for f, r in census.items() if in_scope(f)}
    mask_in = {f: r for f, r in mask.items() if in_scope(f)}

    sources = {"cases": cases, "deaths": deaths, "census": census_in, "mask": mask_in}
    universe = set().union(*sources.values())
    records = []
    missing = {}
    for fips in sorted(universe):
        absent = [name for name, src in sources.items() if fips not in src]
        if absent:
            missing[fips] = absent
            continue
        c = census_in[fips]
        m = mask_in[fips]
        cov = CountyCovariates(
            fips=fips,
            population=c.population,
            median_income=c.median_income,
            education_level=c.education_level,
            mask_never=m.never,
            mask_rarely=m.rarely,
            mask_sometimes=m.sometimes,
            mask_frequently=m.frequently,
            mask_always=m.always,
        )
        records.append(CountyRecord(_merge_series(cases[fips], deaths[fips]), cov))
    if not records:
        raise EmptyJoin(f"no county has all four sources for states {sorted(states) or '{}'}")
    return JoinResult(records, missing)


# -- serialisation (inverse of the parsers; used by synth and round-trip tests)

def _fmt(x):
    return repr(float(x))


def format_county_timeseries(series, value_kind):
    """Write series (PartialSeries or CountySeries) in the time-series schema."""
    series = list(series)
    if not series:
        raise DataError("nothing to write")
    dates = series[0].dates
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_PREFIX + [d.isoformat() for d in dates])
    for s in series:
        if s.dates != dates:
            raise DataError("all series must share one date axis")
        if isinstance(s, PartialSeries):
            values = s.values
        else:
            values = s.cumulative_cases if value_kind == "cases" else s.cumulative_deaths
        w.writerow([s.fips, s.county_name, s.state, s.fips[:2]] + [str(v) for v in values])
    return buf.getvalue()


def format_census_covariates(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CENSUS_HEADER)
    for fips in sorted(rows):
        r = rows[fips]
        w.writerow([fips, str(r.population), _fmt(r.median_income), _fmt(r.education_level)])
    return buf.getvalue()


def format_mask_survey(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MASK_HEADER)
    for fips in sorted(rows):
        w.writerow([fips] + [_fmt(v) for v in rows[fips].as_tuple()])
    return buf.getvalue()


def format_missing_report(missing):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fips", "missing_sources"])
    for fips in sorted(missing):
        w.writerow([fips, ";".join(missing[fips])])
    return buf.getvalue()


def load_sources(cases_path, deaths_path, census_path, mask_path):
    """Read and parse the four input files. Errors name the offending path."""
    parsed = []
    for path, parse in (
        (cases_path, lambda t: parse_county_timeseries(t, "cases")),
        (deaths_path, lambda t: parse_county_timeseries(t, "deaths")),
        (census_path, parse_census_covariates),
        (mask_path, parse_mask_survey),
    ):
        try:
            with open(path, encoding="utf-8", newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
        try:
            parsed.append(parse(text))
        except DataError as exc:
            exc.args = (f"{path}: {exc}",)
            raise
    return tuple(parsed)
