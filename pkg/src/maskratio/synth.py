"""Synthetic counties with known labels, used as an end-to-end oracle.

Each county gets constant daily cases inside each window and an integer
death total per window, chosen so that the sign of the windowed death-ratio
change is fixed by integer comparison. Covariates are shifted along the
requested association signs; with ``noise_scale = 0`` the two classes are
separated by a margin in every feature with a nonzero sign.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np

from .dataset import DEFAULT_ORDER_DATES, DEFAULT_WINDOW_DAYS, FEATURES, InterventionSpec, Label
from .errors import ConfigError
from .ingest import (
    STATE_FIPS,
    CensusRow,
    CountyCovariates,
    CountyRecord,
    CountySeries,
    MaskRow,
    format_census_covariates,
    format_county_timeseries,
    format_mask_survey,
)

# positive: the feature tends to be higher in Increase counties
DEFAULT_EFFECTS = {
    "population": 1,
    "median_income": -1,
    "education_level": -1,
    "mask_never": 1,
    "mask_rarely": 1,
    "mask_sometimes": 0,
    "mask_frequently": -1,
    "mask_always": -1,
}

_MASK_BASE = np.array([0.03, 0.04, 0.07, 0.18, 0.68])
_MARGIN = 0.5  # |latent| >= this for an associated feature at zero noise
_PAD_DAYS = 5


@dataclass(frozen=True)
class SynthSpec:
    n_counties: int = 200
    effect_direction: dict = field(default_factory=lambda: dict(DEFAULT_EFFECTS))
    class_balance: float = 0.5
    noise_scale: float = 0.0
    seed: int = 0
    states: tuple = ("CA", "OR", "WA")
    window_days: int = DEFAULT_WINDOW_DAYS

    def __post_init__(self):
        if int(self.n_counties) < 4:
            raise ConfigError(f"n_counties must be >= 4, got {self.n_counties}")
        if not 0.0 < self.class_balance < 1.0:
            raise ConfigError(f"class_balance must lie in (0, 1), got {self.class_balance}")
        if not (self.noise_scale >= 0 and math.isfinite(self.noise_scale)):
            raise ConfigError(f"noise_scale must be a nonnegative real, got {self.noise_scale}")
        bad = {k: v for k, v in self.effect_direction.items() if k not in FEATURES or v not in (-1, 0, 1)}
        if bad:
            raise ConfigError(f"effect_direction entries must map feature names to -1/0/1: {bad}")
        unknown = [s for s in self.states if s not in STATE_FIPS or s not in DEFAULT_ORDER_DATES]
        if unknown or not self.states:
            raise ConfigError(f"unsupported states {unknown}")
        if self.window_days < 1:
            raise ConfigError("window_days must be >= 1")

    @property
    def intervention(self):
        return InterventionSpec({s: DEFAULT_ORDER_DATES[s] for s in self.states}, self.window_days)

    def signs(self):
        return np.array([self.effect_direction.get(f, 0) for f in FEATURES], dtype=float)


def _label_vector(spec):
    n_pos = int(round(spec.class_balance * spec.n_counties))
    n_pos = min(max(n_pos, 1), spec.n_counties - 1)
    y = np.r_[np.ones(n_pos, dtype=np.int64), np.zeros(spec.n_counties - n_pos, dtype=np.int64)]
    return np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(2**31,))).permutation(y)


def _fips_codes(spec):
    out = []
    per_state = {}
    for i in range(spec.n_counties):
        state = spec.states[i % len(spec.states)]
        k = per_state.get(state, 0)
        per_state[state] = k + 1
        if k >= 500:
            raise ConfigError("at most 500 synthetic counties per state")
        out.append((state, STATE_FIPS[state] + f"{2 * k + 1:03d}"))
    return out


def _covariates(fips, latent):
    pop_u, inc_u, edu_u = latent[:3]
    population = max(1, int(round(math.exp(math.log(2.0e5) + 1.5 * pop_u))))
    income = max(1000.0, 65000.0 + 15000.0 * inc_u)
    education = min(1.0, max(0.0, 0.85 + 0.05 * edu_u))
    w = _MASK_BASE * np.exp(0.5 * latent[3:])
    w = w / w.sum()
    return CountyCovariates(fips, population, income, education, *(float(v) for v in w))


def _window_deaths(rng, increase, cases_before, cases_after, days):
    """Integer death totals whose per-window ratio order matches the label."""
    d_before = max(1, int(round(rng.uniform(0.01, 0.04) * cases_before * days)))
    factor = rng.uniform(1.25, 2.5) if increase else rng.uniform(0.3, 0.8)
    d_after = max(0, int(round(d_before * factor * cases_after / cases_before)))
    # ratio_after > ratio_before  <=>  d_after * cases_before > d_before * cases_after
    if increase:
        while d_after * cases_before <= d_before * cases_after:
            d_after += 1
    else:
        while d_after > 0 and d_after * cases_before >= d_before * cases_after:
            d_after -= 1
    return d_before, d_after


def _spread(rng, total, days):
    base = np.full(days, total // days, dtype=np.int64)
    base[rng.permutation(days)[: total % days]] += 1
    return base


def _county(spec, i, state, fips, increase, start, n_days):
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(i,)))
    z = 1.0 if increase else -1.0
    signs = spec.signs()
    magnitude = _MARGIN + (1.0 - _MARGIN) * rng.uniform(size=len(FEATURES))
    free = rng.uniform(-1.0, 1.0, size=len(FEATURES))
    latent = np.where(signs != 0, signs * z * magnitude, free)
    latent = latent + spec.noise_scale * rng.standard_normal(len(FEATURES))
    covariates = _covariates(fips, latent)

    W = spec.window_days
    anchor = spec.intervention.anchor(state)
    a = (anchor - start).days  # index of the anchor day in the daily axis
    cases = rng.integers(20, 200, size=n_days)
    deaths = rng.integers(0, 5, size=n_days)
    c_before, c_after = int(rng.integers(20, 200)), int(rng.integers(20, 200))
    d_before, d_after = _window_deaths(rng, increase, c_before, c_after, W)
    cases[a - W : a] = c_before
    cases[a : a + W] = c_after
    deaths[a - W : a] = _spread(rng, d_before, W)
    deaths[a : a + W] = _spread(rng, d_after, W)

    cum_cases = np.r_[int(rng.integers(100, 1000)), cases].cumsum()
    cum_deaths = np.r_[int(rng.integers(0, 20)), deaths].cumsum()
    dates = tuple(start - timedelta(days=1) + timedelta(days=k) for k in range(n_days + 1))
    series = CountySeries(
        fips=fips,
        county_name=f"Synthetic County {i + 1:03d}",
        state=state,
        dates=dates,
        cumulative_cases=tuple(int(v) for v in cum_cases),
        cumulative_deaths=tuple(int(v) for v in cum_deaths),
    )
    return CountyRecord(series, covariates)


def generate_synthetic_dataset(spec):
    """Return ``(records, true_labels)``; ``true_labels`` maps fips to Label.

    Counties are generated independently from per-county seeds, so the
    output does not depend on generation order.
    """
    W = spec.window_days
    anchors = [DEFAULT_ORDER_DATES[s] for s in spec.states]
    start = min(anchors) - timedelta(days=W + _PAD_DAYS)
    n_days = (max(anchors) - start).days + W + _PAD_DAYS
    y = _label_vector(spec)
    records = []
    labels = {}
    for i, (state, fips) in enumerate(_fips_codes(spec)):
        rec = _county(spec, i, state, fips, bool(y[i]), start, n_days)
        records.append(rec)
        labels[fips] = Label.INCREASE if y[i] else Label.DECREASE
    records.sort(key=lambda r: r.fips)
    return records, labels


SYNTH_FILES = {
    "cases": "cases.csv",
    "deaths": "deaths.csv",
    "census": "census.csv",
    "mask": "mask.csv",
}


def write_synthetic_files(records, directory, spec=None):
    """Write the four input CSVs plus a ``config.toml`` pointing at them."""
    os.makedirs(directory, exist_ok=True)
    series = [r.series for r in records]
    census = {
        r.fips: CensusRow(r.covariates.population, r.covariates.median_income, r.covariates.education_level)
        for r in records
    }
    mask = {
        r.fips: MaskRow(
            r.covariates.mask_never,
            r.covariates.mask_rarely,
            r.covariates.mask_sometimes,
            r.covariates.mask_frequently,
            r.covariates.mask_always,
        )
        for r in records
    }
    texts = {
        "cases": format_county_timeseries(series, "cases"),
        "deaths": format_county_timeseries(series, "deaths"),
        "census": format_census_covariates(census),
        "mask": format_mask_survey(mask),
    }
    paths = {}
    for key, name in SYNTH_FILES.items():
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(texts[key])
        paths[key] = path
    states = spec.states if spec else tuple(sorted({r.state for r in records}))
    window = spec.window_days if spec else DEFAULT_WINDOW_DAYS
    lines = ["[inputs]"]
    lines += [f'{key} = "{name}"' for key, name in SYNTH_FILES.items()]
    lines += ["", "[study]", "states = [" + ", ".join(f'"{s}"' for s in states) + "]"]
    lines += [f"window_days = {window}", ""]
    config_path = os.path.join(directory, "config.toml")
    with open(config_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
    paths["config"] = config_path
    return paths
