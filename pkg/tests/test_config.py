import os

import pytest

from maskratio.config import DEFAULT_SEARCH, Config, config_from_dict, load_config
from maskratio.errors import ConfigError
from maskratio.evaluation import IntUniform, Uniform
from maskratio.config import search_space


def test_defaults_are_explicit():
    d = Config().as_dict()
    ev = d["evaluation"]
    assert (ev["test_fraction"], ev["folds"], ev["z"], ev["threshold"]) == (0.2, 5, 1.96, 0.5)
    assert d["study"]["window_days"] == 30
    assert d["study"]["order_dates"] == {"CA": "2020-06-18", "OR": "2020-06-19", "WA": "2020-06-26"}
    assert set(d["search"]) == set(DEFAULT_SEARCH)


def test_load_resolves_relative_paths(tmp_path):
    (tmp_path / "run.toml").write_text(
        '[inputs]\ncases = "c.csv"\n[study]\nwindow_days = 14\n[evaluation]\nseed = 9\nalgorithms = ["KNN"]\n'
    )
    cfg = load_config(str(tmp_path / "run.toml"))
    assert cfg.cases == os.path.join(str(tmp_path), "c.csv")
    assert (cfg.window_days, cfg.seed, cfg.algorithms) == (14, 9, ("KNN",))
    with pytest.raises(ConfigError, match="deaths"):
        cfg.input_paths()


@pytest.mark.parametrize(
    "raw",
    [
        {"evaluation": {"algorithms": ["Perceptron"]}},
        {"evaluation": {"test_fraction": 1.0}},
        {"evaluation": {"folds": 1}},
        {"study": {"window_days": 0}},
        {"study": {"states": ["CA", "NV"]}},
        {"study": {"order_dates": {"CA": "June 18"}}},
        {"search": {"KNN": {"strategy": "bayes"}}},
        {"search": {"DecisionTree": {"strategy": "grid", "space": {}}}},
        {"search": {"DecisionTree": {"strategy": "grid", "space": {"max_depth": {"int": [1, 3]}}}}},
    ],
)
def test_rejects_bad_config(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[inputs\n")
    with pytest.raises(ConfigError):
        load_config(str(p))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.toml"))


def test_search_space_kinds():
    space = search_space(DEFAULT_SEARCH["GradientBoosting"])
    assert space["max_depth"] == IntUniform(2, 6)
    assert space["gamma"] == Uniform(0.0, 1.0)
    assert search_space(DEFAULT_SEARCH["SvmRbf"]) == {"C": [0.1, 1.0, 10.0]}
