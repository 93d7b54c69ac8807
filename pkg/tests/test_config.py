import pytest
from hypothesis import given, strategies as st

from eqisa.config import CONFIG_ENV, ConfigError, RunConfig, load_config


def test_defaults_follow_the_reference_setup():
    cfg = RunConfig().validate()
    assert (cfg.sk_depth, cfg.sk_recursion, cfg.ensemble_size, cfg.seed) == (5, 4, 200, 0)
    assert cfg.energy_pj_per_bit == 2.46 and cfg.threshold_mode == "mean"


configs = st.builds(
    RunConfig,
    sk_depth=st.integers(0, 8),
    sk_recursion=st.integers(0, 6),
    simplify=st.booleans(),
    ensemble_size=st.integers(1, 10**6),
    seed=st.integers(0, 2**32),
    variant=st.sampled_from(["v0", "v1", "v2", "v3"]),
    threshold_mode=st.sampled_from(["mean", "top-k", "value"]),
    top_k=st.integers(4, 100),
    threshold_value=st.floats(0, 100, allow_nan=False),
    lowering=st.sampled_from(["per-gate", "unitary"]),
    codebook_mode=st.sampled_from(["per-circuit", "trained"]),
    energy_pj_per_bit=st.floats(0, 10, allow_nan=False),
    post_lossless=st.booleans(),
    workers=st.integers(1, 64),
    model_dir=st.sampled_from(["", "models/d5", "/tmp/x y"]),
)


@given(configs)
def test_text_roundtrip(cfg):
    assert RunConfig.from_text(cfg.to_text()) == cfg.validate()


@pytest.mark.parametrize(
    "change",
    [
        {"sk_depth": 9},
        {"sk_recursion": -1},
        {"ensemble_size": 0},
        {"variant": "v4"},
        {"threshold_mode": "median"},
        {"top_k": 3},
        {"threshold_value": -1.0},
        {"lowering": "dense"},
        {"codebook_mode": "global"},
        {"energy_pj_per_bit": -0.1},
        {"workers": 0},
    ],
)
def test_validation_rejects(change):
    with pytest.raises(ConfigError):
        RunConfig(**change).validate()


def test_from_text_errors():
    with pytest.raises(ConfigError):
        RunConfig.from_text("nonsense=1\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("sk_depth\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("sk_depth=five\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("simplify=maybe\n")


def test_from_text_accepts_comments_and_dashes():
    cfg = RunConfig.from_text("# comment\nsk-depth = 3   # inline\n\nsimplify=off\n")
    assert cfg.sk_depth == 3 and cfg.simplify is False


def test_replace_ignores_none():
    cfg = RunConfig().replace(sk_depth=None, seed=7)
    assert cfg.sk_depth == 5 and cfg.seed == 7


def test_load_config_from_env(tmp_path, monkeypatch):
    path = tmp_path / "run.cfg"
    path.write_text("seed=11\n")
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert load_config().seed == 11
    other = tmp_path / "other.cfg"
    other.write_text("seed=12\n")
    assert load_config(str(other)).seed == 12
    monkeypatch.delenv(CONFIG_ENV)
    assert load_config() == RunConfig()
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"))
