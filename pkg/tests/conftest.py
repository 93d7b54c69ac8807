import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eqisa.basis import generate_basis
from eqisa.config import RunConfig
from eqisa.pipeline import train_model

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# The matrix printed as the worked example's decomposition target.
WORKED_U = np.array(
    [
        [0.50359966 + 0.62609046j, -0.07233711 + 0.59090224j],
        [0.31138773 + 0.50738132j, 0.19782201 - 0.77876077j],
    ]
)

# A 40-gate stream with the worked example's statistics: letters H:21, T:10,
# Tdg:9, and greedy d=3 tokens HTH:5, HTdgH:5, T:4, Tdg:4, TH:1.
WORKED_TOKENS = ["T", "Tdg"] * 4 + ["TH"] + ["HTH"] * 5 + ["HTdgH"] * 5
WORKED_STREAM = [g for tok in WORKED_TOKENS for g in {"TH": ["T", "H"], "HTH": ["H", "T", "H"], "HTdgH": ["H", "Tdg", "H"]}.get(tok, [tok])]

WORKED_V1 = {"H": 21, "T": 10, "Tdg": 9}
WORKED_V2 = {"HTH": 5, "HTdgH": 5, "T": 4, "Tdg": 4, "TH": 1}
WORKED_V3 = {"HTH": 5, "HTdgH": 5, "T": 5, "Tdg": 4, "H": 1}


@pytest.fixture(scope="session")
def basis3():
    return generate_basis(depth=3)


@pytest.fixture(scope="session")
def basis5():
    return generate_basis(depth=5)


@pytest.fixture(scope="session")
def small_model(basis3):
    """Cheap model (d=3, n=2, 40 samples) for pipeline and CLI tests."""
    cfg = RunConfig(sk_depth=3, sk_recursion=2, ensemble_size=40, seed=0)
    return train_model(cfg, basis3)


@pytest.fixture(scope="session")
def small_model_dir(small_model, tmp_path_factory):
    from eqisa.pipeline import save_model

    d = tmp_path_factory.mktemp("model")
    save_model(small_model, d)
    return d


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def default_model():
    """Model from the default configuration (d=5, n=4, 200 samples, seed 0)."""
    return train_model(RunConfig())


@pytest.fixture(scope="session")
def corpus_rows_unitary(default_model):
    """Raw benchmark rows for the shipped corpus, lowered through the dense unitary."""
    from eqisa.pipeline import corpus_files, default_corpus_dir, run_bench

    return run_bench(corpus_files(default_corpus_dir()), default_model, "unitary")
