import pytest

# filled in by tests/test_acceptance.py; one line per acceptance criterion
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from labelloop.models import LexiconScorer, TrainConfig, featurize_pool
from labelloop.synth import default_lexicon, generate_pool

SMALL_FEATURE_DIM = 2**16


@pytest.fixture(scope="session")
def small_pool():
    return generate_pool(2000, seed=11)


@pytest.fixture(scope="session")
def lexicon_scorer():
    return LexiconScorer(default_lexicon())


@pytest.fixture(scope="session")
def train_config():
    return TrainConfig(feature_dim=SMALL_FEATURE_DIM)


@pytest.fixture(scope="session")
def small_pool_features(small_pool, train_config):
    X = featurize_pool(
        (p.text for p in small_pool),
        train_config.ngram_orders,
        train_config.feature_dim,
    )
    row_of = {p.id: i for i, p in enumerate(small_pool)}
    return X, row_of
