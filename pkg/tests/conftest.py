from __future__ import annotations

import pytest

import helpers
from speechsim import confusion


@pytest.fixture(scope="session")
def trained_model():
    """Confusion model trained on ~25k tokens of synthetic parallel text."""
    return confusion.train(helpers.parallel_pairs(2500, seed=11), order=3)


@pytest.fixture(scope="session")
def sim_corpus():
    """Clean synthetic corpus of >= 10k tokens for calibration checks."""
    corpus = helpers.flat_corpus(1100, seed=29)
    assert sum(len(u) for u in corpus) >= 10_000
    return corpus
