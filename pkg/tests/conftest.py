import pytest

from twkit import default_schema, default_synthesis_spec, synthesize_corpus


@pytest.fixture(scope="session")
def schema():
    return default_schema()


@pytest.fixture(scope="session")
def corpus_200():
    return synthesize_corpus(default_synthesis_spec(), 200, seed=42)


@pytest.fixture(scope="session")
def corpus_1087():
    return synthesize_corpus(default_synthesis_spec(), 1087, seed=7)
