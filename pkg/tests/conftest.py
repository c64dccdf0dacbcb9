"""Shared fixtures: demo corpora are generated once per session."""

import pytest

from combperceptron import demo_data


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Small digit corpus for loader and CLI tests (60 per digit)."""
    d = tmp_path_factory.mktemp("corpus")
    demo_data.write_digit_corpus(d, digits=(0, 6), per_digit=60, seed=11)
    return d


@pytest.fixture(scope="session")
def full_corpus_dir(tmp_path_factory):
    """Full-size digit corpus (500 per digit) for the acceptance suite."""
    d = tmp_path_factory.mktemp("fullcorpus")
    demo_data.write_digit_corpus(d)
    return d


@pytest.fixture(scope="session")
def wdbc_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("wdbc") / "breast-mass.csv"
    demo_data.write_breast_mass_csv(path)
    return path
