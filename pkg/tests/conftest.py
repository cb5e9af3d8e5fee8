"""Shared fixtures: small synthetic datasets for pipeline-level tests."""

from datetime import date

import pytest

from ssdfolio.synthetic import write_dataset


@pytest.fixture(scope="session")
def small_data_dir(tmp_path_factory):
    """One-year market with four equities; quick enough for backtest tests."""
    directory = tmp_path_factory.mktemp("smalldata")
    write_dataset(directory, start=date(2019, 1, 2), end=date(2020, 12, 31), n_equities=4, seed=11)
    return directory
