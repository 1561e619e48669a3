import pathlib

import numpy as np
import pandas as pd
import pytest

from retailflow.mdio import TradingCalendar, parse_quotes, parse_trades
from retailflow.synth import (
    MarketScenario, PanelScenario, gen_market, gen_panel
)


DATA_DIR = pathlib.Path(__file__).parent / 'data'


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: Monte Carlo replications')


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def fixture_trades():
    return parse_trades(DATA_DIR / 'trades.csv')


@pytest.fixture
def fixture_quotes():
    return parse_quotes(DATA_DIR / 'quotes.csv')


@pytest.fixture(scope='session')
def penny_market():
    return gen_market(MarketScenario(seed=7, n_symbols=3, n_days=3,
                                     trades_per_day=150))


@pytest.fixture(scope='session')
def wide_market():
    return gen_market(MarketScenario.wide(seed=7, n_symbols=3, n_days=3,
                                          trades_per_day=150))


@pytest.fixture(scope='session')
def planted_panel():
    scenario = PanelScenario(
        seed=3, n_symbols=80, n_weeks=40,
        coefficients={'mroibvol': .5, 'ret': -.1, 'lmto': .002},
        return_noise=0., loading_dispersion=0.
    )
    return scenario, gen_panel(scenario)


@pytest.fixture
def calendar():
    return TradingCalendar.from_dates(
        pd.bdate_range('2017-01-02', '2017-03-31'))


@pytest.fixture
def random_state():
    return np.random.RandomState(0)
