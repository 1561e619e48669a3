import numpy as np
import pandas as pd
import pytest

from retailflow.classify import classify_days
from retailflow.econ import newey_west_var
from retailflow.exceptions import ConfigError, IdMismatchError
from retailflow.mdio import parse_trades
from retailflow.synth import (
    MarketScenario, PanelScenario, compound_oracle, confusion, gen_market,
    gen_panel, run_oracle_suite
)


def _accuracy(market):
    day = classify_days(market.trades, market.quotes)
    return {method: confusion(market.truth, signed,
                              market.trades['trade_id'])
            for method, signed in (('BJZZ', day.bjzz), ('QMP', day.qmp))}


def test_gen_market_is_deterministic():
    scenario = MarketScenario(seed=11, n_days=2, trades_per_day=40)
    assert gen_market(scenario).to_csv() == gen_market(scenario).to_csv()
    other = MarketScenario(seed=12, n_days=2, trades_per_day=40)
    assert gen_market(other).to_csv()['trades.csv'] != \
        gen_market(scenario).to_csv()['trades.csv']


def test_market_without_retail_prints():
    market = gen_market(MarketScenario(retail_share=0., n_days=1))
    assert market.truth.empty
    assert not market.quotes['crossed'].any()


@pytest.mark.parametrize('params', [
    {'spread_cents': (0, 1)}, {'spread_cents': (3, 2)},
    {'improvement': (.2, .5)}, {'retail_share': 1.5},
    {'quotes_per_day': 0}
])
def test_market_scenario_validation(params):
    with pytest.raises(ConfigError):
        MarketScenario(**params)


def test_scenario_text_roundtrip():
    scenario = MarketScenario.wide(seed=4, band_share=.1)
    assert MarketScenario.from_text(scenario.to_text()) == scenario
    with pytest.raises(ConfigError):
        MarketScenario.from_text('n_weeks = 3')


def test_written_market_parses(tmp_path, penny_market):
    paths = penny_market.write(tmp_path)
    assert set(paths) >= {'trades.csv', 'quotes.csv', 'daily.csv',
                          'factors.csv', 'calendar.csv', 'truth.csv',
                          'scenario.cfg'}
    trades = parse_trades(paths['trades.csv'])
    assert trades['price'].tolist() == penny_market.trades['price'].tolist()


def test_penny_market_recovers_truth(penny_market):
    accuracy = _accuracy(penny_market)
    for result in accuracy.values():
        assert result.identification_rate == 1.
        assert result.sign_accuracy == 1.
        assert result.cells['false_positive'] == 0


def test_wide_spreads_favour_qmp(wide_market):
    accuracy = _accuracy(wide_market)
    assert accuracy['QMP'].sign_accuracy == 1.
    assert accuracy['BJZZ'].sign_accuracy < accuracy['QMP'].sign_accuracy


def test_band_prints_stay_unsigned():
    market = gen_market(MarketScenario(seed=2, n_days=1, band_share=1.))
    accuracy = _accuracy(market)
    assert accuracy['QMP'].identification_rate == 0.
    assert accuracy['QMP'].unsigned_rate == 1.


def test_confusion_cells():
    truth = pd.DataFrame({'trade_id': [1, 2, 3],
                          'true_side': ['Buy', 'Sell', 'Buy']})
    signed = pd.DataFrame({'trade_id': [1, 2, 4],
                           'direction': ['Buy', 'Buy', 'Sell']})
    result = confusion(truth, signed)
    assert result.cells == {'signed_correct': 1, 'signed_wrong': 1,
                            'unsigned': 1, 'false_positive': 1}
    assert result.identification_rate == pytest.approx(2 / 3)
    assert result.sign_accuracy == .5

    with pytest.raises(IdMismatchError):
        confusion(truth, signed, trade_ids=[1, 2, 3])
    with pytest.raises(IdMismatchError):
        confusion(pd.concat([truth, truth]), signed)


def test_confusion_without_signed_trades():
    truth = pd.DataFrame({'trade_id': [1], 'true_side': ['Buy']})
    signed = pd.DataFrame({'trade_id': pd.Series([], dtype=np.int64),
                           'direction': pd.Series([], dtype=object)})
    result = confusion(truth, signed)
    assert result.identification_rate == 0.
    assert np.isnan(result.sign_accuracy)


def test_compound_oracle():
    assert compound_oracle([.1, .1]) == pytest.approx(.21)
    assert np.isnan(compound_oracle([.1, np.nan]))


def test_panel_scenario_validation():
    with pytest.raises(ConfigError):
        PanelScenario(coefficients={'beta': 1.})
    with pytest.raises(ConfigError):
        PanelScenario(phi=1.)


def test_gen_panel_writes_truth(tmp_path, planted_panel):
    scenario, synthetic = planted_panel
    assert synthetic.truth['return_coefficients']['mroibvol'] == .5
    assert synthetic.panel['symbol'].nunique() == scenario.n_symbols
    assert synthetic.panel['week'].nunique() == scenario.n_weeks
    assert 'mroibvol_mean' in synthetic.panel.columns
    paths = synthetic.write(tmp_path)
    assert paths['truth.json'].read_text().startswith('{')


def test_gen_panel_is_deterministic():
    scenario = PanelScenario(seed=1, n_symbols=5, n_weeks=6)
    pd.testing.assert_frame_equal(gen_panel(scenario).panel,
                                  gen_panel(scenario).panel)


def test_newey_west_matches_statsmodels(random_state):
    sm = pytest.importorskip('statsmodels.api')
    series = random_state.normal(size=150)
    fit = sm.OLS(series, np.ones(len(series))).fit(
        cov_type='HAC', cov_kwds={'maxlags': 4, 'use_correction': False})
    assert newey_west_var(series, 4) == pytest.approx(fit.bse[0] ** 2,
                                                      rel=1e-10)


@pytest.mark.slow
def test_oracle_suite_passes():
    checks = run_oracle_suite(seed=0, n_systems=25, n_days=2)
    failed = [check.name for check in checks if check.passed is False]
    assert failed == []


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(5))
def test_wide_spreads_favour_qmp_across_seeds(seed):
    market = gen_market(MarketScenario.wide(seed=seed, n_symbols=4,
                                            n_days=3))
    accuracy = _accuracy(market)
    assert accuracy['QMP'].sign_accuracy > accuracy['BJZZ'].sign_accuracy
