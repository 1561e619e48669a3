from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from scipy.stats import norm

from retailflow.aggregate import daily_flows
from retailflow.exceptions import ConfigError, SkippedPeriodWarning
from retailflow.mdio import parse_factors, parse_market
from retailflow.studies import (
    Decomposition, HorizonPrediction, Prediction, StudyData, StudySpec,
    SubgroupPrediction, eventstudy, external_benchmark, horizon_prediction,
    longshort, panel_specs, prediction, run_tables, select_period,
    significance_stars, with_lags
)
from retailflow.studies.eventstudy import (
    _LogReturnTape, decile_groups, event_windows
)
from retailflow.synth import PanelScenario, gen_panel
from retailflow.utils.exporting import frame_to_csv


@pytest.mark.parametrize('t, stars', [
    (2.576, '**'), (-3., '**'), (2.5, '*'), (1.96, '*'), (-1.95, ''),
    (float('nan'), '')
])
def test_significance_stars(t, stars):
    assert significance_stars(t) == stars


def test_panel_specs_grid():
    specs = panel_specs(return_mode='close')
    assert [s.label for s in specs] == [
        'BJZZ 2010-2015', 'QMP 2010-2015', 'BJZZ 2016-2021', 'QMP 2016-2021'
    ]
    assert all(s.return_mode == 'close' for s in specs)
    assert [s.lags for s in with_lags(specs, 10)] == [10] * 4


def test_spec_lags():
    assert StudySpec().resolved_lags('table2') == 6
    assert StudySpec().resolved_lags('table8') == 4
    assert StudySpec(lags=10).resolved_lags('table2') == 10
    spec = StudySpec(options={'table_lags': {'table3': 3}})
    assert spec.resolved_lags('table3') == 3


def test_select_period_is_inclusive():
    frame = pd.DataFrame({'month': pd.period_range('2015-11', '2016-02',
                                                   freq='M')})
    spec = StudySpec(period=('2015-12', '2016-01'))
    assert select_period(frame, spec)['month'].astype(str).tolist() == \
        ['2015-12', '2016-01']


def test_prediction_recovers_planted_slope(planted_panel):
    _, synthetic = planted_panel
    table = prediction(synthetic.panel).set_index('variable')
    assert table.loc['Mroibvol(w-1)', 'estimate'] == \
        pytest.approx(.5, abs=1e-8)
    assert table.loc['Lmto', 'estimate'] == pytest.approx(.002, abs=1e-8)
    iqr = table.loc['IQR Mroibvol(w-1)', 'estimate']
    assert table.loc['IQR w. ret. diff Mroibvol(w-1)', 'estimate'] == \
        pytest.approx(.5 * iqr * 100)


def test_subgroups_share_the_planted_slope(planted_panel):
    _, synthetic = planted_panel
    table = SubgroupPrediction().fit_tabulate(synthetic.panel)
    assert len(table) == 9
    assert table['group'].tolist()[:3] == ['Small', 'Medium', 'Big']
    assert (table['flag'] == '').all()
    np.testing.assert_allclose(table['estimate'], .5, atol=1e-8)


def test_decomposition_parts_add_up():
    # Noiseless returns make the components collinear with last week's
    # return.
    synthetic = gen_panel(PanelScenario(seed=5, n_symbols=60, n_weeks=30))
    study = Decomposition().fit(synthetic.panel)
    assert study.result_.max_additivity_error('mroibvol') < 1e-10
    stages = study.tabulate()['stage'].unique().tolist()
    assert stages == ['first', 'second', 'magnitude']


def test_longshort_earns_the_planted_premium(planted_panel):
    _, synthetic = planted_panel
    table = longshort(synthetic.panel, None, synthetic.factors,
                      horizons=(1, 2), universes=('all', 'small'))
    row = table[(table['universe'] == 'All') & (table['k'] == 1)].iloc[0]
    assert row['mean'] > 0
    assert row['alpha'] > 0
    assert row['flag'] == ''
    assert set(table['universe']) == {'All', 'Small'}


def test_run_tables_labels_panels(planted_panel):
    _, synthetic = planted_panel
    data = StudyData(panels={('BJZZ', 'bidask'): synthetic.panel},
                     flows=pd.DataFrame(), calendar=synthetic.calendar)
    tables = run_tables(data, [StudySpec()], tables=('table2', 'table3'),
                        imbalances=('mroibvol', 'mroibtrd'))
    assert set(tables) == {'table2', 'table3'}
    assert set(tables['table2']['panel']) == {'(a) BJZZ all'}
    assert set(tables['table3']['imbalance']) == {'Mroibvol', 'Mroibtrd'}


def test_event_windows_split_anchor():
    windows = event_windows(10, 14, -5)
    assert [int(v) for v in windows['cumulative']] == [5, 9]
    windows = event_windows(10, 14, 10)
    assert [int(v) for v in windows['cumulative']] == [15, 24]
    assert [int(v) for v in windows['weekly']] == [20, 24]
    windows = event_windows(10, 14, 0, anchor='week_end')
    assert [int(v) for v in windows['cumulative']] == [15, 14]


def test_decile_groups():
    assert decile_groups(np.arange(1, 11)).tolist() == \
        [0, 1, 1, 1, 1, 2, 2, 2, 2, 3]


def test_return_tape_isolates_wipeouts():
    tape = _LogReturnTape.from_returns([.01, -1., 0., .02, .03, .01])
    assert tape.compound([3], [5])[0] == \
        pytest.approx(1.02 * 1.03 * 1.01 - 1)
    np.testing.assert_allclose(tape.compound([0, 1, 1], [1, 1, 5]), -1.)
    assert tape.compound([2], [2])[0] == 0.
    assert np.isnan(tape.compound([4], [6])[0])


def test_eventstudy_adjusts_for_the_market(calendar):
    symbols = ['S{}'.format(i) for i in range(10)]
    rows = []
    for date in calendar.dates:
        for i, symbol in enumerate(symbols):
            rows += [(symbol, date, 'BJZZ', 'Buy', i + 1),
                     (symbol, date, 'BJZZ', 'Sell', 10 - i)]
    flows = daily_flows(pd.DataFrame(
        rows, columns=['symbol', 'date', 'method', 'direction', 'size']))
    returns = pd.DataFrame([(s, d, .01 if s == 'S9' else 0.)
                            for d in calendar.dates for s in symbols],
                           columns=['symbol', 'date', 'ret'])
    market = pd.DataFrame({'date': calendar.dates, 'mkt': 0.})

    result = eventstudy(flows, returns, market, calendar,
                        offsets=(-5, 0, 5))
    week = 1.01 ** 5 - 1
    buying = result.cell('weekly', 'Intense Buying', 0)
    assert buying['mean'] == pytest.approx(week)
    assert buying['n_weeks'] == len(calendar.weeks)
    after = result.cell('cumulative', 'Intense Buying', 5)
    assert after['mean'] == pytest.approx(week)
    assert after['n_weeks'] == len(calendar.weeks) - 1
    assert result.cell('weekly', 'Selling', 0)['mean'] == 0.


def test_horizon_one_recovers_the_planted_slope(planted_panel):
    _, synthetic = planted_panel
    table = horizon_prediction(synthetic.panel, horizons=(1, 2, 12))
    table = table.set_index('k')
    assert table.loc[1, 'estimate'] == pytest.approx(.5, abs=1e-8)
    assert (table['flag'] == '').all()
    # Two weeks out only the imbalance persistence and the return
    # reversal remain: .5 * .2 - .1 * .5.
    assert abs(table.loc[2, 'estimate']) < .2
    assert abs(table.loc[12, 'estimate']) < .1


def test_horizon_one_matches_prediction_within_a_period(planted_panel):
    _, synthetic = planted_panel
    spec = StudySpec(period=('2012-02', '2012-09'))
    horizon = HorizonPrediction(spec, horizons=(1, 4)).fit(synthetic.panel)
    expected = Prediction(spec).fit(synthetic.panel).result_
    pd.testing.assert_frame_equal(horizon.results_[1].coefficients,
                                  expected.coefficients)
    pd.testing.assert_series_equal(horizon.results_[1].mean, expected.mean)
    weeks = expected.coefficients.index
    assert horizon.results_[4].coefficients.index.isin(weeks).all()


def test_horizon_flags_insufficient_periods(planted_panel):
    _, synthetic = planted_panel
    with pytest.warns(SkippedPeriodWarning):
        table = horizon_prediction(synthetic.panel, horizons=(1, 35))
    table = table.set_index('k')
    assert table.loc[1, 'flag'] == ''
    assert table.loc[35, 'flag'] == 'INSUFFICIENT_PERIODS'
    assert np.isnan(table.loc[35, 'estimate'])
    assert table.loc[35, 'n_periods'] == 0


def test_tables_do_not_depend_on_the_number_of_jobs(planted_panel):
    _, synthetic = planted_panel
    data = StudyData(panels={('BJZZ', 'bidask'): synthetic.panel},
                     flows=pd.DataFrame(), calendar=synthetic.calendar)
    tables = ('table2', 'table3', 'table5')
    texts = []
    for n_jobs in (1, 4):
        out = run_tables(data, [StudySpec()], tables=tables, n_jobs=n_jobs)
        texts.append([frame_to_csv(out[name]) for name in tables])
    assert texts[0] == texts[1]


def test_external_benchmark_prefers_the_market_file():
    factors = parse_factors('date,mkt_rf,smb,hml,rf\n'
                            '2017-01-03,0.01,0,0,0.0002\n'
                            '2017-01-04,-0.02,0,0,0.0002\n')
    market = parse_market('date,mkt\n2017-01-03,0.005\n2017-01-04,0.001\n')
    assert external_benchmark(factors, market)['mkt'].tolist() == \
        [.005, .001]
    np.testing.assert_allclose(external_benchmark(factors)['mkt'],
                               [.0102, -.0198])
    with pytest.raises(ConfigError, match='input.market'):
        external_benchmark()


def _longshort_alpha(scenario):
    synthetic = gen_panel(scenario)
    table = longshort(synthetic.panel, None, synthetic.factors,
                      horizons=(1,), universes=('all',))
    return table.iloc[0]


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(20))
def test_longshort_alpha_is_insignificant_without_signal(seed):
    row = _longshort_alpha(PanelScenario(seed=seed, n_symbols=200,
                                         n_weeks=120))
    assert row['flag'] == ''
    assert abs(row['t_alpha']) < 3


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(3))
def test_longshort_recovers_a_planted_alpha(seed):
    # A common intercept cancels between the legs, so the weekly premium
    # of .001 is planted through the imbalance slope: the top and bottom
    # quintiles of a normal imbalance sit 2 * pdf(z_.8) / .2 sd apart.
    scenario = PanelScenario(seed=seed, n_symbols=500, n_weeks=120,
                             return_noise=.005, loading_dispersion=0.)
    sd = scenario.imbalance_noise / np.sqrt(1 - scenario.phi ** 2)
    spread = 2 * norm.pdf(norm.ppf(.8)) / .2 * sd
    scenario = replace(scenario, coefficients={'mroibvol': .001 / spread})
    row = _longshort_alpha(scenario)
    se = abs(row['alpha'] / row['t_alpha'])
    assert abs(row['alpha'] - .001) < 3 * se
    assert row['t_alpha'] > 3
