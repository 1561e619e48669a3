import numpy as np
import pandas as pd
import pytest

from retailflow.exceptions import DataError, InsufficientGroupsError
from retailflow.mdio import parse_daily
from retailflow.panel import (
    CONTROL_COLUMNS, SubgroupAssigner, assemble_panel, controls_table,
    daily_return, market_returns, monthly_controls, ret_windows,
    weekly_factors, weekly_return, weekly_returns
)


DAILY = """symbol,date,close,bid,ask,shrout,shrcd,be,vol
A,2017-01-30,10.0000,9.9900,10.0100,1000,10,5000,300
A,2017-01-31,10.0000,9.9900,10.0100,1000,10,5000,200
A,2017-02-01,11.0000,10.9900,11.0100,1000,10,5000,100
B,2017-01-30,30.0000,29.9900,30.0100,1000,11,,100
B,2017-01-31,,29.9900,30.0100,1000,11,,100
B,2017-02-01,33.0000,32.9900,33.0100,1000,11,,100
C,2017-01-31,5.0000,4.9900,5.0100,0,10,,100
"""

DAY = pd.to_datetime(['2017-01-30', '2017-01-31', '2017-02-01'])


@pytest.fixture
def daily():
    return parse_daily(DAILY)


def _returns(rows):
    frame = pd.DataFrame(rows, columns=['symbol', 'date', 'ret'])
    frame['date'] = pd.to_datetime(frame['date'])
    return frame


def _weekly(symbol, weeks, values):
    return pd.DataFrame({'symbol': symbol, 'week': weeks,
                         'mroibvol': values, 'mroibtrd': values,
                         'ret': [v / 10 for v in values]})


def test_daily_return_modes(daily):
    bidask = daily_return(daily, 'bidask').set_index(['symbol', 'date'])
    close = daily_return(daily, 'close').set_index(['symbol', 'date'])
    assert np.isnan(bidask.loc[('A', DAY[0]), 'ret'])
    assert bidask.loc[('A', DAY[2]), 'ret'] == pytest.approx(.1)
    assert close.loc[('A', DAY[2]), 'ret'] == pytest.approx(.1)
    # A missing close voids both returns next to it.
    assert close.loc[[('B', DAY[1]), ('B', DAY[2])], 'ret'] \
        .isna().all()
    assert bidask.loc[('B', DAY[2]), 'ret'] == pytest.approx(.1)
    with pytest.raises(ValueError):
        daily_return(daily, 'vwap')


def test_weekly_return_skips_missing_days():
    assert weekly_return([.01, np.nan, .02]) == pytest.approx(.0302)
    assert np.isnan(weekly_return([np.nan]))


def test_weekly_returns_count_valid_days(calendar):
    returns = _returns([('A', '2017-01-02', .01), ('A', '2017-01-03', .02),
                        ('A', '2017-01-04', np.nan),
                        ('A', '2017-01-09', np.nan)])
    weekly = weekly_returns(returns, calendar).set_index('week')
    assert weekly.loc[0, 'ret'] == pytest.approx(.0302)
    assert weekly.loc[0, 'n_days'] == 2
    assert np.isnan(weekly.loc[1, 'ret'])


def test_ret_windows_skip_the_latest_month():
    rows = [('A', '2017-{:02d}-15'.format(k), k / 100) for k in range(1, 9)]
    windows = ret_windows(_returns(rows), '2017-09').iloc[0]
    assert windows['ret_m1'] == pytest.approx(.08)
    expected = np.prod([1 + k / 100 for k in range(2, 8)]) - 1
    assert windows['ret_m7_m2'] == pytest.approx(expected)

    early = ret_windows(_returns(rows), '2017-07').iloc[0]
    assert np.isnan(early['ret_m7_m2'])


def test_monthly_controls(daily):
    controls = monthly_controls(daily, '2017-01').set_index('symbol')
    assert controls.loc['A', 'lmto'] == pytest.approx(50.)
    assert controls.loc['A', 'size'] == pytest.approx(np.log(10000.))
    assert controls.loc['A', 'lbm'] == pytest.approx(np.log(.5))
    assert np.isnan(controls.loc['A', 'lvol'])
    assert np.isnan(controls.loc['B', 'lbm'])
    assert controls.loc['C', ['lmto', 'size', 'me']].isna().all()


def test_controls_table_lags_characteristics(daily):
    controls = controls_table(daily, daily_return(daily)) \
        .set_index(['symbol', 'month'])
    february = controls.loc[('A', pd.Period('2017-02', freq='M'))]
    assert february['lmto'] == pytest.approx(50.)
    assert february['ret_m1'] == pytest.approx(0.)
    assert controls.columns.tolist()[:len(CONTROL_COLUMNS)] == \
        CONTROL_COLUMNS


def test_market_returns_weighting(daily):
    returns = _returns([('A', '2017-01-31', np.nan),
                        ('A', '2017-02-01', .1),
                        ('B', '2017-01-31', np.nan),
                        ('B', '2017-02-01', .2)])
    # Without its missing close, B's month ends on January 30.
    vw = market_returns(daily.dropna(subset=['close']), returns, how='vw')
    assert vw['mkt'].tolist() == [pytest.approx((.1 + .2 * 3) / 4)]
    ew = market_returns(daily, returns, how='ew')
    assert ew['mkt'].tolist() == [pytest.approx(.15)]


def test_weekly_factors_compound(calendar):
    factors = pd.DataFrame({
        'date': pd.to_datetime(['2017-01-02', '2017-01-03', '2017-01-09']),
        'mkt_rf': [.01, .02, .03], 'smb': 0., 'hml': 0., 'rf': 0.
    })
    weekly = weekly_factors(factors, calendar).set_index('week')
    assert weekly.loc[0, 'mkt_rf'] == pytest.approx(.0302)
    assert weekly.loc[1, 'mkt_rf'] == pytest.approx(.03)


def test_assemble_panel_aligns_lags_by_week(calendar):
    weekly = _weekly('A', [0, 1, 3, 4], [.1, .2, .4, .5])
    controls = pd.DataFrame({'symbol': ['A'],
                             'month': [pd.Period('2017-01', freq='M')]})
    for column in CONTROL_COLUMNS + ['me', 'price']:
        controls[column] = 1.
    panel = assemble_panel(weekly, weekly, controls, calendar)
    assert panel['week'].tolist() == [0, 1, 3, 4]
    lag1 = panel['mroibvol_lag1'].tolist()
    assert np.isnan(lag1[0]) and lag1[1] == .1
    # Week 2 is missing, so week 3 has no lagged flow.
    assert np.isnan(lag1[2]) and lag1[3] == .4
    assert panel['ret_lag2'].isna().tolist() == [True, True, False, True]
    assert panel.loc[0, 'lmto'] == 1.


def test_assemble_panel_applies_universe(calendar):
    weekly = pd.concat([_weekly('A', [0, 1], [.1, .2]),
                        _weekly('B', [0, 1], [.3, .4])])
    controls = pd.DataFrame(columns=['symbol', 'month'] + CONTROL_COLUMNS)
    controls['month'] = controls['month'].astype('period[M]')
    panel = assemble_panel(weekly, weekly, controls, calendar,
                           universe={'2017-01': {'B'}})
    assert set(panel['symbol']) == {'B'}


def test_assemble_panel_rejects_foreign_weeks(calendar):
    weekly = _weekly('A', [0, 99], [.1, .2])
    controls = pd.DataFrame(columns=['symbol', 'month'])
    with pytest.raises(DataError):
        assemble_panel(weekly, weekly, controls, calendar)


def test_subgroups_have_equal_counts():
    panel = pd.DataFrame({
        'month': pd.Period('2017-02', freq='M'),
        'symbol': list('FEDCBA'),
        'me': [6., 5., 4., 3., 2., 2.],
        'week': 0
    })
    assigner = SubgroupAssigner('cap')
    with pytest.raises(RuntimeError, match='Fitting is necessary'):
        assigner.transform(panel)
    labelled = assigner.fit_transform(panel).set_index('symbol')
    assert labelled['cap_group'].to_dict() == {
        'A': 0, 'B': 0, 'C': 1, 'D': 1, 'E': 2, 'F': 2
    }
    with pytest.raises(InsufficientGroupsError):
        SubgroupAssigner('cap', n_groups=7).fit(panel)
    with pytest.raises(ValueError):
        SubgroupAssigner('beta').fit(panel)
