"""Firm-week regression panel: returns, monthly controls, lags and groups.

Every week belongs to the month of its first trading day. Month-dated
controls attach to a week of month m as of month m - 1 (turnover,
volatility, size, book-to-market) and the return windows m - 1 and
m - 7..m - 2, so no control is measured after the week starts.
"""


import logging

import numpy as np
import pandas as pd

from sklearn.base import BaseEstimator, TransformerMixin

from .decorators import operation_context
from .exceptions import DataError
from .utils.importing import PRICE_SCALE
from .utils.mathy import equal_count_groups
from .utils.validation import check_column_existence, check_lags_precede


__all__ = [
    'RETURN_MODES',
    'CONTROL_COLUMNS',
    'CHARACTERISTICS',
    'SubgroupAssigner',
    'daily_return',
    'weekly_return',
    'weekly_returns',
    'monthly_returns',
    'monthly_controls',
    'ret_windows',
    'controls_table',
    'weekly_factors',
    'market_returns',
    'shift_weeks',
    'assemble_panel',
    'assign_subgroups'
]

logger = logging.getLogger(__name__)

RETURN_MODES = ('bidask', 'close')
IMBALANCES = ['mroibvol', 'mroibtrd']
CONTROL_COLUMNS = ['ret_m1', 'ret_m7_m2', 'lmto', 'lvol', 'size', 'lbm']
CHARACTERISTICS = {'cap': 'me', 'price': 'price', 'turnover': 'lmto'}
MIN_VOLATILITY_DAYS = 5
FACTOR_COLUMNS = ['mkt_rf', 'smb', 'hml', 'rf']


def _prices(values):
    """Nullable ten-thousandths to float dollars with NaN."""
    return pd.Series(values).astype('Float64').to_numpy(
        dtype=float, na_value=np.nan) / PRICE_SCALE


@operation_context('panel', 'daily_return')
def daily_return(daily, mode='bidask'):
    """Daily returns between consecutive records of every symbol.

    Parameters
    ----------
    daily: pandas.DataFrame
        Output of `mdio.parse_daily`.

    mode: str {'bidask', 'close'}, optional (default='bidask')
        - `bidask`: return of the bid-ask midpoint.
        - `close`: close-to-close return.

    Returns
    -------
    returns: pandas.DataFrame
        Columns symbol, date, ret. The first record of a symbol and days
        next to a non-positive or missing price have NaN returns.

    """
    daily = daily.sort_values(['symbol', 'date'], kind='mergesort')
    if mode == 'bidask':
        price = (_prices(daily['bid']) + _prices(daily['ask'])) / 2
    elif mode == 'close':
        price = _prices(daily['close'])
    else:
        raise ValueError('Unknown return mode: {}'.format(mode))
    price = np.where(price > 0, price, np.nan)
    previous = pd.Series(price, index=daily.index) \
        .groupby(daily['symbol'].values).shift(1).to_numpy()
    with np.errstate(invalid='ignore', divide='ignore'):
        ret = price / previous - 1
    return pd.DataFrame({
        'symbol': daily['symbol'].values,
        'date': daily['date'].values,
        'ret': ret
    })


def weekly_return(returns):
    """Compounds the valid daily returns of one week, NaN if none is valid.

    Examples
    --------
    >>> round(weekly_return([.01, .01]), 6)
    0.0201

    """
    returns = np.asarray(returns, dtype=float)
    returns = returns[~np.isnan(returns)]
    if not len(returns):
        return float('nan')
    return float(np.prod(1. + returns) - 1.)


def _compound_groups(frame, keys):
    valid = frame['ret'].notna()
    grouped = frame.assign(
        gross=1. + frame['ret'].where(valid, 0.), valid=valid
    ).groupby(keys, sort=True)
    out = grouped.agg(gross=('gross', 'prod'), n_days=('valid', 'sum'))
    out['ret'] = np.where(out['n_days'] > 0, out['gross'] - 1., np.nan)
    return out.drop(columns='gross').reset_index()


@operation_context('panel', 'weekly_returns')
def weekly_returns(returns, calendar):
    """Compounded weekly returns of every symbol-week.

    Returns
    -------
    weekly: pandas.DataFrame
        Columns symbol, week, n_days (valid daily returns), ret.

    """
    frame = returns.assign(week=calendar.week_of(returns['date']))
    frame = frame[frame['week'] >= 0]
    return _compound_groups(frame, ['symbol', 'week'])[
        ['symbol', 'week', 'n_days', 'ret']]


def monthly_returns(returns):
    """Compounded calendar-month returns (symbol, month, n_days, ret)."""
    frame = returns.assign(month=pd.to_datetime(returns['date'])
                           .dt.to_period('M'))
    return _compound_groups(frame, ['symbol', 'month'])[
        ['symbol', 'month', 'n_days', 'ret']]


@operation_context('panel', 'ret_windows')
def ret_windows(returns, month=None):
    """Past-return windows of month m.

    `ret_m1` compounds month m - 1 and `ret_m7_m2` the six months m - 7 to
    m - 2. A window with any month missing is NaN.

    Parameters
    ----------
    returns: pandas.DataFrame
        Daily returns as returned by `daily_return`.

    month: str or pandas.Period, optional (default=None)
        Month to evaluate. All months up to one past the data by default.

    Returns
    -------
    windows: pandas.DataFrame
        Columns symbol, month, ret_m1, ret_m7_m2.

    """
    monthly = monthly_returns(returns)
    columns = ['symbol', 'month', 'ret_m1', 'ret_m7_m2']
    if not len(monthly):
        return pd.DataFrame(columns=columns)
    months = pd.period_range(monthly['month'].min(),
                             monthly['month'].max() + 1, freq='M')
    wide = monthly.pivot(index='month', columns='symbol', values='ret') \
        .reindex(months).rename_axis(index='month', columns='symbol')
    ret_m1 = wide.shift(1)
    ret_m7_m2 = (1. + wide).shift(2).rolling(6, min_periods=6) \
        .apply(np.prod, raw=True) - 1.

    def long(frame, name):
        return frame.reset_index().melt(
            id_vars='month', var_name='symbol', value_name=name)

    windows = long(ret_m1, 'ret_m1').merge(
        long(ret_m7_m2, 'ret_m7_m2'), on=['month', 'symbol'])
    present = monthly[['symbol', 'month']]
    targets = pd.concat([present, present.assign(month=present['month'] + 1)])
    windows = windows.merge(targets.drop_duplicates(), on=['symbol', 'month'])
    if month is not None:
        windows = windows[windows['month'] == pd.Period(month, freq='M')]
    return windows[columns].sort_values(['symbol', 'month']) \
        .reset_index(drop=True)


@operation_context('panel', 'monthly_controls')
def monthly_controls(daily, month=None, returns=None, turnover_scale=100):
    """Month-end characteristics of every symbol.

    Parameters
    ----------
    daily: pandas.DataFrame
        Output of `mdio.parse_daily`.

    month: str or pandas.Period, optional (default=None)
        Month to evaluate, all months by default.

    returns: pandas.DataFrame, optional (default=None)
        Daily returns for the volatility, bid-ask returns by default.

    turnover_scale: float, optional (default=100)
        Turnover multiplier, 100 expresses it in percent.

    Returns
    -------
    controls: pandas.DataFrame
        Columns symbol, month and

        - lmto: month volume / month-end shares outstanding x scale,
        - lvol: sample std of the month's daily returns (NaN below five
          valid days),
        - size: log of month-end market value,
        - lbm: log of book equity over market value (NaN unless book
          equity is positive),
        - me: month-end market value in dollars,
        - price: month-end close in dollars.

        All of them are NaN when shares outstanding are missing or 0.

    """
    if returns is None:
        returns = daily_return(daily, 'bidask')
    daily = daily.assign(month=daily['date'].dt.to_period('M'))
    grouped = daily.sort_values(['symbol', 'date'], kind='mergesort') \
        .groupby(['symbol', 'month'], sort=True)
    ends = grouped.tail(1).set_index(['symbol', 'month'])
    volume = grouped['vol'].sum()

    by_month = returns.assign(
        month=pd.to_datetime(returns['date']).dt.to_period('M')
    ).groupby(['symbol', 'month'])['ret']
    lvol = by_month.std(ddof=1).where(
        by_month.count() >= MIN_VOLATILITY_DAYS)

    shares = ends['shrout'].astype(float)
    valid = shares > 0
    price = pd.Series(_prices(ends['close']), index=ends.index)
    me = price * shares
    book = ends['be'].astype(float)
    with np.errstate(invalid='ignore', divide='ignore'):
        controls = pd.DataFrame({
            'lmto': volume / shares * turnover_scale,
            'lvol': lvol.reindex(ends.index),
            'size': np.log(me.where(me > 0)),
            'lbm': np.log((book / me).where((book > 0) & (me > 0))),
            'me': me,
            'price': price
        }, index=ends.index)
    controls.loc[~valid.to_numpy(), :] = np.nan
    controls = controls.reset_index()
    if month is not None:
        controls = controls[controls['month'] == pd.Period(month, freq='M')]
    return controls.reset_index(drop=True)


@operation_context('panel', 'controls_table')
def controls_table(daily, returns, turnover_scale=100):
    """Controls attached to weeks of month m: characteristics of m - 1 and
    the return windows of m.

    Returns
    -------
    controls: pandas.DataFrame
        Columns symbol, month, `CONTROL_COLUMNS`, me, price.

    """
    lagged = monthly_controls(daily, returns=returns,
                              turnover_scale=turnover_scale)
    lagged['month'] = lagged['month'] + 1
    windows = ret_windows(returns)
    controls = windows.merge(lagged, on=['symbol', 'month'], how='outer')
    return controls[['symbol', 'month'] + CONTROL_COLUMNS + ['me', 'price']] \
        .sort_values(['symbol', 'month']).reset_index(drop=True)


@operation_context('panel', 'weekly_factors')
def weekly_factors(factors, calendar):
    """Compounds factor returns onto calendar weeks.

    Daily and weekly factor files both work: every factor date joins the
    last week starting on or before it.

    Returns
    -------
    weekly: pandas.DataFrame
        Columns week, mkt_rf, smb, hml, rf.

    """
    dates = pd.to_datetime(factors['date']).values
    position = np.searchsorted(calendar.dates.values, dates, side='right') - 1
    known = position >= 0
    gross = 1. + factors.loc[known, FACTOR_COLUMNS]
    gross['week'] = calendar.week_ids[position[known]]
    weekly = gross.groupby('week', sort=True).prod() - 1.
    return weekly.reset_index()[['week'] + FACTOR_COLUMNS]


@operation_context('panel', 'market_returns')
def market_returns(daily, returns, universe=None, how='vw'):
    """Daily market return of the stock universe.

    Parameters
    ----------
    daily: pandas.DataFrame
        Output of `mdio.parse_daily`.

    returns: pandas.DataFrame
        Daily returns, see `daily_return`.

    universe: pandas.DataFrame, optional (default=None)
        Eligibility table (`mdio.eligibility_table`), restricts the market
        to eligible stocks when given.

    how: str {'vw', 'ew'}, optional (default='vw')
        Weighting by previous month-end market value or equal weights.

    Returns
    -------
    market: pandas.DataFrame
        Columns date, mkt.

    """
    frame = returns.dropna(subset=['ret']).assign(
        month=lambda f: pd.to_datetime(f['date']).dt.to_period('M'))
    if universe is not None:
        frame = frame.merge(universe.loc[universe['eligible'],
                                         ['symbol', 'month']],
                            on=['symbol', 'month'])
    if how == 'vw':
        weights = monthly_controls(daily, returns=returns)[
            ['symbol', 'month', 'me']]
        weights = weights.assign(month=weights['month'] + 1)
        frame = frame.merge(weights, on=['symbol', 'month'])
        frame = frame[frame['me'] > 0]
        frame['weight'] = frame['me']
    elif how == 'ew':
        frame['weight'] = 1.
    else:
        raise ValueError('Unknown market weighting: {}'.format(how))
    frame['weighted'] = frame['ret'] * frame['weight']
    sums = frame.groupby('date', sort=True)[['weighted', 'weight']].sum()
    return pd.DataFrame({
        'date': sums.index, 'mkt': (sums['weighted'] / sums['weight']).values
    })


def shift_weeks(panel, columns, lag):
    """Values of `columns` from week w - lag of the same symbol.

    A negative lag reads future weeks. Rows without a counterpart get NaN.

    Returns
    -------
    shifted: pandas.DataFrame
        Aligned with `panel`, same column names plus `_source_week`.

    """
    if panel.duplicated(['symbol', 'week']).any():
        raise DataError('Panel holds duplicate symbol-weeks.')
    source = panel[['symbol', 'week'] + list(columns)].assign(
        _source_week=panel['week'])
    source['week'] = source['week'] + lag
    shifted = panel[['symbol', 'week']].merge(
        source, on=['symbol', 'week'], how='left')
    shifted.index = panel.index
    return shifted[list(columns) + ['_source_week']]


def _select_method(flows, method):
    if 'method' not in flows.columns:
        return flows
    if method is None:
        methods = pd.unique(flows['method'])
        if len(methods) > 1:
            raise DataError(
                'Flows hold several methods {}, choose one.'
                .format(sorted(methods))
            )
        return flows
    return flows[flows['method'] == method]


def _eligible_pairs(universe):
    if isinstance(universe, pd.DataFrame):
        pairs = universe.loc[universe['eligible'], ['symbol', 'month']]
    else:
        pairs = pd.DataFrame(
            [(s, pd.Period(m, freq='M')) for m, symbols in universe.items()
             for s in symbols],
            columns=['symbol', 'month']
        )
    return pairs.drop_duplicates()


@operation_context('panel', 'assemble_panel')
def assemble_panel(flows, returns, controls, calendar, universe=None,
                   method=None, sort_flows=None):
    """Firm-week panel with aligned lags.

    Parameters
    ----------
    flows: pandas.DataFrame
        Weekly flows (`aggregate.weekly_flows`).

    returns: pandas.DataFrame
        Weekly returns (`weekly_returns`).

    controls: pandas.DataFrame
        Month-keyed controls (`controls_table`).

    calendar: TradingCalendar
        Calendar the weeks refer to; must not skip week identifiers.

    universe: pandas.DataFrame or dict, optional (default=None)
        Eligibility table or mapping month -> set of symbols. Every
        symbol-week is kept when None.

    method: str, optional (default=None)
        Method whose flows are used when `flows` holds several.

    sort_flows: pandas.DataFrame, optional (default=None)
        Weekly flows aggregated as the mean of daily imbalances, attached
        as mroibvol_mean and mroibtrd_mean for portfolio sorts.

    Returns
    -------
    panel: pandas.DataFrame
        One row per eligible symbol-week, sorted by symbol and week, with
        ret, mroibvol, mroibtrd, month, the controls, their `_lag1` values
        and `_lag1` / `_lag2` values of ret and the imbalances. Rows with
        missing fields stay; studies drop them per regression.

    Raises
    ------
    CalendarGapError
        If the calendar skips a week identifier.

    """
    calendar.check_contiguous()
    flows = _select_method(flows, method)
    check_column_existence(flows, ['symbol', 'week'] + IMBALANCES)
    check_column_existence(returns, ['symbol', 'week', 'ret'])

    panel = flows[['symbol', 'week'] + IMBALANCES].merge(
        returns[['symbol', 'week', 'ret']], on=['symbol', 'week'],
        how='outer')
    weeks = calendar.week_table()[['week_id', 'month']] \
        .rename(columns={'week_id': 'week'})
    panel = panel.merge(weeks, on='week', how='left')
    if panel['month'].isna().any():
        raise DataError('Flows or returns refer to weeks outside the '
                        'calendar.')
    panel = panel.merge(controls, on=['symbol', 'month'], how='left')

    if universe is not None:
        before = len(panel)
        panel = panel.merge(_eligible_pairs(universe), on=['symbol', 'month'])
        logger.info('Universe filter kept %d of %d symbol-weeks.',
                    len(panel), before)
    if sort_flows is not None:
        means = _select_method(sort_flows, method)[
            ['symbol', 'week'] + IMBALANCES]
        panel = panel.merge(
            means.rename(columns={c: c + '_mean' for c in IMBALANCES}),
            on=['symbol', 'week'], how='left')

    panel = panel.sort_values(['symbol', 'week'], kind='mergesort') \
        .reset_index(drop=True)

    dated = {}
    for lag, columns in ((1, IMBALANCES + ['ret'] + CONTROL_COLUMNS),
                         (2, IMBALANCES + ['ret'])):
        shifted = shift_weeks(panel, columns, lag)
        for column in columns:
            name = '{}_lag{}'.format(column, lag)
            panel[name] = shifted[column]
            panel['_week_' + name] = shifted['_source_week']
            dated[name] = '_week_' + name
    check_lags_precede(panel, 'week', dated)
    panel = panel.drop(columns=list(dated.values()))

    logger.info('Assembled panel of %d symbol-weeks over %d weeks.',
                len(panel), panel['week'].nunique())
    return panel


@operation_context('panel', 'assign_subgroups')
def assign_subgroups(panel, characteristic, n_groups=3):
    """Labels every row with its characteristic group of the month.

    Within each month the symbols are ranked by the previous month-end
    characteristic and split into `n_groups` groups of equal count, ties
    broken by symbol. Rows with a missing characteristic get no label.

    Parameters
    ----------
    panel: pandas.DataFrame
        Output of `assemble_panel`.

    characteristic: str {'cap', 'price', 'turnover'}
        Sorting characteristic.

    n_groups: int, optional (default=3)
        Number of groups, labelled 0 (lowest) to n_groups - 1.

    Returns
    -------
    panel: pandas.DataFrame
        Copy of `panel` with the nullable integer column
        `<characteristic>_group`.

    Raises
    ------
    InsufficientGroupsError
        If a month has fewer symbols than groups.

    """
    return SubgroupAssigner(characteristic, n_groups).fit_transform(panel)


class SubgroupAssigner(BaseEstimator, TransformerMixin):
    """Monthly equal-count groups of a previous month-end characteristic.

    Parameters
    ----------
    characteristic: str {'cap', 'price', 'turnover'}, optional
        (default='cap')
        Sorting characteristic.

    n_groups: int, optional (default=3)
        Number of groups.

    Attributes
    ----------
    labels_: pandas.DataFrame
        Columns month, symbol and the group label.

    """
    def __init__(self, characteristic='cap', n_groups=3):
        self.characteristic = characteristic
        self.n_groups = n_groups

    @property
    def label_column(self):
        return '{}_group'.format(self.characteristic)

    def fit(self, X, y=None):
        """Ranks the symbols of every month.

        Parameters
        ----------
        X: pandas.DataFrame
            Panel with columns month, symbol and the characteristic column.

        Returns
        -------
        self: object
            Returns the instance itself.

        """
        try:
            column = CHARACTERISTICS[self.characteristic]
        except KeyError:
            raise ValueError('Unknown characteristic: {}'
                             .format(self.characteristic))
        firms = X[['month', 'symbol', column]].dropna(subset=[column]) \
            .drop_duplicates(['month', 'symbol'])
        labels = []
        for month, group in firms.groupby('month', sort=True):
            labels.append(pd.DataFrame({
                'month': month,
                'symbol': group['symbol'].values,
                self.label_column: equal_count_groups(
                    group[column].values, group['symbol'].values,
                    self.n_groups)
            }))
        self.labels_ = pd.concat(labels, ignore_index=True) if labels else \
            pd.DataFrame(columns=['month', 'symbol', self.label_column])
        return self

    def transform(self, X):
        """Attaches the labels of the fitted months to X."""
        try:
            getattr(self, 'labels_')
        except AttributeError:
            raise RuntimeError('Could not find the attribute.\n'
                               'Fitting is necessary before you do '
                               'the transformation.')

        out = X.drop(columns=[self.label_column], errors='ignore').merge(
            self.labels_, on=['month', 'symbol'], how='left')
        out.index = X.index
        out[self.label_column] = out[self.label_column].astype('Int64')
        return out
