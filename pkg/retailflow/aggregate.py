"""Daily and weekly marketable retail order flow."""


import logging

from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.stats as stats

from sklearn.base import BaseEstimator, TransformerMixin

from .classify import BUY, METHODS
from .decorators import operation_context
from .exceptions import DataError, DegenerateError, EmptySeriesError
from .mdio import TradingCalendar
from .utils.validation import check_column_existence


__all__ = [
    'FLOW_VARIABLES',
    'DailyFlow',
    'SummaryStats',
    'FlowAggregator',
    'imbalance',
    'accumulate_daily',
    'daily_flows',
    'weekly_mroib',
    'weekly_flows',
    'summarize',
    'method_correlation',
    'summary_table'
]

logger = logging.getLogger(__name__)

FLOW_VARIABLES = ['mrbvol', 'mrsvol', 'mrbtrd', 'mrstrd', 'mroibvol',
                  'mroibtrd']
COUNT_VARIABLES = FLOW_VARIABLES[:4]


@dataclass(frozen=True)
class DailyFlow:
    """Retail flow of one symbol-day under one method.

    Imbalances are NaN when there was no signed trade.
    """
    symbol: str
    date: object
    method: str
    mrbvol: int = 0
    mrsvol: int = 0
    mrbtrd: int = 0
    mrstrd: int = 0
    mroibvol: float = float('nan')
    mroibtrd: float = float('nan')


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std: float
    median: float
    q1: float
    q3: float

    def as_dict(self):
        return {'n': self.n, 'mean': self.mean, 'std': self.std,
                'median': self.median, 'q1': self.q1, 'q3': self.q3}


def imbalance(buys, sells):
    """(buys - sells) / (buys + sells), NaN where nothing was traded."""
    buys = np.asarray(buys, dtype=float)
    sells = np.asarray(sells, dtype=float)
    total = buys + sells
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(total > 0, (buys - sells) / total, np.nan)


def accumulate_daily(signed, symbol=None, date=None, method=None):
    """Folds the signed trades of one symbol-day-method into a DailyFlow.

    Parameters
    ----------
    signed: iterable of SignedRetailTrade or pandas.DataFrame
        Trades sharing symbol, date and method. A DataFrame needs the
        `direction` and `size` columns.

    symbol, date, method: optional (default=None)
        Identify the flow when `signed` is empty.

    Returns
    -------
    flow: DailyFlow

    """
    if isinstance(signed, pd.DataFrame):
        directions = signed['direction'].tolist()
        sizes = signed['size'].astype(np.int64).tolist()
        first = signed.iloc[0] if len(signed) else pd.Series(dtype=object)
        symbol = first.get('symbol') if symbol is None else symbol
        date = first.get('date') if date is None else date
        method = first.get('method') if method is None else method
    else:
        signed = list(signed)
        directions = [s.direction for s in signed]
        sizes = [int(s.trade.size) for s in signed]
        if signed:
            symbol = symbol or signed[0].trade.symbol
            date = date if date is not None else signed[0].trade.date
            method = method or signed[0].method

    mrbvol = sum(q for d, q in zip(directions, sizes) if d == BUY)
    mrsvol = sum(q for d, q in zip(directions, sizes) if d != BUY)
    mrbtrd = sum(1 for d in directions if d == BUY)
    mrstrd = len(directions) - mrbtrd
    return DailyFlow(
        symbol=symbol, date=date, method=method,
        mrbvol=mrbvol, mrsvol=mrsvol, mrbtrd=mrbtrd, mrstrd=mrstrd,
        mroibvol=float(imbalance(mrbvol, mrsvol)),
        mroibtrd=float(imbalance(mrbtrd, mrstrd))
    )


def _with_imbalances(frame):
    frame['mroibvol'] = imbalance(frame['mrbvol'], frame['mrsvol'])
    frame['mroibtrd'] = imbalance(frame['mrbtrd'], frame['mrstrd'])
    return frame


@operation_context('aggregate', 'daily_flows')
def daily_flows(signed):
    """DailyFlow frame of every symbol-day-method in a signed-trade frame.

    Parameters
    ----------
    signed: pandas.DataFrame
        Signed trades with columns symbol, date, method, direction, size.

    Returns
    -------
    flows: pandas.DataFrame
        Columns symbol, date, method and `FLOW_VARIABLES`, sorted by method,
        symbol and date.

    """
    check_column_existence(signed, ['symbol', 'date', 'method', 'direction',
                                    'size'])
    buy = (signed['direction'] == BUY).to_numpy()
    size = signed['size'].to_numpy(dtype=np.int64)
    parts = pd.DataFrame({
        'symbol': signed['symbol'].values,
        'date': signed['date'].values,
        'method': signed['method'].values,
        'mrbvol': np.where(buy, size, 0),
        'mrsvol': np.where(buy, 0, size),
        'mrbtrd': buy.astype(np.int64),
        'mrstrd': (~buy).astype(np.int64)
    })
    flows = parts.groupby(['method', 'symbol', 'date'], sort=True)[
        COUNT_VARIABLES].sum().reset_index()
    flows = _with_imbalances(flows)
    return flows[['symbol', 'date', 'method'] + FLOW_VARIABLES]


def _aggregate_week(flows, how):
    keys = ['method', 'symbol', 'week_id']
    grouped = flows.groupby(keys, sort=True)
    weekly = grouped[COUNT_VARIABLES].sum()
    weekly['n_days'] = grouped.size()
    weekly = weekly.reset_index()
    if how == 'ratio':
        weekly = _with_imbalances(weekly)
    elif how == 'mean':
        means = grouped[['mroibvol', 'mroibtrd']].mean().reset_index()
        weekly = weekly.merge(means, on=keys, how='left')
    else:
        raise ValueError('Unknown weekly aggregation: {}'.format(how))
    return weekly.rename(columns={'week_id': 'week'})[
        ['symbol', 'week', 'method'] + FLOW_VARIABLES + ['n_days']]


@operation_context('aggregate', 'weekly_flows')
def weekly_flows(flows, calendar, how='ratio'):
    """Weekly retail flow of every symbol-week-method.

    Parameters
    ----------
    flows: pandas.DataFrame
        Output of `daily_flows`.

    calendar: TradingCalendar
        Assigns dates to weeks. Flows on unknown dates are ignored.

    how: str {'ratio', 'mean'}, optional (default='ratio')
        - `ratio`: imbalance of the week's summed volumes and counts.
        - `mean`: mean of the daily imbalances over the days with flow.

    Returns
    -------
    weekly: pandas.DataFrame
        Columns symbol, week, method, `FLOW_VARIABLES` and n_days.

    """
    flows = flows.assign(week_id=calendar.week_of(flows['date']))
    unknown = flows['week_id'] < 0
    if unknown.any():
        logger.info('%d daily flows outside the calendar ignored.',
                    int(unknown.sum()))
    return _aggregate_week(flows[~unknown], how)


@operation_context('aggregate', 'weekly_mroib')
def weekly_mroib(flows, calendar, week, how='ratio'):
    """Weekly imbalances of one calendar week (see `weekly_flows`)."""
    if week not in set(calendar.weeks):
        raise DataError('Week {} is not in the calendar.'.format(week))
    dates = calendar.days_in_week(week)
    in_week = pd.to_datetime(flows['date']).isin(dates)
    return weekly_flows(flows[in_week], calendar, how)


class FlowAggregator(BaseEstimator, TransformerMixin):
    """Aggregates daily flows onto weeks.

    Parameters
    ----------
    how: str {'ratio', 'mean'}, optional (default='ratio')
        Weekly aggregation, see `weekly_flows`.

    week_convention: str {'calendar', 'rolling5'}, optional
        (default='calendar')
        Convention of the calendar built in `fit` when none is given.

    calendar: TradingCalendar, optional (default=None)
        Calendar to use instead of one built from the flow dates.

    Attributes
    ----------
    calendar_: TradingCalendar
        Calendar weeks are assigned with.

    """
    def __init__(self, how='ratio', week_convention='calendar',
                 calendar=None):
        self.how = how
        self.week_convention = week_convention
        self.calendar = calendar

    def fit(self, X, y=None):
        """Fixes the calendar.

        Parameters
        ----------
        X: pandas.DataFrame
            Daily flows as returned by `daily_flows`.

        Returns
        -------
        self: object
            Returns the instance itself.

        """
        if self.calendar is not None:
            self.calendar_ = self.calendar
        else:
            self.calendar_ = TradingCalendar.from_dates(
                X['date'], self.week_convention
            )
        return self

    def transform(self, X):
        """Weekly flows of the daily flows in X."""
        try:
            getattr(self, 'calendar_')
        except AttributeError:
            raise RuntimeError('Could not find the attribute.\n'
                               'Fitting is necessary before you do '
                               'the transformation.')

        return weekly_flows(X, self.calendar_, self.how)


@operation_context('aggregate', 'summarize')
def summarize(values):
    """Summary statistics of a series, missing values dropped.

    Quartiles interpolate linearly between order statistics (type 7) and
    the standard deviation is the sample one (n - 1).

    Raises
    ------
    EmptySeriesError
        If no value is left.

    """
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    if not len(values):
        raise EmptySeriesError('Cannot summarize an empty series.')
    q1, median, q3 = np.quantile(values, [.25, .5, .75])
    std = float(np.std(values, ddof=1)) if len(values) > 1 else float('nan')
    return SummaryStats(
        n=len(values), mean=float(np.mean(values)), std=std,
        median=float(median), q1=float(q1), q3=float(q3)
    )


@operation_context('aggregate', 'method_correlation')
def method_correlation(flows_bjzz, flows_qmp, variable):
    """Pooled Pearson correlation of one variable across the two methods.

    Flows are joined on (symbol, date); pairs where either side is missing
    are dropped.

    Raises
    ------
    DegenerateError
        With fewer than two pairs or a constant side.

    """
    keys = ['symbol', 'date']
    joined = flows_bjzz[keys + [variable]].merge(
        flows_qmp[keys + [variable]], on=keys, suffixes=('_a', '_b')
    ).dropna(subset=[variable + '_a', variable + '_b'])
    if len(joined) < 2:
        raise DegenerateError(
            'Correlation of {} needs at least two pairs, got {}.'
            .format(variable, len(joined))
        )
    a = joined[variable + '_a'].to_numpy(dtype=float)
    b = joined[variable + '_b'].to_numpy(dtype=float)
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateError(
            'Correlation of {} is undefined for a constant series.'
            .format(variable)
        )
    return float(stats.pearsonr(a, b)[0])


@operation_context('aggregate', 'summary_table')
def summary_table(flows, periods=None, variables=FLOW_VARIABLES):
    """Summary statistics of daily flows per period and method.

    Parameters
    ----------
    flows: pandas.DataFrame
        Output of `daily_flows` holding one or both methods.

    periods: dict, optional (default=None)
        Maps a period label onto an inclusive (start, end) date pair. One
        period labelled 'all' by default.

    variables: list, optional (default=FLOW_VARIABLES)
        Flow variables to summarize.

    Returns
    -------
    table: pandas.DataFrame
        Columns variable, period, method, n, mean, std, median, q1, q3,
        corr. `corr` is the BJZZ-QMP correlation of the variable in the
        period, NaN when undefined or when a method is absent.

    """
    dates = pd.to_datetime(flows['date'])
    if periods is None:
        periods = {'all': (dates.min(), dates.max())}
    rows = []
    for label, (start, end) in periods.items():
        in_period = flows[(dates >= pd.Timestamp(start))
                          & (dates <= pd.Timestamp(end))]
        by_method = {m: in_period[in_period['method'] == m] for m in METHODS}
        for variable in variables:
            try:
                corr = method_correlation(
                    by_method[METHODS[0]], by_method[METHODS[1]], variable
                )
            except DegenerateError as e:
                logger.info('No correlation for %s in %s: %s', variable,
                            label, e)
                corr = float('nan')
            for method in METHODS:
                try:
                    summary = summarize(by_method[method][variable]).as_dict()
                except EmptySeriesError:
                    continue
                rows.append(dict(variable=variable, period=label,
                                 method=method, corr=corr, **summary))
    columns = ['variable', 'period', 'method', 'n', 'mean', 'std', 'median',
               'q1', 'q3', 'corr']
    return pd.DataFrame(rows, columns=columns)
