"""Market-adjusted returns around intense retail buying and selling."""


import logging
import math

from dataclasses import dataclass

import numpy as np
import pandas as pd

from sklearn.base import BaseEstimator

from .base import IMBALANCE_LABELS, StudyMixin, StudySpec, select_period, \
    significance_stars
from ..aggregate import weekly_flows
from ..decorators import operation_context
from ..econ import newey_west_var, tstat
from ..exceptions import InsufficientPeriodsError
from ..utils.mathy import equal_count_groups, fsum_mean


__all__ = [
    'GROUPS',
    'DEFAULT_OFFSETS',
    'EventStudyResult',
    'EventStudy',
    'eventstudy',
    'event_windows',
    'decile_groups'
]

logger = logging.getLogger(__name__)

GROUPS = ('Intense Selling', 'Selling', 'Buying', 'Intense Buying')
DEFAULT_OFFSETS = (-20, -15, -10, -5, 0, 5, 10, 15, 20)
DEFAULT_CUTOFFS = (1, 5, 9)
BLOCKS = ('cumulative', 'weekly')
WINDOW_DAYS = 5
N_DECILES = 10


def event_windows(start, end, k, anchor='split'):
    """Trading-day windows of offset k around a formation week.

    Parameters
    ----------
    start, end: int or numpy.ndarray
        Positions of the first and last trading day of the formation week.

    k: int
        Offset in trading days.

    anchor: str {'split', 'week_end'}, optional (default='split')
        - `split`: negative offsets end the day before the week starts,
          offset 0 is the week itself and positive offsets start the day
          after it ends.
        - `week_end`: every window is measured from the last day of the
          week.

    Returns
    -------
    windows: dict
        Maps 'cumulative' and 'weekly' onto inclusive (first, last)
        positions. A window with first > last is empty.

    """
    start = np.asarray(start)
    end = np.asarray(end)
    if anchor == 'split':
        if k < 0:
            return {'cumulative': (start + k, start - 1),
                    'weekly': (start + k, start + k + WINDOW_DAYS - 1)}
        if k == 0:
            return {'cumulative': (start, end), 'weekly': (start, end)}
        return {'cumulative': (end + 1, end + k),
                'weekly': (end + k - WINDOW_DAYS + 1, end + k)}
    if anchor == 'week_end':
        cumulative = (end + k + 1, end) if k < 0 else (end + 1, end + k)
        return {'cumulative': cumulative,
                'weekly': (end + k - WINDOW_DAYS + 1, end + k)}
    raise ValueError('Unknown anchor: {}'.format(anchor))


def _column(block, k):
    return '{}_{:+d}'.format(block, k)


def decile_groups(deciles, cutoffs=DEFAULT_CUTOFFS):
    """Maps deciles 1..10 onto the four groups 0..3 by inclusive cutoffs."""
    return np.searchsorted(np.asarray(cutoffs), deciles, side='left')


@dataclass
class EventStudyResult:
    """Mean market-adjusted returns per block, group and offset.

    Attributes
    ----------
    table: pandas.DataFrame
        Columns block, group, k, mean, tstat, stars, n_weeks.

    weekly_means: pandas.DataFrame
        Cross-sectional means per formation week, block, group and offset.

    """
    table: pd.DataFrame
    weekly_means: pd.DataFrame

    def cell(self, block, group, k):
        row = self.table[(self.table['block'] == block)
                         & (self.table['group'] == group)
                         & (self.table['k'] == k)]
        return row.iloc[0]


class _LogReturnTape(object):
    """Cumulative log gross returns and missing counts by trading day.

    Days with a gross return of zero are counted apart from the finite
    logs; a window holding one compounds to -1.
    """

    def __init__(self, log_returns):
        values = np.asarray(log_returns, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        missing = np.isnan(values)
        wiped = np.isneginf(values)
        zeros = np.zeros((1, values.shape[1]))
        self.sums = np.vstack([zeros, np.cumsum(
            np.where(missing | wiped, 0., values), axis=0)])
        self.gaps = np.vstack([zeros, np.cumsum(missing, axis=0)])
        self.wipeouts = np.vstack([zeros, np.cumsum(wiped, axis=0)])
        self.n_days = values.shape[0]

    @classmethod
    def from_returns(cls, returns):
        with np.errstate(divide='ignore'):
            return cls(np.log1p(np.asarray(returns, dtype=float)))

    def compound(self, first, last, column=None):
        first = np.asarray(first)
        last = np.asarray(last)
        column = np.zeros(len(first), dtype=np.int64) if column is None \
            else np.asarray(column)
        empty = first > last
        inside = (first >= 0) & (last < self.n_days) | empty
        a = np.clip(first, 0, self.n_days)
        b = np.clip(last + 1, 0, self.n_days)
        b = np.maximum(a, b)
        log_sum = self.sums[b, column] - self.sums[a, column]
        gaps = self.gaps[b, column] - self.gaps[a, column]
        wipeouts = self.wipeouts[b, column] - self.wipeouts[a, column]
        out = np.where(wipeouts > 0, -1., np.expm1(log_sum))
        out = np.where(inside & (gaps == 0), out, np.nan)
        return np.where(empty, 0., out)


class EventStudy(BaseEstimator, StudyMixin):
    """Returns around weeks of extreme retail order imbalance.

    Every formation week the stocks are ranked into imbalance deciles which
    form four groups (deciles 1, 2-5, 6-9 and 10 by default). For each
    offset k the study averages market-adjusted returns, compounded stock
    return minus compounded market return over the same days, first across
    the stocks of a group and then across formation weeks, with
    Newey-West t statistics (4 lags by default).

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period, imbalance and lags. Options read: `weekly`
        ('ratio' or 'mean' weekly imbalance).

    offsets: tuple, optional (default=(-20, -15, ..., 20))
        Offsets k in trading days.

    cutoffs: tuple, optional (default=(1, 5, 9))
        Last decile of the first three groups.

    anchor: str {'split', 'week_end'}, optional (default='split')
        Window alignment, see `event_windows`.

    Attributes
    ----------
    result_: EventStudyResult

    """
    table = 'table8'

    def __init__(self, spec=None, offsets=DEFAULT_OFFSETS,
                 cutoffs=DEFAULT_CUTOFFS, anchor='split'):
        self.spec = spec
        self.offsets = offsets
        self.cutoffs = cutoffs
        self.anchor = anchor

    def fit(self, X, y=None, daily_returns=None, market=None, calendar=None,
            universe=None):
        """Ranks the stocks and averages their adjusted returns.

        Parameters
        ----------
        X: pandas.DataFrame
            Daily flows (`aggregate.daily_flows`).

        daily_returns: pandas.DataFrame
            Daily stock returns (symbol, date, ret).

        market: pandas.DataFrame
            Daily market returns (date, mkt).

        calendar: TradingCalendar
            Trading days and weeks.

        universe: pandas.DataFrame, optional (default=None)
            Eligibility table restricting the formation-week stocks.

        Returns
        -------
        self: object
            Returns the instance itself.

        """
        spec = self.spec or StudySpec()
        lags = spec.resolved_lags(self.table)
        flows = X[X['method'] == spec.method] if 'method' in X.columns else X
        weekly = weekly_flows(flows, calendar, spec.option('weekly', 'ratio'))
        weeks = calendar.week_table()
        weekly = weekly.merge(
            weeks.rename(columns={'week_id': 'week'}), on='week')
        weekly = select_period(weekly, spec).dropna(subset=[spec.imbalance])
        if universe is not None:
            weekly = weekly.merge(
                universe.loc[universe['eligible'], ['symbol', 'month']],
                on=['symbol', 'month'])

        members = self._form_groups(weekly, spec.imbalance)
        values = self._adjusted_returns(members, daily_returns, market,
                                        calendar)
        self.result_ = self._summarize(values, lags)
        return self

    def _form_groups(self, weekly, imbalance):
        frames = []
        for week, group in weekly.groupby('week', sort=True):
            if len(group) < N_DECILES:
                logger.info('Week %s skipped with %d stocks.', week,
                            len(group))
                continue
            deciles = equal_count_groups(group[imbalance].values,
                                         group['symbol'].values,
                                         N_DECILES) + 1
            frames.append(pd.DataFrame({
                'week': week, 'symbol': group['symbol'].values,
                'group': decile_groups(deciles, self.cutoffs),
                'start': group['start'].values, 'end': group['end'].values
            }))
        if not frames:
            raise InsufficientPeriodsError(
                'No formation week has {} stocks.'.format(N_DECILES))
        return pd.concat(frames, ignore_index=True)

    def _adjusted_returns(self, members, daily_returns, market, calendar):
        symbols = np.unique(members['symbol'].values)
        returns = daily_returns[daily_returns['symbol'].isin(symbols)]
        position = calendar.position(returns['date'])
        known = position >= 0
        stock = np.full((len(calendar), len(symbols)), np.nan)
        stock[position[known],
              np.searchsorted(symbols, returns['symbol'].values[known])] = \
            returns['ret'].values[known]
        index_returns = np.full(len(calendar), np.nan)
        market_position = calendar.position(market['date'])
        index_returns[market_position[market_position >= 0]] = \
            market['mkt'].values[market_position >= 0]

        stock_tape = _LogReturnTape.from_returns(stock)
        market_tape = _LogReturnTape.from_returns(index_returns)
        column = np.searchsorted(symbols, members['symbol'].values)
        start = calendar.position(members['start'])
        end = calendar.position(members['end'])

        values = members[['week', 'group']].copy()
        for k in self.offsets:
            for block, (first, last) in event_windows(
                    start, end, k, self.anchor).items():
                values[_column(block, k)] = \
                    stock_tape.compound(first, last, column) \
                    - market_tape.compound(first, last)
        return values

    def _summarize(self, values, lags):
        columns = [_column(b, k) for k in self.offsets for b in BLOCKS]
        means = values.groupby(['week', 'group'], sort=True)[columns].mean()
        rows = []
        for group_index, group_name in enumerate(GROUPS):
            try:
                per_week = means.xs(group_index, level='group')
            except KeyError:
                per_week = pd.DataFrame(columns=columns)
            for block in BLOCKS:
                for k in self.offsets:
                    series = per_week[_column(block, k)].dropna().values \
                        if len(per_week) else np.array([])
                    mean, t = float('nan'), float('nan')
                    if len(series):
                        mean = fsum_mean(series)
                    if len(series) >= lags + 2:
                        se = math.sqrt(max(newey_west_var(series, lags), 0.))
                        t = tstat(mean, se)[0]
                    rows.append({'block': block, 'group': group_name, 'k': k,
                                 'mean': mean, 'tstat': t,
                                 'stars': significance_stars(t),
                                 'n_weeks': len(series)})
        return EventStudyResult(pd.DataFrame(rows), means)

    def tabulate(self):
        self._check_fitted('result_')
        spec = self.spec or StudySpec()
        table = self.result_.table.copy()
        table.insert(0, 'panel', spec.label)
        table.insert(1, 'imbalance', IMBALANCE_LABELS.get(spec.imbalance,
                                                          spec.imbalance))
        table.insert(2, 'return_mode', spec.return_mode)
        return table


@operation_context('studies', 'eventstudy')
def eventstudy(flows, daily_returns, market, calendar, spec=None,
               universe=None, **kwargs):
    """Fits the event study, see `EventStudy`.

    Returns
    -------
    result: EventStudyResult

    """
    study = EventStudy(spec, **kwargs)
    return study.fit(flows, daily_returns=daily_returns, market=market,
                     calendar=calendar, universe=universe).result_
