"""Long-short portfolios of imbalance quintiles."""


import logging
import math
import warnings

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from sklearn.base import BaseEstimator

from .base import IMBALANCE_LABELS, StudyMixin, StudySpec, select_period, \
    significance_stars
from .horizon import DEFAULT_HORIZONS
from ..decorators import operation_context
from ..econ import hansen_hodrick_var, ols_hac, tstat
from ..exceptions import (
    InsufficientPeriodsError, NumericalError, SkippedFormationWarning
)
from ..panel import SubgroupAssigner
from ..utils.mathy import equal_count_groups, fsum_mean


__all__ = [
    'UNIVERSES',
    'PortfolioSeries',
    'LongShort',
    'longshort',
    'quantile_memberships',
    'holding_returns',
    'compounded_factors'
]

logger = logging.getLogger(__name__)

UNIVERSES = ('all', 'small', 'medium', 'big')
SIZE_GROUPS = {'small': 0, 'medium': 1, 'big': 2}
FACTORS = ['mkt_rf', 'smb', 'hml']


@dataclass
class PortfolioSeries:
    """Long-short returns of one universe at one horizon.

    Attributes
    ----------
    returns: pandas.DataFrame
        Indexed by formation week with the long, short and long_short
        k-week returns.

    mean, alpha: float
        Mean long-short return and three-factor alpha.

    t_mean, t_alpha: float
        Hansen-Hodrick t statistics with k - 1 lags.

    fell_back: bool
        Whether a Hansen-Hodrick variance was replaced by Newey-West.

    """
    k: int
    universe: str
    returns: pd.DataFrame
    mean: float = float('nan')
    t_mean: float = float('nan')
    alpha: float = float('nan')
    t_alpha: float = float('nan')
    fell_back: bool = False
    flag: str = ''
    loadings: dict = field(default_factory=dict)

    @property
    def n_formations(self):
        return len(self.returns)


def quantile_memberships(panel, sort_column, n_quantiles=5,
                         min_per_quantile=5):
    """Weekly quantile portfolios with previous month-end value weights.

    Parameters
    ----------
    panel: pandas.DataFrame
        Rows with symbol, week, me and `sort_column`.

    sort_column: str
        Sorting characteristic, measured in the formation week.

    n_quantiles: int, optional (default=5)
        Number of portfolios, 0 holds the lowest values.

    min_per_quantile: int, optional (default=5)
        Formations with a smaller portfolio are skipped.

    Returns
    -------
    memberships: pandas.DataFrame
        Columns week, symbol, quantile, weight; weights sum to one within
        every week and quantile.

    skipped: list
        Formation weeks left out.

    """
    candidates = panel[['week', 'symbol', 'me', sort_column]].dropna()
    candidates = candidates[candidates['me'] > 0]
    frames, skipped = [], []
    for week, group in candidates.groupby('week', sort=True):
        if len(group) < n_quantiles * min_per_quantile:
            skipped.append(week)
            continue
        quantile = equal_count_groups(group[sort_column].values,
                                      group['symbol'].values, n_quantiles)
        weight = group['me'].values / pd.Series(group['me'].values) \
            .groupby(quantile).transform('sum').values
        frames.append(pd.DataFrame({
            'week': week, 'symbol': group['symbol'].values,
            'quantile': quantile, 'weight': weight
        }))
    if skipped:
        logger.info('%d formations skipped with fewer than %d stocks per '
                    'portfolio.', len(skipped), min_per_quantile)
        warnings.warn(
            '{} formations skipped with fewer than {} stocks per portfolio.'
            .format(len(skipped), min_per_quantile), SkippedFormationWarning)
    columns = ['week', 'symbol', 'quantile', 'weight']
    memberships = pd.concat(frames, ignore_index=True) if frames else \
        pd.DataFrame(columns=columns)
    return memberships, skipped


def _forward_products(wide, horizons):
    """Maps k onto prod_{j=1..k}(1 + x_{w+j}) - 1 of a week-indexed frame."""
    weeks = np.arange(wide.index.min(), wide.index.max() + 1)
    gross = 1. + wide.reindex(weeks)
    running = pd.DataFrame(1., index=gross.index, columns=gross.columns)
    out = {}
    for j in range(1, max(horizons) + 1):
        running = running * gross.shift(-j)
        if j in horizons:
            out[j] = running - 1.
    return out


def holding_returns(weekly_returns, horizons):
    """Compounded returns over weeks w + 1 to w + k of every stock.

    Returns
    -------
    holding: dict
        Maps k onto a frame with columns week, symbol, hold; NaN when any
        week of the window is missing.

    """
    wide = weekly_returns.pivot(index='week', columns='symbol', values='ret')
    out = {}
    for k, frame in _forward_products(wide, horizons).items():
        out[k] = frame.rename_axis(index='week', columns='symbol') \
            .reset_index().melt(id_vars='week', var_name='symbol',
                                value_name='hold')
    return out


def compounded_factors(factors, horizons):
    """Factor returns compounded over weeks w + 1 to w + k."""
    wide = factors.set_index('week')[FACTORS]
    return {k: frame.rename_axis('week')
            for k, frame in _forward_products(wide, horizons).items()}


def stacked_factors(factors, k):
    """The 3k weekly factor returns of weeks w + 1 to w + k side by side."""
    wide = factors.set_index('week')[FACTORS]
    weeks = np.arange(wide.index.min(), wide.index.max() + 1)
    wide = wide.reindex(weeks)
    return pd.concat({
        '{}_{}'.format(name, j): wide[name].shift(-j)
        for j in range(1, k + 1) for name in FACTORS
    }, axis=1).rename_axis('week')


def _leg_returns(memberships, holding, n_quantiles):
    frame = memberships.merge(holding, on=['week', 'symbol'], how='left') \
        .dropna(subset=['hold'])
    frame['weighted'] = frame['weight'] * frame['hold']
    sums = frame.groupby(['week', 'quantile'])[['weighted', 'weight']].sum()
    legs = (sums['weighted'] / sums['weight']).unstack('quantile')
    legs = legs.reindex(columns=range(n_quantiles))
    returns = pd.DataFrame({
        'long': legs[n_quantiles - 1], 'short': legs[0]
    })
    returns['long_short'] = returns['long'] - returns['short']
    return returns.dropna()


class LongShort(BaseEstimator, StudyMixin):
    """Buys the top imbalance quintile and shorts the bottom one.

    Portfolios are formed every week on the formation-week imbalance,
    value-weighted with previous month-end market values and held for k
    weeks, giving overlapping k-week returns. The mean return and the
    three-factor alpha are tested with Hansen-Hodrick standard errors with
    k - 1 lags.

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period and imbalance. Options read: `sort` ('mean' sorts
        on the mean of daily imbalances when the panel carries it),
        `factor_mode` ('compounded' or 'stacked').

    horizons: tuple, optional (default=(1, 2, 4, 6, 8, 10, 12))
        Holding periods in weeks.

    universes: tuple, optional (default=('all', 'small', 'medium', 'big'))
        All stocks and previous month-end size terciles.

    n_quantiles: int, optional (default=5)
        Number of portfolios.

    min_per_quantile: int, optional (default=5)
        Minimum number of stocks of every portfolio.

    Attributes
    ----------
    series_: dict
        Maps (universe, k) onto a PortfolioSeries.

    memberships_: dict
        Maps a universe onto its portfolio memberships.

    """
    table = 'table6'

    def __init__(self, spec=None, horizons=DEFAULT_HORIZONS,
                 universes=UNIVERSES, n_quantiles=5, min_per_quantile=5):
        self.spec = spec
        self.horizons = horizons
        self.universes = universes
        self.n_quantiles = n_quantiles
        self.min_per_quantile = min_per_quantile

    def _sort_column(self, panel):
        spec = self.spec or StudySpec()
        column = spec.imbalance
        if spec.option('sort', 'mean') == 'mean' and \
                column + '_mean' in panel.columns:
            return column + '_mean'
        return column

    def fit(self, X, y=None, weekly_returns=None, factors=None):
        """Forms the portfolios and tests their returns.

        Parameters
        ----------
        X: pandas.DataFrame
            Panel from `panel.assemble_panel`.

        weekly_returns: pandas.DataFrame, optional (default=None)
            Weekly returns of all stocks (symbol, week, ret); the panel's
            returns when None.

        factors: pandas.DataFrame
            Weekly factor returns (`panel.weekly_factors`).

        Returns
        -------
        self: object
            Returns the instance itself.

        """
        if factors is None:
            raise ValueError('Factor returns are required.')
        spec = self.spec or StudySpec()
        factor_mode = spec.option('factor_mode', 'compounded')
        horizons = tuple(self.horizons)
        if weekly_returns is None:
            weekly_returns = X[['symbol', 'week', 'ret']]
        holding = holding_returns(weekly_returns, horizons)
        compounded = compounded_factors(factors, horizons)

        panel = select_period(X, spec)
        sort_column = self._sort_column(panel)
        self.series_, self.memberships_, self.skipped_ = {}, {}, {}
        sizes = None
        for universe in self.universes:
            if universe == 'all':
                members = panel
            else:
                if sizes is None:
                    sizes = SubgroupAssigner('cap', 3).fit_transform(panel)
                in_group = sizes['cap_group'].eq(SIZE_GROUPS[universe]) \
                    .fillna(False).astype(bool)
                members = sizes[in_group]
            memberships, skipped = quantile_memberships(
                members, sort_column, self.n_quantiles, self.min_per_quantile)
            self.memberships_[universe] = memberships
            self.skipped_[universe] = skipped
            for k in horizons:
                returns = _leg_returns(memberships, holding[k],
                                       self.n_quantiles)
                if factor_mode == 'stacked':
                    regressors = stacked_factors(factors, k)
                else:
                    regressors = compounded[k]
                self.series_[universe, k] = self._test(
                    universe, k, returns, regressors)
        return self

    def _test(self, universe, k, returns, regressors):
        series = PortfolioSeries(k=k, universe=universe, returns=returns)
        values = returns['long_short'].values
        lags = k - 1
        try:
            variance, fell_back = hansen_hodrick_var(values, lags)
            series.mean = fsum_mean(values)
            series.t_mean = tstat(series.mean, math.sqrt(variance))[0]
            series.fell_back = fell_back

            data = returns[['long_short']].join(regressors, how='left') \
                .dropna()
            fit = ols_hac(data.drop(columns='long_short'),
                          data['long_short'], lags, kernel='uniform')
            series.alpha = float(fit.fit.params.iloc[0])
            series.t_alpha = float(fit.tstat.iloc[0])
            series.fell_back = series.fell_back or fit.fell_back
            series.loadings = fit.fit.params.iloc[1:].to_dict()
        except (InsufficientPeriodsError, NumericalError) as e:
            logger.info('Long-short %s k=%d flagged: %s', universe, k, e)
            series.flag = 'INSUFFICIENT_PERIODS'
        return series

    def tabulate(self):
        self._check_fitted('series_')
        spec = self.spec or StudySpec()
        rows = []
        for (universe, k), series in self.series_.items():
            rows.append({
                'panel': spec.label,
                'imbalance': IMBALANCE_LABELS.get(spec.imbalance,
                                                  spec.imbalance),
                'return_mode': spec.return_mode,
                'universe': universe.capitalize(), 'k': k,
                'mean': series.mean, 't_mean': series.t_mean,
                'stars_mean': significance_stars(series.t_mean),
                'alpha': series.alpha, 't_alpha': series.t_alpha,
                'stars_alpha': significance_stars(series.t_alpha),
                'n_formations': series.n_formations,
                'n_skipped': len(self.skipped_[universe]),
                'hh_fallback': series.fell_back, 'flag': series.flag
            })
        return pd.DataFrame(rows)


@operation_context('studies', 'longshort')
def longshort(panel, weekly_returns, factors, spec=None,
              horizons=DEFAULT_HORIZONS, **kwargs):
    """Table of the long-short strategies, see `LongShort`."""
    study = LongShort(spec, tuple(horizons), **kwargs)
    return study.fit(panel, weekly_returns=weekly_returns,
                     factors=factors).tabulate()
