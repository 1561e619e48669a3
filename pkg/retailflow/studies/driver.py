"""Runs the tables over the grid of methods, periods and imbalances."""


import logging
import string

from dataclasses import dataclass, field, replace

import pandas as pd

from .base import StudySpec
from .decomposition import Decomposition
from .determinants import Determinants
from .eventstudy import EventStudy
from .horizon import DEFAULT_HORIZONS, HorizonPrediction
from .longshort import LongShort
from .prediction import Prediction
from .subgroups import SubgroupPrediction
from ..aggregate import summary_table, weekly_flows
from ..classify import METHODS
from ..decorators import operation_context
from ..exceptions import ConfigError
from ..mdio import TradingCalendar, eligibility_table
from ..panel import (
    IMBALANCES, RETURN_MODES, assemble_panel, controls_table, daily_return,
    market_returns, weekly_factors, weekly_returns
)


__all__ = [
    'TABLES',
    'DEFAULT_PERIODS',
    'StudyData',
    'build_study_data',
    'external_benchmark',
    'panel_specs',
    'run_tables',
    'with_lags'
]

logger = logging.getLogger(__name__)

TABLES = ('table1', 'table2', 'table3', 'table4', 'table5', 'table6',
          'table7', 'table8')
DEFAULT_PERIODS = {
    '2010-2015': ('2010-01', '2015-12'),
    '2016-2021': ('2016-01', '2021-12')
}
# Tables reported side by side for both imbalance variables.
BOTH_IMBALANCES = ('table2', 'table3', 'table5', 'table7')


@dataclass
class StudyData:
    """Inputs shared by the table studies.

    Attributes
    ----------
    panels: dict
        Maps (method, return_mode) onto an assembled panel.

    flows: pandas.DataFrame
        Daily flows of both methods (`aggregate.daily_flows`).

    calendar: TradingCalendar

    factors: pandas.DataFrame, optional
        Weekly factor returns (`panel.weekly_factors`), needed by table 6.

    weekly_returns, daily_returns, market: dict, optional
        Map a return mode onto weekly stock returns, daily stock returns
        and daily market returns.

    universe: pandas.DataFrame, optional
        Eligibility table.

    """
    panels: dict
    flows: pd.DataFrame
    calendar: object
    factors: pd.DataFrame = None
    weekly_returns: dict = field(default_factory=dict)
    daily_returns: dict = field(default_factory=dict)
    market: dict = field(default_factory=dict)
    universe: pd.DataFrame = None


def panel_specs(periods=None, methods=METHODS, **kwargs):
    """Specs of the four-panel grid, periods outermost.

    >>> [s.label for s in panel_specs()]
    ['BJZZ 2010-2015', 'QMP 2010-2015', 'BJZZ 2016-2021', 'QMP 2016-2021']

    """
    periods = DEFAULT_PERIODS if periods is None else periods
    return [StudySpec(method=method, period=tuple(period),
                      period_label=label, **kwargs)
            for label, period in periods.items() for method in methods]


def _period_dates(spec):
    start, end = (pd.Period(p, freq='M') for p in spec.period)
    return start.start_time.normalize(), end.end_time.normalize()


def _table1(data, specs):
    periods = {}
    for spec in specs:
        if spec.period is None:
            dates = pd.to_datetime(data.flows['date'])
            periods[spec.period_label] = (dates.min(), dates.max())
        else:
            periods[spec.period_label] = _period_dates(spec)
    return summary_table(data.flows, periods)


def _study(name, spec, n_jobs):
    if name == 'table2':
        return Determinants(spec, n_jobs)
    if name == 'table3':
        return Prediction(spec, n_jobs)
    if name == 'table4':
        return SubgroupPrediction(spec, n_groups=spec.option('subgroups', 3),
                                  n_jobs=n_jobs)
    if name == 'table5':
        horizons = spec.option('horizons', DEFAULT_HORIZONS)
        return HorizonPrediction(spec, horizons, n_jobs)
    if name == 'table6':
        kwargs = {key: spec.option(key) for key in (
            'horizons', 'universes', 'n_quantiles', 'min_per_quantile')
            if spec.option(key) is not None}
        return LongShort(spec, **kwargs)
    if name == 'table7':
        return Decomposition(spec, n_jobs)
    if name == 'table8':
        kwargs = {key: spec.option(key) for key in (
            'offsets', 'cutoffs', 'anchor') if spec.option(key) is not None}
        return EventStudy(spec, **kwargs)
    raise ValueError('Unknown table: {}'.format(name))


def _fit_tabulate(name, spec, data, n_jobs):
    study = _study(name, spec, n_jobs)
    if name == 'table8':
        return study.fit_tabulate(
            data.flows, daily_returns=data.daily_returns[spec.return_mode],
            market=data.market[spec.return_mode], calendar=data.calendar,
            universe=data.universe)
    panel = data.panels[spec.method, spec.return_mode]
    if name == 'table6':
        return study.fit_tabulate(
            panel, weekly_returns=data.weekly_returns.get(spec.return_mode),
            factors=data.factors)
    return study.fit_tabulate(panel)


@operation_context('studies', 'run_tables')
def run_tables(data, specs, tables=TABLES, imbalances=IMBALANCES, n_jobs=1):
    """Computes the requested tables for every spec.

    Parameters
    ----------
    data: StudyData
        Panels, flows and returns the studies read.

    specs: list of StudySpec
        One spec per panel of the tables, labelled (a), (b), ... in order.

    tables: iterable, optional (default=TABLES)
        Names 'table1' to 'table8'.

    imbalances: iterable, optional (default=('mroibvol', 'mroibtrd'))
        Imbalance variables of tables 2, 3, 5 and 7; the other tables use
        the spec's own imbalance.

    n_jobs: int, optional (default=1)
        Number of jobs of the cross-sectional regressions.

    Returns
    -------
    tables: dict
        Maps a table name onto one long-format DataFrame stacking all
        panels.

    """
    out = {}
    for name in tables:
        if name == 'table1':
            out[name] = _table1(data, specs)
            continue
        frames = []
        for letter, spec in zip(string.ascii_lowercase, specs):
            variants = [spec.with_imbalance(i) for i in imbalances] \
                if name in BOTH_IMBALANCES else [spec]
            for variant in variants:
                logger.info('Computing %s for %s (%s).', name, variant.label,
                            variant.imbalance)
                frame = _fit_tabulate(name, variant, data, n_jobs)
                frame['panel'] = '({}) {}'.format(letter, variant.label)
                frames.append(frame)
        out[name] = pd.concat(frames, ignore_index=True)
    return out


def with_lags(specs, lags):
    """The same specs with a lag override, e.g. the 10-lag robustness run."""
    return [replace(spec, lags=lags) for spec in specs]


def external_benchmark(factors=None, external_market=None):
    """Daily market series of `eventstudy.market = external`.

    A parsed market file wins over mkt_rf + rf of the factor returns.
    """
    if external_market is not None:
        return external_market[['date', 'mkt']].reset_index(drop=True)
    if factors is None:
        raise ConfigError('eventstudy.market = external needs '
                          'input.market or factor returns.')
    return pd.DataFrame({'date': pd.to_datetime(factors['date']).values,
                         'mkt': (factors['mkt_rf'] + factors['rf']).values})


@operation_context('studies', 'build_study_data')
def build_study_data(flows, daily, calendar=None, factors=None,
                     return_modes=RETURN_MODES, methods=METHODS,
                     weekly='ratio', sort='mean', week_convention='calendar',
                     turnover_scale=100, market='vw', external_market=None):
    """Assembles every input of `run_tables` from parsed files.

    Parameters
    ----------
    flows: pandas.DataFrame
        Daily flows of the methods (`aggregate.daily_flows`).

    daily: pandas.DataFrame
        Daily security records (`mdio.parse_daily`).

    calendar: TradingCalendar, optional (default=None)
        Built from the daily dates with `week_convention` when None.

    factors: pandas.DataFrame, optional (default=None)
        Factor returns (`mdio.parse_factors`); tables 6 and the external
        market need them.

    return_modes: iterable, optional (default=('bidask', 'close'))

    methods: iterable, optional (default=('BJZZ', 'QMP'))

    weekly, sort: str {'ratio', 'mean'}, optional
        Weekly aggregation of the regression and of the sorting imbalance.

    market: str {'vw', 'external'}, optional (default='vw')
        Value-weighted market of the universe or an external series.

    external_market: pandas.DataFrame, optional (default=None)
        Daily market returns (`mdio.parse_market`) used when `market` is
        'external'; mkt_rf + rf of `factors` when None.

    Returns
    -------
    data: StudyData

    """
    if calendar is None:
        calendar = TradingCalendar.from_dates(daily['date'], week_convention)
    universe = eligibility_table(daily)
    regression = weekly_flows(flows, calendar, weekly)
    sorting = weekly_flows(flows, calendar, sort)
    if market == 'external':
        external_market = external_benchmark(factors, external_market)

    data = StudyData(panels={}, flows=flows, calendar=calendar,
                     universe=universe)
    if factors is not None:
        data.factors = weekly_factors(factors, calendar)
    for mode in return_modes:
        returns = daily_return(daily, mode)
        data.daily_returns[mode] = returns
        data.weekly_returns[mode] = weekly_returns(returns, calendar)
        if market == 'external':
            data.market[mode] = external_market
        else:
            data.market[mode] = market_returns(daily, returns, universe,
                                               how=market)
        controls = controls_table(daily, returns, turnover_scale)
        for method in methods:
            data.panels[method, mode] = assemble_panel(
                regression, data.weekly_returns[mode], controls, calendar,
                universe=universe, method=method, sort_flows=sorting)
    logger.info('Prepared %d panels over %d weeks.', len(data.panels),
                len(calendar.weeks))
    return data
