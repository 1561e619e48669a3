"""Synthetic firm-week panels with planted coefficients."""


import json
import logging
import pathlib

from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from sklearn.utils import check_random_state

from ..classify import BJZZ
from ..decorators import operation_context
from ..exceptions import ConfigError
from ..mdio import TradingCalendar
from ..panel import CONTROL_COLUMNS, assemble_panel
from ..utils.exporting import frame_to_csv


__all__ = [
    'PanelScenario',
    'SyntheticPanel',
    'RETURN_REGRESSORS',
    'gen_panel'
]

logger = logging.getLogger(__name__)

FACTORS = ['mkt_rf', 'smb', 'hml']
# Last week's values the weekly return loads on.
RETURN_REGRESSORS = ('mroibvol', 'ret') + tuple(CONTROL_COLUMNS)

# Cross-sectional location and scale of the monthly characteristics, and
# the month-to-month noise around each firm's own level.
_CHARACTERISTICS = {
    'ret_m1': (.01, .08, .08),
    'ret_m7_m2': (.05, .2, .2),
    'lmto': (-.5, .6, .15),
    'lvol': (-3.5, .4, .1),
    'size': (6.5, 1.5, .05),
    'lbm': (-.6, .5, .05)
}


@dataclass(frozen=True)
class PanelScenario:
    """Parameters of a synthetic panel.

    The imbalance follows a firm-level AR(1) around `imbalance_mean`, the
    weekly return loads on last week's imbalance, return and monthly
    characteristics through `coefficients` and on three factors through
    firm loadings.

    Parameters
    ----------
    seed: int, optional (default=0)

    n_symbols, n_weeks: int, optional (default=200, 120)

    start: str, optional (default='2012-01-02')
        Monday of the first week.

    phi: float, optional (default=0.2)
        Persistence of the imbalance.

    imbalance_mean, imbalance_noise: float, optional (default=-0.05, 0.2)
        Population mean and innovation scale of Mroibvol.

    trade_noise: float, optional (default=0.1)
        Scale of the gap between Mroibtrd and Mroibvol.

    coefficients: dict, optional
        Slopes of the return on last week's values keyed by
        `RETURN_REGRESSORS`, zero when missing.

    alpha: float, optional (default=0.0)
        Weekly intercept of every return.

    return_noise: float, optional (default=0.04)
        Idiosyncratic return volatility.

    loadings: tuple, optional (default=(1.0, 0.3, 0.2))
        Mean loadings on mkt_rf, smb and hml.

    loading_dispersion: float, optional (default=0.3)
        Cross-sectional scale of the loadings; with 0 the factor part is
        common to all firms.

    factor_means, factor_vols: tuple, optional
        Weekly factor return moments.

    """
    seed: int = 0
    n_symbols: int = 200
    n_weeks: int = 120
    start: str = '2012-01-02'
    phi: float = .2
    imbalance_mean: float = -.05
    imbalance_noise: float = .2
    trade_noise: float = .1
    coefficients: dict = field(default_factory=dict)
    alpha: float = 0.
    return_noise: float = .04
    loadings: tuple = (1., .3, .2)
    loading_dispersion: float = .3
    factor_means: tuple = (.0015, .0005, .0005)
    factor_vols: tuple = (.02, .01, .01)

    def __post_init__(self):
        unknown = set(self.coefficients) - set(RETURN_REGRESSORS)
        if unknown:
            raise ConfigError('Unknown coefficients: {}'
                              .format(sorted(unknown)))
        if not -1 < self.phi < 1:
            raise ConfigError('phi must lie in (-1, 1).')
        if self.n_weeks < 3 or self.n_symbols < 1:
            raise ConfigError('Need at least three weeks and one symbol.')

    def coefficient(self, name):
        return float(self.coefficients.get(name, 0.))

    @property
    def noiseless(self):
        return self.return_noise == 0 and self.loading_dispersion == 0


@dataclass
class SyntheticPanel:
    """Generated panel with its inputs and planted values.

    Attributes
    ----------
    panel: pandas.DataFrame
        Output of `panel.assemble_panel` on the generated flows, returns
        and controls.

    factors: pandas.DataFrame
        Weekly factor returns (week, mkt_rf, smb, hml).

    calendar: TradingCalendar

    truth: dict
        Planted parameters, written as the truth manifest.

    """
    panel: pd.DataFrame
    factors: pd.DataFrame
    calendar: TradingCalendar
    truth: dict

    def write(self, directory):
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        frame_to_csv(self.panel, directory / 'panel.csv')
        frame_to_csv(self.factors, directory / 'factors.csv',
                     float_format='%.17g')
        (directory / 'truth.json').write_text(
            json.dumps(self.truth, indent=2, sort_keys=True) + '\n')
        return {name: directory / name
                for name in ('panel.csv', 'factors.csv', 'truth.json')}


def _characteristics(random_state, n_symbols, months):
    """Symbol-month controls around persistent firm levels."""
    columns = {}
    for name, (location, scale, noise) in _CHARACTERISTICS.items():
        level = random_state.normal(location, scale, size=(n_symbols, 1))
        columns[name] = level + random_state.normal(
            0., noise, size=(n_symbols, len(months)))
    return columns


@operation_context('synth', 'gen_panel')
def gen_panel(scenario=None):
    """Simulates a firm-week panel with planted coefficients.

    Parameters
    ----------
    scenario: PanelScenario, optional (default=None)

    Returns
    -------
    panel: SyntheticPanel

    """
    scenario = scenario or PanelScenario()
    random_state = check_random_state(scenario.seed)
    n, n_weeks = scenario.n_symbols, scenario.n_weeks
    dates = pd.bdate_range(scenario.start, periods=5 * n_weeks)
    calendar = TradingCalendar.from_dates(dates)
    weeks = calendar.week_table()
    months = pd.PeriodIndex(weeks['month']).unique()
    month_index = pd.Index(months).get_indexer(weeks['month'])

    controls = _characteristics(random_state, n, months)
    factor_returns = random_state.normal(
        scenario.factor_means, scenario.factor_vols, size=(n_weeks, 3))
    loadings = np.asarray(scenario.loadings) + scenario.loading_dispersion \
        * random_state.normal(size=(n, 3))

    mu, phi = scenario.imbalance_mean, scenario.phi
    stationary = scenario.imbalance_noise / np.sqrt(1. - phi ** 2)
    mroibvol = np.empty((n, n_weeks))
    ret = np.empty((n, n_weeks))
    for w in range(n_weeks):
        shock = random_state.normal(size=n)
        if w == 0:
            mroibvol[:, w] = mu + stationary * shock
        else:
            mroibvol[:, w] = mu + phi * (mroibvol[:, w - 1] - mu) \
                + scenario.imbalance_noise * shock
        mroibvol[:, w] = np.clip(mroibvol[:, w], -1., 1.)

        value = scenario.alpha + loadings @ factor_returns[w] \
            + scenario.return_noise * random_state.normal(size=n)
        if w > 0:
            last = {'mroibvol': mroibvol[:, w - 1], 'ret': ret[:, w - 1]}
            last.update({c: controls[c][:, month_index[w - 1]]
                         for c in CONTROL_COLUMNS})
            for name in RETURN_REGRESSORS:
                value = value + scenario.coefficient(name) * last[name]
        ret[:, w] = value
    mroibtrd = np.clip(
        mroibvol + scenario.trade_noise * random_state.normal(
            size=mroibvol.shape), -1., 1.)

    symbols = np.array(['F{:04d}'.format(i) for i in range(n)])
    week_ids = weeks['week_id'].values
    flows = pd.DataFrame({
        'symbol': np.repeat(symbols, n_weeks),
        'week': np.tile(week_ids, n),
        'method': BJZZ,
        'mroibvol': mroibvol.ravel(),
        'mroibtrd': mroibtrd.ravel()
    })
    returns = flows[['symbol', 'week']].assign(ret=ret.ravel())
    control_frame = pd.DataFrame({
        'symbol': np.repeat(symbols, len(months)),
        'month': months[np.tile(np.arange(len(months)), n)]
    })
    for name in CONTROL_COLUMNS:
        control_frame[name] = controls[name].ravel()
    control_frame['me'] = np.exp(control_frame['size'])
    control_frame['price'] = np.exp(
        random_state.normal(3., .7, size=(n, 1))
        + random_state.normal(0., .05, size=(n, len(months)))).ravel()

    panel = assemble_panel(flows, returns, control_frame, calendar,
                           sort_flows=flows)
    factors = pd.DataFrame(factor_returns, columns=FACTORS)
    factors.insert(0, 'week', week_ids)

    truth = asdict(scenario)
    truth.update(
        loadings=list(scenario.loadings),
        factor_means=list(scenario.factor_means),
        factor_vols=list(scenario.factor_vols),
        return_coefficients={name: scenario.coefficient(name)
                             for name in RETURN_REGRESSORS},
        imbalance_stationary_sd=float(stationary)
    )
    logger.info('Generated panel of %d firms over %d weeks.', n, n_weeks)
    return SyntheticPanel(panel, factors, calendar, truth)
