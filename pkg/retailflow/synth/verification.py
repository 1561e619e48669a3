"""Oracle checks run by ``retailflow verify``."""


import logging
import warnings

from dataclasses import dataclass

import numpy as np

from sklearn.utils import check_random_state

from .accuracy import confusion
from .market import MarketScenario, gen_market
from .oracles import hansen_hodrick_oracle, newey_west_oracle, ols_oracle
from .panel import PanelScenario, gen_panel
from ..aggregate import daily_flows, method_correlation
from ..classify import BJZZ, QMP, classify_days
from ..econ import fama_macbeth, hansen_hodrick_var, newey_west_var, ols
from ..studies.base import control_formula

try:
    import statsmodels.api as sm
except ImportError as e:
    sm = e


__all__ = [
    'Check',
    'run_oracle_suite'
]

logger = logging.getLogger(__name__)

HAC_TOLERANCE = 1e-12
OLS_TOLERANCE = 1e-10


@dataclass(frozen=True)
class Check:
    """Outcome of one named check; `passed` is None when skipped."""
    name: str
    passed: bool
    detail: str = ''


def _check_worked_values():
    nw = newey_west_var([1, 2, 3, 4], 1)
    hh = hansen_hodrick_var([1, 2, 3, 4], 1)[0]
    return [
        Check('newey_west_worked_value', abs(nw - .390625) <= HAC_TOLERANCE,
              'NW(L=1) = {!r}'.format(nw)),
        Check('hansen_hodrick_worked_value', abs(hh - .46875) <= HAC_TOLERANCE,
              'HH(L=1) = {!r}'.format(hh))
    ]


def _check_hac(random_state, n_series=50):
    worst_nw, worst_hh = 0., 0.
    for _ in range(n_series):
        series = random_state.normal(size=random_state.randint(20, 200))
        lags = random_state.randint(0, 8)
        worst_nw = max(worst_nw, abs(newey_west_var(series, lags)
                                     - newey_west_oracle(series, lags)))
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            variance, fell_back = hansen_hodrick_var(series, lags)
        if not fell_back:
            worst_hh = max(worst_hh, abs(
                variance - hansen_hodrick_oracle(series, lags)))
    return [
        Check('newey_west_oracle', worst_nw <= HAC_TOLERANCE,
              'max abs error {:.3g}'.format(worst_nw)),
        Check('hansen_hodrick_oracle', worst_hh <= HAC_TOLERANCE,
              'max abs error {:.3g}'.format(worst_hh))
    ]


def _check_ols(random_state, n_systems):
    worst = 0.
    for _ in range(n_systems):
        X = random_state.normal(size=(200, 4))
        y = X @ random_state.normal(size=4) + random_state.normal(size=200)
        estimate = ols(X, y).params.values
        exact = ols_oracle(X, y)
        error = np.max(np.abs(estimate - exact) / np.maximum(np.abs(exact),
                                                              1e-300))
        worst = max(worst, float(error))
    return [Check('ols_oracle', worst <= OLS_TOLERANCE,
                  'max relative error {:.3g} over {} systems'
                  .format(worst, n_systems))]


def _classify(market):
    return classify_days(market.trades, market.quotes)


def _check_classification(seed, n_days):
    penny = gen_market(MarketScenario(seed=seed, n_symbols=5, n_days=n_days,
                                      trades_per_day=400))
    day = _classify(penny)
    bjzz = confusion(penny.truth, day.bjzz, penny.trades['trade_id'])
    columns = ['trade_id', 'direction']
    agree = day.bjzz[columns].reset_index(drop=True).equals(
        day.qmp[columns].reset_index(drop=True))
    checks = [
        Check('penny_bjzz_recovers_truth',
              bjzz.identification_rate == 1. and bjzz.sign_accuracy == 1.
              and bjzz.cells['false_positive'] == 0,
              'identification {:.4f}, accuracy {:.4f}'.format(
                  bjzz.identification_rate, bjzz.sign_accuracy)),
        Check('penny_qmp_agrees_with_bjzz', bool(agree))
    ]

    wide = gen_market(MarketScenario.wide(seed=seed, n_symbols=5,
                                          n_days=n_days, trades_per_day=400))
    wide_day = _classify(wide)
    accuracy = {
        method: confusion(wide.truth, signed, wide.trades['trade_id'])
        .sign_accuracy
        for method, signed in ((BJZZ, wide_day.bjzz), (QMP, wide_day.qmp))
    }
    checks.append(Check(
        'wide_qmp_more_accurate', accuracy[QMP] > accuracy[BJZZ],
        'QMP {:.4f} vs BJZZ {:.4f}'.format(accuracy[QMP], accuracy[BJZZ])))

    correlations = []
    for market, signed in ((penny, day), (wide, wide_day)):
        flows = daily_flows(signed.signed())
        correlations.append(method_correlation(
            flows[flows['method'] == BJZZ], flows[flows['method'] == QMP],
            'mroibvol'))
    checks.append(Check(
        'wide_correlation_drops', correlations[1] < correlations[0],
        'penny {:.4f} vs wide {:.4f}'.format(*correlations)))
    return checks


def _check_fama_macbeth(seed):
    planted = {'mroibvol': .8, 'ret': -.05, 'size': -.001}
    scenario = PanelScenario(seed=seed, n_symbols=60, n_weeks=30,
                             coefficients=planted, return_noise=0.,
                             loading_dispersion=0.)
    panel = gen_panel(scenario).panel
    result = fama_macbeth(panel, control_formula('ret', 'mroibvol'), 5)
    errors = [abs(result.mean[name + '_lag1'] - scenario.coefficient(name))
              for name in ('mroibvol', 'ret', 'ret_m1', 'ret_m7_m2', 'lmto',
                           'lvol', 'size', 'lbm')]
    return [Check('fama_macbeth_noiseless_recovery', max(errors) <= 1e-10,
                  'max abs error {:.3g}'.format(max(errors)))]


def _check_statsmodels(random_state):
    if isinstance(sm, ImportError):
        logger.info('statsmodels cross-check skipped: %s', sm)
        return [Check('statsmodels_hac', None, 'statsmodels not installed')]
    series = random_state.normal(size=150)
    lags = 4
    fit = sm.OLS(series, np.ones(len(series))).fit(
        cov_type='HAC', cov_kwds={'maxlags': lags, 'use_correction': False})
    reference = float(fit.bse[0] ** 2)
    error = abs(reference - newey_west_var(series, lags))
    return [Check('statsmodels_hac', error <= 1e-10,
                  'abs error {:.3g}'.format(error))]


def run_oracle_suite(seed=0, n_systems=1000, n_days=5):
    """Runs every oracle check.

    Parameters
    ----------
    seed: int, optional (default=0)
        Seed of the random systems and synthetic markets.

    n_systems: int, optional (default=1000)
        Number of random least-squares systems.

    n_days: int, optional (default=5)
        Trading days of the synthetic markets.

    Returns
    -------
    checks: list of Check

    """
    random_state = check_random_state(seed)
    checks = []
    checks += _check_worked_values()
    checks += _check_hac(random_state)
    checks += _check_ols(random_state, n_systems)
    checks += _check_classification(seed, n_days)
    checks += _check_fama_macbeth(seed)
    checks += _check_statsmodels(random_state)
    for check in checks:
        logger.info('%s: %s %s', check.name,
                    {True: 'ok', False: 'FAILED', None: 'skipped'}[
                        check.passed], check.detail)
    return checks
