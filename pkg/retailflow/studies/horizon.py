import logging

import numpy as np
import pandas as pd

from sklearn.base import BaseEstimator

from .base import IMBALANCE_LABELS, StudyMixin, StudySpec, control_formula, \
    select_period, significance_stars
from ..decorators import operation_context
from ..econ import fama_macbeth
from ..exceptions import InsufficientPeriodsError
from ..panel import shift_weeks


__all__ = [
    'DEFAULT_HORIZONS',
    'HorizonPrediction',
    'horizon_prediction',
    'horizon_formula',
    'horizon_response'
]

logger = logging.getLogger(__name__)

DEFAULT_HORIZONS = (1, 2, 4, 6, 8, 10, 12)


def horizon_response(k):
    """Column of the return k weeks after the regressors' week."""
    return 'ret' if k == 1 else 'ret_ahead{}'.format(k)


def horizon_formula(imbalance, k):
    """Return of week w + k on week-w imbalance, return and controls.

    Rows are the weeks t = w + 1 of the panel, so the regressors are the
    `_lag1` columns and the response is the return of week t + k - 1.
    """
    return control_formula(horizon_response(k), imbalance)


class HorizonPrediction(BaseEstimator, StudyMixin):
    """Predictability of the one-week return k weeks ahead.

    Cross-sections are indexed, and selected by period, through the week
    t following the regressors' week, exactly as in `Prediction`; the
    response is the return of week t + k - 1 alone, not a cumulative one.
    With k = 1 the sample and the coefficients are those of `Prediction`.

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period, imbalance and lags; 5 lags by default.

    horizons: tuple, optional (default=(1, 2, 4, 6, 8, 10, 12))
        Horizons k in weeks.

    n_jobs: int, optional (default=1)
        Number of jobs running the cross-sectional regressions.

    Attributes
    ----------
    results_: dict
        Maps every horizon onto its FMResult, None when flagged.

    """
    table = 'table5'

    def __init__(self, spec=None, horizons=DEFAULT_HORIZONS, n_jobs=1):
        self.spec = spec
        self.horizons = horizons
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        spec = self.spec or StudySpec()
        lags = spec.resolved_lags(self.table)
        panel = X.copy()
        for k in self.horizons:
            if k > 1:
                panel[horizon_response(k)] = \
                    shift_weeks(X, ['ret'], 1 - k)['ret']
        panel = select_period(panel, spec)

        self.results_ = {}
        for k in self.horizons:
            formula = horizon_formula(spec.imbalance, k)
            try:
                self.results_[k] = fama_macbeth(panel, formula, lags,
                                                n_jobs=self.n_jobs)
            except InsufficientPeriodsError as e:
                logger.info('Horizon %d flagged: %s', k, e)
                self.results_[k] = None
        return self

    def tabulate(self):
        self._check_fitted('results_')
        spec = self.spec or StudySpec()
        column = horizon_formula(spec.imbalance, 1).regressors[0]
        rows = []
        for k, result in self.results_.items():
            row = {
                'panel': spec.label,
                'imbalance': IMBALANCE_LABELS.get(spec.imbalance,
                                                  spec.imbalance),
                'return_mode': spec.return_mode,
                'k': k, 'estimate': np.nan, 'tstat': np.nan, 'stars': '',
                'mean_adj_r2': np.nan, 'n_periods': 0,
                'flag': 'INSUFFICIENT_PERIODS'
            }
            if result is not None:
                row.update(
                    estimate=result.mean[column], tstat=result.tstat[column],
                    stars=significance_stars(result.tstat[column]),
                    mean_adj_r2=result.mean_adj_r2,
                    n_periods=result.n_periods, flag=''
                )
            rows.append(row)
        return pd.DataFrame(rows)


@operation_context('studies', 'horizon_prediction')
def horizon_prediction(panel, spec=None, horizons=DEFAULT_HORIZONS, n_jobs=1):
    """Table of the k-week-ahead regressions, see `HorizonPrediction`."""
    return HorizonPrediction(spec, tuple(horizons), n_jobs).fit_tabulate(panel)
