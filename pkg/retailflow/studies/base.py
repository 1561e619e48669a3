"""Base classes and shared pieces of the table studies."""


import logging

from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
import scipy.stats as stats

from ..classify import BJZZ
from ..econ import Formula, interquartile_range


__all__ = [
    'StudySpec',
    'StudyMixin',
    'DEFAULT_LAGS',
    'IMBALANCE_LABELS',
    'significance_stars',
    'select_period',
    'control_formula',
    'fm_table',
    'regression_sample_iqr'
]

logger = logging.getLogger(__name__)

DEFAULT_LAGS = {
    'table2': 6,
    'table3': 5,
    'table4': 5,
    'table5': 5,
    'table7': 5,
    'table8': 4
}

IMBALANCE_LABELS = {'mroibvol': 'Mroibvol', 'mroibtrd': 'Mroibtrd'}

# Two-sided normal critical values at 1% and 5%, rounded as tabulated.
STAR_LEVELS = (
    (round(float(stats.norm.ppf(.995)), 3), '**'),
    (round(float(stats.norm.ppf(.975)), 3), '*')
)


def significance_stars(t):
    """'**' for |t| >= 2.576, '*' for |t| >= 1.96, '' otherwise."""
    if t is None or np.isnan(t):
        return ''
    for threshold, stars in STAR_LEVELS:
        if abs(t) >= threshold:
            return stars
    return ''


@dataclass(frozen=True)
class StudySpec:
    """What a table is computed on.

    Parameters
    ----------
    method: str {'BJZZ', 'QMP'}, optional (default='BJZZ')
        Identification method of the flows.

    period: tuple, optional (default=None)
        Inclusive (start, end) months, e.g. ('2016-01', '2021-12'). All
        data when None.

    period_label: str, optional (default='all')
        Label of the period in the tables.

    imbalance: str {'mroibvol', 'mroibtrd'}, optional (default='mroibvol')
        Imbalance variable.

    return_mode: str {'bidask', 'close'}, optional (default='bidask')
        Return definition of the panel.

    lags: int, optional (default=None)
        Newey-West lags, the table default when None.

    options: dict, optional
        Study-specific knobs (horizons, quantiles, cutoffs, ...).

    """
    method: str = BJZZ
    period: tuple = None
    period_label: str = 'all'
    imbalance: str = 'mroibvol'
    return_mode: str = 'bidask'
    lags: int = None
    options: dict = field(default_factory=dict)

    def resolved_lags(self, table):
        if self.lags is not None:
            return self.lags
        return self.option('table_lags', {}).get(table, DEFAULT_LAGS[table])

    def option(self, name, default=None):
        return self.options.get(name, default)

    def with_imbalance(self, imbalance):
        return replace(self, imbalance=imbalance)

    @property
    def label(self):
        """Panel label, e.g. 'BJZZ 2010-2015'."""
        return '{} {}'.format(self.method, self.period_label)


def select_period(frame, spec, month_column='month'):
    """Rows whose month lies inside the spec's period."""
    if spec.period is None:
        return frame
    start, end = (pd.Period(p, freq='M') for p in spec.period)
    months = frame[month_column]
    return frame[(months >= start) & (months <= end)]


def control_formula(response, imbalance, suffix='_lag1', return_column='ret',
                    labels=None):
    """Formula with an imbalance, a weekly return and the monthly controls.

    With the default suffix every regressor is dated in week w - 1.
    """
    week = '(w-1)' if suffix else '(w)'
    regressors = (
        imbalance + suffix, return_column + suffix, 'ret_m1' + suffix,
        'ret_m7_m2' + suffix, 'lmto' + suffix, 'lvol' + suffix,
        'size' + suffix, 'lbm' + suffix
    )
    names = [IMBALANCE_LABELS.get(imbalance, imbalance) + week,
             'Ret' + week, 'Ret(m-1)', 'Ret(m-7,m-2)', 'Lmto', 'Lvol',
             'Size', 'Lbm']
    all_labels = dict(zip(regressors, names))
    all_labels.update(labels or {})
    return Formula(response, regressors, all_labels)


def fm_table(result, spec, **columns):
    """Tabulates an FMResult with the spec's identifiers and stars."""
    frame = result.to_frame()
    frame['stars'] = [significance_stars(t) for t in frame['tstat']]
    frame.insert(0, 'panel', spec.label)
    frame.insert(1, 'imbalance', IMBALANCE_LABELS.get(spec.imbalance,
                                                      spec.imbalance))
    frame.insert(2, 'return_mode', spec.return_mode)
    for position, (name, value) in enumerate(columns.items(), start=3):
        frame.insert(position, name, value)
    return frame


def regression_sample_iqr(panel, formula, column):
    """IQR of `column` over the rows a formula can use."""
    return interquartile_range(panel[formula.columns].dropna()[column])


class StudyMixin(metaclass=ABCMeta):
    """Mixin class for all table studies in retailflow.studies."""
    _estimator_type = "study"

    @abstractmethod
    def fit(self, X, y=None):
        """Fit to data."""

    @abstractmethod
    def tabulate(self):
        """Table of the fitted results.

        Notes
        -----
        Tables are long-format DataFrames with a `panel` column naming the
        method and period, ready to be written as CSV.

        """

    def fit_tabulate(self, X, y=None, **fit_params):
        """Fit to data, then tabulate results."""
        return self.fit(X, y, **fit_params).tabulate()

    def _check_fitted(self, attribute):
        try:
            getattr(self, attribute)
        except AttributeError:
            raise RuntimeError('Could not find the attribute.\n'
                               'Fitting is necessary before you tabulate '
                               'the results.')
