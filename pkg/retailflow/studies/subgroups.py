import logging

import numpy as np
import pandas as pd

from sklearn.base import BaseEstimator

from .base import IMBALANCE_LABELS, StudyMixin, StudySpec, control_formula, \
    regression_sample_iqr, select_period, significance_stars
from ..decorators import operation_context
from ..econ import economic_magnitude, fama_macbeth
from ..exceptions import EmptySeriesError, InsufficientPeriodsError
from ..panel import SubgroupAssigner


__all__ = [
    'SubgroupPrediction',
    'subgroup_prediction',
    'group_labels'
]

logger = logging.getLogger(__name__)

GROUP_NAMES = {
    'cap': ('Small', 'Medium', 'Big'),
    'price': ('Low', 'Medium', 'High'),
    'turnover': ('Low', 'Medium', 'High')
}


def group_labels(characteristic, n_groups):
    """Names of the groups from the lowest to the highest characteristic."""
    if n_groups == 3 and characteristic in GROUP_NAMES:
        return GROUP_NAMES[characteristic]
    return tuple('G{}'.format(g + 1) for g in range(n_groups))


class SubgroupPrediction(BaseEstimator, StudyMixin):
    """Return predictability within characteristic groups.

    Every month the stocks are split into equal-count groups of previous
    month-end market capitalisation, share price and turnover, and the
    return regression is run separately inside each group. A group without
    enough periods is reported with a flag instead of estimates.

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period, imbalance and lags; 5 lags by default.

    characteristics: tuple, optional (default=('cap', 'price', 'turnover'))
        Sorting characteristics.

    n_groups: int, optional (default=3)
        Number of groups per characteristic.

    n_jobs: int, optional (default=1)
        Number of jobs running the cross-sectional regressions.

    Attributes
    ----------
    cells_: list of dict
        One entry per characteristic and group with the FMResult (None when
        flagged), the IQR and the flag.

    """
    table = 'table4'

    def __init__(self, spec=None, characteristics=('cap', 'price', 'turnover'),
                 n_groups=3, n_jobs=1):
        self.spec = spec
        self.characteristics = characteristics
        self.n_groups = n_groups
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        spec = self.spec or StudySpec()
        panel = select_period(X, spec)
        formula = control_formula('ret', spec.imbalance)
        lags = spec.resolved_lags(self.table)
        self.cells_ = []
        for characteristic in self.characteristics:
            assigner = SubgroupAssigner(characteristic, self.n_groups)
            labeled = assigner.fit_transform(panel)
            names = group_labels(characteristic, self.n_groups)
            for group in range(self.n_groups):
                cell = {'characteristic': characteristic,
                        'group': names[group], 'result': None,
                        'iqr': np.nan, 'flag': ''}
                in_group = labeled[assigner.label_column].eq(group) \
                    .fillna(False).astype(bool)
                members = labeled[in_group]
                try:
                    cell['result'] = fama_macbeth(
                        members, formula, lags, n_jobs=self.n_jobs)
                    cell['iqr'] = regression_sample_iqr(
                        members, formula, formula.regressors[0])
                except (InsufficientPeriodsError, EmptySeriesError) as e:
                    logger.info('%s group %s flagged: %s', characteristic,
                                names[group], e)
                    cell['flag'] = 'INSUFFICIENT_PERIODS'
                self.cells_.append(cell)
        self.formula_ = formula
        return self

    def tabulate(self):
        self._check_fitted('cells_')
        spec = self.spec or StudySpec()
        column = self.formula_.regressors[0]
        rows = []
        for cell in self.cells_:
            result = cell['result']
            row = {
                'panel': spec.label,
                'imbalance': IMBALANCE_LABELS.get(spec.imbalance,
                                                  spec.imbalance),
                'return_mode': spec.return_mode,
                'characteristic': cell['characteristic'],
                'group': cell['group'],
                'estimate': np.nan, 'tstat': np.nan, 'stars': '',
                'iqr': cell['iqr'], 'ret_diff_weekly': np.nan,
                'ret_diff_annual': np.nan, 'n_periods': 0,
                'flag': cell['flag']
            }
            if result is not None:
                weekly, annual = economic_magnitude(result.mean[column],
                                                    cell['iqr'])
                row.update(
                    estimate=result.mean[column],
                    tstat=result.tstat[column],
                    stars=significance_stars(result.tstat[column]),
                    ret_diff_weekly=weekly, ret_diff_annual=annual,
                    n_periods=result.n_periods
                )
            rows.append(row)
        return pd.DataFrame(rows)


@operation_context('studies', 'subgroup_prediction')
def subgroup_prediction(panel, spec=None, characteristic=None, n_groups=3,
                        n_jobs=1):
    """Table of the subgroup regressions, see `SubgroupPrediction`.

    Parameters
    ----------
    characteristic: str or tuple, optional (default=None)
        One characteristic or several; all three when None.

    """
    if characteristic is None:
        characteristics = ('cap', 'price', 'turnover')
    elif isinstance(characteristic, str):
        characteristics = (characteristic,)
    else:
        characteristics = tuple(characteristic)
    return SubgroupPrediction(spec, characteristics, n_groups, n_jobs) \
        .fit_tabulate(panel)
