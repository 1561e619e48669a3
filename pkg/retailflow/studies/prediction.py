import pandas as pd

from sklearn.base import BaseEstimator

from .base import IMBALANCE_LABELS, StudyMixin, StudySpec, control_formula, \
    fm_table, regression_sample_iqr, select_period
from ..decorators import operation_context
from ..econ import economic_magnitude, fama_macbeth


__all__ = [
    'Prediction',
    'prediction',
    'magnitude_rows'
]


def magnitude_rows(result, iqr, column, label):
    """IQR and return-difference rows of one regressor."""
    weekly, annual = economic_magnitude(result.mean[column], iqr)
    return pd.DataFrame({
        'variable': ['IQR ' + label, 'IQR w. ret. diff ' + label,
                     'IQR ann. ret. diff ' + label],
        'estimate': [iqr, weekly, annual]
    })


class Prediction(BaseEstimator, StudyMixin):
    """Weekly return regressed on last week's imbalance and controls.

    Besides the Fama-MacBeth estimates the table reports the interquartile
    range of the lagged imbalance over the regression sample and the
    weekly and annualised return difference it implies.

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period, imbalance and lags; 5 lags by default.

    n_jobs: int, optional (default=1)
        Number of jobs running the cross-sectional regressions.

    Attributes
    ----------
    formula_: Formula

    result_: FMResult

    iqr_: float
        IQR of the lagged imbalance.

    """
    table = 'table3'

    def __init__(self, spec=None, n_jobs=1):
        self.spec = spec
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        spec = self.spec or StudySpec()
        panel = select_period(X, spec)
        self.formula_ = control_formula('ret', spec.imbalance)
        self.result_ = fama_macbeth(
            panel, self.formula_, spec.resolved_lags(self.table),
            n_jobs=self.n_jobs
        )
        self.iqr_ = regression_sample_iqr(
            panel, self.formula_, self.formula_.regressors[0])
        return self

    def tabulate(self):
        self._check_fitted('result_')
        spec = self.spec or StudySpec()
        frame = fm_table(self.result_, spec)
        extra = magnitude_rows(
            self.result_, self.iqr_, self.formula_.regressors[0],
            IMBALANCE_LABELS.get(spec.imbalance, spec.imbalance) + '(w-1)'
        )
        for column in ('panel', 'imbalance', 'return_mode'):
            extra[column] = frame[column].iloc[0]
        return pd.concat([frame, extra], ignore_index=True)[frame.columns]


@operation_context('studies', 'prediction')
def prediction(panel, spec=None, n_jobs=1):
    """Table of the return predictability regression, see `Prediction`."""
    return Prediction(spec, n_jobs).fit_tabulate(panel)
