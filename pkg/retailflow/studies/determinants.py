from sklearn.base import BaseEstimator

from .base import StudyMixin, StudySpec, control_formula, fm_table, \
    select_period
from ..decorators import operation_context
from ..econ import fama_macbeth


__all__ = [
    'Determinants',
    'determinants'
]


class Determinants(BaseEstimator, StudyMixin):
    """Weekly imbalance regressed on its own lag, past returns and controls.

    Every regressor is dated in week w - 1 (monthly controls as of the
    month before week w - 1).

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period, imbalance and lags; 6 lags by default.

    n_jobs: int, optional (default=1)
        Number of jobs running the cross-sectional regressions.

    Attributes
    ----------
    formula_: Formula
        Regression that was estimated.

    result_: FMResult
        Fama-MacBeth estimates.

    """
    table = 'table2'

    def __init__(self, spec=None, n_jobs=1):
        self.spec = spec
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        spec = self.spec or StudySpec()
        self.formula_ = control_formula(spec.imbalance, spec.imbalance)
        self.result_ = fama_macbeth(
            select_period(X, spec), self.formula_,
            spec.resolved_lags(self.table), n_jobs=self.n_jobs
        )
        return self

    def tabulate(self):
        self._check_fitted('result_')
        return fm_table(self.result_, self.spec or StudySpec())


@operation_context('studies', 'determinants')
def determinants(panel, spec=None, n_jobs=1):
    """Table of the imbalance determinants, see `Determinants`."""
    return Determinants(spec, n_jobs).fit_tabulate(panel)
