"""Decomposition of the imbalance into persistence, contrarian and other
components and their return predictability."""


from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from sklearn.base import BaseEstimator

from .base import IMBALANCE_LABELS, StudyMixin, StudySpec, fm_table, \
    select_period
from .prediction import magnitude_rows
from ..decorators import operation_context
from ..econ import Formula, fama_macbeth, interquartile_range
from ..panel import shift_weeks


__all__ = [
    'COMPONENTS',
    'DecompResult',
    'Decomposition',
    'decompose',
    'projection_formula',
    'components_formula'
]

COMPONENTS = ('pers', 'cont', 'other')
COMPONENT_LABELS = {'pers': 'PERS', 'cont': 'CONT', 'other': 'OTHER'}
PAST_RETURNS = ('ret_lag1', 'ret_m1_lag1', 'ret_m7_m2_lag1')


def projection_formula(imbalance):
    """Imbalance of week t on its lag and the returns known before t."""
    label = IMBALANCE_LABELS.get(imbalance, imbalance)
    regressors = (imbalance + '_lag1',) + PAST_RETURNS
    labels = dict(zip(regressors, [label + '(w-2)', 'Ret(w-2)', 'Ret(m-1)',
                                   'Ret(m-7,m-2)']))
    return Formula(imbalance, regressors, labels)


def components_formula():
    """Weekly return on last week's components and the usual controls."""
    regressors = tuple(c + '_lag1' for c in COMPONENTS) + (
        'ret_lag1', 'ret_m1_lag1', 'ret_m7_m2_lag1', 'lmto_lag1',
        'lvol_lag1', 'size_lag1', 'lbm_lag1')
    labels = dict(zip(regressors, [
        'PERS', 'CONT', 'OTHER', 'Ret(w-1)', 'Ret(m-1)', 'Ret(m-7,m-2)',
        'Lmto', 'Lvol', 'Size', 'Lbm']))
    return Formula('ret', regressors, labels)


@dataclass
class DecompResult:
    """Components and both Fama-MacBeth stages.

    Attributes
    ----------
    components: pandas.DataFrame
        symbol, week, the imbalance and its pers, cont and other parts, which
        add up to the imbalance on every row with a first-stage fit.

    first_stage, second_stage: FMResult

    iqr: dict
        IQR of every lagged component over the second-stage sample.

    """
    components: pd.DataFrame
    first_stage: object
    second_stage: object
    iqr: dict = field(default_factory=dict)

    def max_additivity_error(self, imbalance):
        frame = self.components.dropna(subset=list(COMPONENTS))
        total = frame['pers'] + frame['cont'] + frame['other']
        return float(np.abs(total - frame[imbalance]).max()) if len(frame) \
            else 0.


def split_imbalance(panel, first_stage, imbalance):
    """Components of every row from the weekly projection slopes."""
    formula = projection_formula(imbalance)
    lagged = formula.regressors[0]
    slopes = panel[['week']].merge(
        first_stage.coefficients.add_prefix('b_'), left_on='week',
        right_index=True, how='left')
    slopes.index = panel.index
    usable = (panel[formula.columns].notna().all(axis=1)
              & slopes['b_' + lagged].notna()).values
    pers = slopes['b_' + lagged] * panel[lagged]
    cont = sum(slopes['b_' + column] * panel[column]
               for column in PAST_RETURNS)
    other = panel[imbalance] - pers - cont
    return pd.DataFrame({
        'symbol': panel['symbol'].values,
        'week': panel['week'].values,
        imbalance: panel[imbalance].values,
        'pers': np.where(usable, pers, np.nan),
        'cont': np.where(usable, cont, np.nan),
        'other': np.where(usable, other, np.nan)
    }, index=panel.index)


class Decomposition(BaseEstimator, StudyMixin):
    """Splits the imbalance and tests which part predicts returns.

    Each week the imbalance is projected on its own lag and past returns:
    the lag term is the persistence part (PERS), the return terms the
    contrarian part (CONT) and intercept plus residual the rest (OTHER).
    Next week's return is then regressed on the three parts and the
    controls.

    Parameters
    ----------
    spec: StudySpec, optional (default=None)
        Method, period, imbalance and lags; 5 lags by default for both
        stages.

    n_jobs: int, optional (default=1)
        Number of jobs running the cross-sectional regressions.

    Attributes
    ----------
    result_: DecompResult

    """
    table = 'table7'

    def __init__(self, spec=None, n_jobs=1):
        self.spec = spec
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        spec = self.spec or StudySpec()
        lags = spec.resolved_lags(self.table)
        imbalance = spec.imbalance

        first_formula = projection_formula(imbalance)
        first_stage = fama_macbeth(select_period(X, spec), first_formula,
                                   lags, n_jobs=self.n_jobs)
        parts = split_imbalance(X, first_stage, imbalance)
        panel = pd.concat([X, parts[list(COMPONENTS)]], axis=1)
        lagged = shift_weeks(panel, list(COMPONENTS), 1)
        for component in COMPONENTS:
            panel[component + '_lag1'] = lagged[component]

        sample = select_period(panel, spec)
        second_formula = components_formula()
        second_stage = fama_macbeth(sample, second_formula, lags,
                                    n_jobs=self.n_jobs)
        used = sample[second_formula.columns].dropna()
        iqr = {c: interquartile_range(used[c + '_lag1']) for c in COMPONENTS}

        self.result_ = DecompResult(parts, first_stage, second_stage, iqr)
        return self

    def tabulate(self):
        self._check_fitted('result_')
        spec = self.spec or StudySpec()
        result = self.result_
        first = fm_table(result.first_stage, spec, stage='first')
        second = fm_table(result.second_stage, spec, stage='second')
        extra = pd.concat([
            magnitude_rows(result.second_stage, result.iqr[c], c + '_lag1',
                           COMPONENT_LABELS[c])
            for c in COMPONENTS
        ], ignore_index=True)
        for column in ('panel', 'imbalance', 'return_mode'):
            extra[column] = second[column].iloc[0]
        extra['stage'] = 'magnitude'
        return pd.concat([first, second, extra], ignore_index=True)[
            first.columns]


@operation_context('studies', 'decompose')
def decompose(panel, spec=None, n_jobs=1):
    """Fits the decomposition, see `Decomposition`.

    Returns
    -------
    result: DecompResult

    """
    return Decomposition(spec, n_jobs).fit(panel).result_
