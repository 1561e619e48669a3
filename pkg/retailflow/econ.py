"""Estimators: cross-sectional OLS, Fama-MacBeth and HAC variances."""


import logging
import math
import warnings

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.linalg as linalg

from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from .decorators import operation_context
from .exceptions import (
    DegenerateError, EmptySeriesError, HansenHodrickFallbackWarning,
    InsufficientPeriodsError, SingularMatrixError, SkippedPeriodWarning
)
from .utils.mathy import fsum_mean


__all__ = [
    'INTERCEPT',
    'KERNELS',
    'OlsFit',
    'HacFit',
    'Formula',
    'FMResult',
    'FamaMacBeth',
    'ols',
    'ols_hac',
    'hac_covariance',
    'newey_west_var',
    'hansen_hodrick_var',
    'tstat',
    'fama_macbeth',
    'economic_magnitude',
    'interquartile_range'
]

logger = logging.getLogger(__name__)

INTERCEPT = 'Intercept'
KERNELS = ('bartlett', 'uniform')
WEEKS_PER_YEAR = 52


@dataclass
class OlsFit:
    """Result of an OLS regression.

    `k` counts the regressors besides the intercept.
    """
    params: pd.Series
    residuals: np.ndarray
    r2: float
    adj_r2: float
    n: int
    k: int


@dataclass
class HacFit:
    """OLS with a HAC covariance of the coefficients."""
    fit: OlsFit
    cov: pd.DataFrame
    se: pd.Series
    tstat: pd.Series
    lags: int
    kernel: str
    fell_back: bool = False


def _design(X, add_intercept):
    if isinstance(X, pd.DataFrame):
        names = [str(c) for c in X.columns]
        values = X.to_numpy(dtype=float)
    else:
        values = np.asarray(X, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        names = ['x{}'.format(i) for i in range(values.shape[1])]
    if add_intercept:
        values = np.column_stack([np.ones(len(values)), values])
        names = [INTERCEPT] + names
    return values, names


@operation_context('econ', 'ols')
def ols(X, y, add_intercept=True):
    """Least squares through a column-pivoted QR decomposition.

    Parameters
    ----------
    X: pandas.DataFrame or array-like, shape = (n_samples, n_features)
        Regressors without missing values.

    y: array-like, shape = (n_samples, )
        Response.

    add_intercept: bool, optional (default=True)
        Prepends a column of ones named 'Intercept'.

    Returns
    -------
    fit: OlsFit
        Adjusted R^2 is 1 - (1 - R^2)(n - 1)/(n - k - 1) with k slopes.

    Raises
    ------
    DegenerateError
        If there are not more observations than coefficients.

    SingularMatrixError
        If the design is rank deficient, naming a dependent column.

    """
    A, names = _design(X, add_intercept)
    y = np.asarray(y, dtype=float).ravel()
    n, p = A.shape
    if n <= p:
        raise DegenerateError(
            '{} observations cannot identify {} coefficients.'.format(n, p))

    Q, R, pivot = linalg.qr(A, mode='economic', pivoting=True)
    diagonal = np.abs(np.diag(R))
    tolerance = max(n, p) * np.finfo(float).eps * diagonal[0]
    rank = int((diagonal > tolerance).sum())
    if rank < p:
        column = names[pivot[rank]]
        raise SingularMatrixError(
            'Design matrix is rank deficient, {!r} is linearly dependent on '
            'the other columns.'.format(column), column)

    solution = linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(p)
    beta[pivot] = solution
    residuals = y - A @ beta

    k = p - 1 if add_intercept else p
    ssr = float(residuals @ residuals)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1. - ssr / sst if sst > 0 else float('nan')
    dof = n - k - 1
    adj_r2 = 1. - (1. - r2) * (n - 1) / dof if dof > 0 else float('nan')
    return OlsFit(
        params=pd.Series(beta, index=names), residuals=residuals, r2=r2,
        adj_r2=adj_r2, n=n, k=k
    )


@operation_context('econ', 'hac_covariance')
def hac_covariance(X, residuals, lags, kernel='bartlett'):
    """Heteroskedasticity and autocorrelation consistent covariance.

    The sandwich (X'X/T)^-1 S (X'X/T)^-1 / T with
    S = G_0 + sum_{l=1..L} w_l (G_l + G_l'), G_l the 1/T normalised
    autocovariance of the scores x_t e_t and w_l = 1 - l/(L+1) (Bartlett)
    or 1 (uniform).

    Parameters
    ----------
    X: array-like, shape = (T, k)
        Regressors, including the constant if any.

    residuals: array-like, shape = (T, )
        Regression residuals.

    lags: int
        Number of autocovariances L.

    kernel: str {'bartlett', 'uniform'}, optional (default='bartlett')
        Newey-West or Hansen-Hodrick weights.

    Returns
    -------
    cov: numpy.ndarray, shape = (k, k)

    """
    if kernel not in KERNELS:
        raise ValueError('Unknown kernel: {}'.format(kernel))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    residuals = np.asarray(residuals, dtype=float).ravel()
    T = len(residuals)
    if lags < 0:
        raise ValueError('Number of lags must be non-negative.')
    if T < lags + 2:
        raise InsufficientPeriodsError(
            '{} periods are too few for {} lags.'.format(T, lags))

    scores = X * residuals[:, None]
    S = scores.T @ scores / T
    for lag in range(1, lags + 1):
        weight = 1. - lag / (lags + 1.) if kernel == 'bartlett' else 1.
        gamma = scores[lag:].T @ scores[:-lag] / T
        S += weight * (gamma + gamma.T)
    bread = linalg.inv(X.T @ X / T)
    return bread @ S @ bread / T


def _mean_variance(series, lags, kernel):
    series = np.asarray(series, dtype=float)
    if not len(series):
        raise EmptySeriesError('Variance of the mean of an empty series.')
    deviations = series - fsum_mean(series)
    return float(hac_covariance(np.ones(len(series)), deviations, lags,
                                kernel)[0, 0])


@operation_context('econ', 'newey_west_var')
def newey_west_var(series, lags):
    """Newey-West variance of the mean of a series.

    (1/T) [g_0 + 2 sum_{l=1..L} (1 - l/(L+1)) g_l] with autocovariances g_l
    normalised by 1/T.

    Examples
    --------
    >>> newey_west_var([1, 2, 3, 4], 1)
    0.390625

    """
    return _mean_variance(series, lags, 'bartlett')


@operation_context('econ', 'hansen_hodrick_var')
def hansen_hodrick_var(series, lags):
    """Hansen-Hodrick variance of the mean of a series.

    Uniform weights instead of Bartlett ones. A non-positive estimate is
    replaced by the Newey-West value.

    Returns
    -------
    variance: float

    fell_back: bool
        Whether the Newey-West value was used.

    """
    variance = _mean_variance(series, lags, 'uniform')
    if variance > 0:
        return variance, False
    warnings.warn(
        'Hansen-Hodrick variance {:.3g} is not positive, using Newey-West '
        'with {} lags.'.format(variance, lags), HansenHodrickFallbackWarning)
    return _mean_variance(series, lags, 'bartlett'), True


def tstat(estimate, se):
    """t statistic, infinite with the estimate's sign when se is 0.

    Returns
    -------
    t: float

    flagged: bool
        Whether the standard error was 0.

    """
    if se > 0:
        return estimate / se, False
    if estimate == 0 or math.isnan(estimate):
        return float('nan'), True
    return math.copysign(float('inf'), estimate), True


@operation_context('econ', 'ols_hac')
def ols_hac(X, y, lags, kernel='bartlett', fallback=True):
    """Time-series OLS with HAC standard errors.

    With the uniform kernel a non-positive variance of any coefficient
    triggers the Bartlett kernel instead when `fallback` is set.

    Returns
    -------
    fit: HacFit

    """
    fit = ols(X, y)
    A, names = _design(X, True)
    cov = hac_covariance(A, fit.residuals, lags, kernel)
    fell_back = False
    if kernel == 'uniform' and fallback and (np.diag(cov) <= 0).any():
        warnings.warn(
            'Hansen-Hodrick covariance is not positive, using Newey-West '
            'with {} lags.'.format(lags), HansenHodrickFallbackWarning)
        cov = hac_covariance(A, fit.residuals, lags, 'bartlett')
        fell_back = True
    se = np.sqrt(np.clip(np.diag(cov), 0, None))
    t = [tstat(b, s)[0] for b, s in zip(fit.params.values, se)]
    return HacFit(
        fit=fit, cov=pd.DataFrame(cov, index=names, columns=names),
        se=pd.Series(se, index=names), tstat=pd.Series(t, index=names),
        lags=lags, kernel=kernel, fell_back=fell_back
    )


@dataclass(frozen=True)
class Formula:
    """Response and regressor columns of a cross-sectional regression.

    Parameters
    ----------
    response: str
        Column of the dependent variable.

    regressors: tuple
        Columns of the regressors; the intercept is added automatically.

    labels: dict, optional
        Display names of the regressors used in result tables.

    """
    response: str
    regressors: tuple
    labels: dict = field(default_factory=dict)

    @property
    def columns(self):
        return [self.response] + list(self.regressors)

    @property
    def names(self):
        return [INTERCEPT] + list(self.regressors)

    def label(self, name):
        return self.labels.get(name, name)


@dataclass
class FMResult:
    """Fama-MacBeth estimates.

    Attributes
    ----------
    coefficients: pandas.DataFrame
        Stage-one coefficients, one row per used period.

    adj_r2: pandas.Series
        Stage-one adjusted R^2 per used period.

    nobs: pandas.Series
        Observations per used period.

    mean, se, tstat: pandas.Series
        Time-series means, Newey-West standard errors and t statistics.

    infinite_t: pandas.Series
        Flags coefficients whose standard error is 0.

    lags: int
        Newey-West lags.

    n_skipped: int
        Periods left out for lack of observations or rank.

    """
    coefficients: pd.DataFrame
    adj_r2: pd.Series
    nobs: pd.Series
    mean: pd.Series
    se: pd.Series
    tstat: pd.Series
    infinite_t: pd.Series
    lags: int
    n_skipped: int = 0
    labels: dict = field(default_factory=dict)

    @property
    def n_periods(self):
        return len(self.coefficients)

    @property
    def mean_adj_r2(self):
        return fsum_mean(self.adj_r2.values)

    def to_frame(self):
        """Long table: coefficient rows then an 'Adj. R2' row."""
        rows = [{
            'variable': self.labels.get(name, name),
            'estimate': self.mean[name],
            'se': self.se[name], 'tstat': self.tstat[name],
            'infinite_t': bool(self.infinite_t[name])
        } for name in self.coefficients.columns]
        rows.append({'variable': 'Adj. R2', 'estimate': self.mean_adj_r2,
                     'se': np.nan, 'tstat': np.nan, 'infinite_t': False})
        frame = pd.DataFrame(rows)
        frame['n_periods'] = self.n_periods
        frame['n_skipped'] = self.n_skipped
        frame['lags'] = self.lags
        return frame


def _stage_one(period, data, formula):
    data = data[formula.columns].dropna()
    try:
        fit = ols(data[list(formula.regressors)], data[formula.response])
    except (DegenerateError, SingularMatrixError) as e:
        logger.debug('Period %s skipped: %s', period, e)
        return period, None
    return period, fit


class FamaMacBeth(BaseEstimator):
    """Two-stage Fama-MacBeth estimator with Newey-West inference.

    Parameters
    ----------
    formula: Formula
        Response and regressors.

    lags: int, optional (default=6)
        Newey-West lags of the second stage.

    period: str, optional (default='week')
        Column identifying the cross-sections.

    n_jobs: int, optional (default=1)
        Number of jobs running the cross-sectional regressions.

    verbose: int, optional (default=0)
        Logs skipped periods at INFO level when positive.

    Attributes
    ----------
    result_: FMResult
        Estimates of the last fit.

    """
    def __init__(self, formula, lags=6, period='week', n_jobs=1, verbose=0):
        self.formula = formula
        self.lags = lags
        self.period = period
        self.n_jobs = n_jobs
        self.verbose = verbose

    def fit(self, X, y=None):
        """Runs both stages.

        Periods without more observations than coefficients after dropping
        rows with missing formula columns, or with a rank deficient design,
        are skipped and counted.

        Parameters
        ----------
        X: pandas.DataFrame
            Panel with the period column and the formula columns.

        Returns
        -------
        self: object
            Returns the instance itself.

        Raises
        ------
        InsufficientPeriodsError
            If fewer than lags + 2 periods are usable.

        """
        formula = self.formula
        results = Parallel(n_jobs=self.n_jobs)(
            delayed(_stage_one)(period, data, formula)
            for period, data in X.groupby(self.period, sort=True)
        )
        used = [(period, fit) for period, fit in results if fit is not None]
        n_skipped = len(results) - len(used)
        if n_skipped:
            log = logger.info if self.verbose > 0 else logger.debug
            log('%d of %d periods skipped for %s.', n_skipped, len(results),
                formula.response)
            warnings.warn(
                '{} periods without enough observations were skipped.'
                .format(n_skipped), SkippedPeriodWarning)
        if len(used) < self.lags + 2:
            raise InsufficientPeriodsError(
                '{} usable periods are too few for {} Newey-West lags.'
                .format(len(used), self.lags))

        index = pd.Index([period for period, _ in used], name=self.period)
        coefficients = pd.DataFrame(
            [fit.params.values for _, fit in used], index=index,
            columns=formula.names)
        mean, se, t, infinite = {}, {}, {}, {}
        for name in formula.names:
            series = coefficients[name].values
            mean[name] = fsum_mean(series)
            se[name] = math.sqrt(max(newey_west_var(series, self.lags), 0.))
            t[name], infinite[name] = tstat(mean[name], se[name])

        self.result_ = FMResult(
            coefficients=coefficients,
            adj_r2=pd.Series([fit.adj_r2 for _, fit in used], index=index),
            nobs=pd.Series([fit.n for _, fit in used], index=index),
            mean=pd.Series(mean), se=pd.Series(se), tstat=pd.Series(t),
            infinite_t=pd.Series(infinite), lags=self.lags,
            n_skipped=n_skipped, labels=dict(formula.labels)
        )
        return self


@operation_context('econ', 'fama_macbeth')
def fama_macbeth(panel, formula, lags, period='week', n_jobs=1):
    """Fama-MacBeth estimates of `formula` on `panel`, see `FamaMacBeth`.

    Returns
    -------
    result: FMResult

    """
    return FamaMacBeth(formula, lags, period, n_jobs).fit(panel).result_


def economic_magnitude(coefficient, iqr):
    """Weekly and annualised return difference across the regressor's IQR.

    Returns
    -------
    weekly, annual: float
        In percent; the annual figure is 52 weekly ones.

    Examples
    --------
    >>> [round(v, 4) for v in economic_magnitude(0.000934, 1.1950)]
    [0.1116, 5.8039]

    """
    weekly = coefficient * iqr * 100.
    return weekly, weekly * WEEKS_PER_YEAR


@operation_context('econ', 'interquartile_range')
def interquartile_range(values):
    """Type-7 interquartile range of the non-missing values."""
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    if not len(values):
        raise EmptySeriesError('Interquartile range of an empty series.')
    q1, q3 = np.quantile(values, [.25, .75])
    return float(q3 - q1)
