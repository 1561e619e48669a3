"""Brute-force reference implementations the estimators are checked
against.

Nothing here shares code with `retailflow.econ`: the OLS oracle solves the
normal equations in exact rational arithmetic and the HAC oracles evaluate
the autocovariance sums term by term.
"""


import math

from fractions import Fraction

import numpy as np


__all__ = [
    'ols_oracle',
    'hac_variance_oracle',
    'newey_west_oracle',
    'hansen_hodrick_oracle',
    'compound_oracle'
]


def ols_oracle(X, y, add_intercept=True):
    """OLS coefficients from exact normal equations.

    Every float is converted to a Fraction, (X'X) b = X'y is solved by
    Gauss-Jordan elimination and the result rounded once.

    Parameters
    ----------
    X: array-like of shape (n, k)

    y: array-like of shape (n,)

    add_intercept: bool, optional (default=True)
        Prepends a column of ones.

    Returns
    -------
    params: numpy.ndarray

    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    rows = [[Fraction(v) for v in row] for row in X.tolist()]
    if add_intercept:
        rows = [[Fraction(1)] + row for row in rows]
    target = [Fraction(v) for v in np.asarray(y, dtype=float).tolist()]
    k = len(rows[0])

    system = []
    for i in range(k):
        line = [sum((row[i] * row[j] for row in rows), Fraction(0))
                for j in range(k)]
        line.append(sum((row[i] * t for row, t in zip(rows, target)),
                        Fraction(0)))
        system.append(line)

    for col in range(k):
        pivot = next((r for r in range(col, k) if system[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError('Normal equations are singular.')
        system[col], system[pivot] = system[pivot], system[col]
        head = system[col][col]
        system[col] = [v / head for v in system[col]]
        for r in range(k):
            if r != col and system[r][col] != 0:
                factor = system[r][col]
                system[r] = [a - factor * b
                             for a, b in zip(system[r], system[col])]
    return np.array([float(system[i][k]) for i in range(k)])


def hac_variance_oracle(series, lags, weight):
    """Variance of the mean from the definitional autocovariance sum.

    gamma_l = 1/T sum_{t=l}^{T-1} (x_t - m)(x_{t-l} - m) and
    Var = (gamma_0 + 2 sum_{l=1}^{L} weight(l) gamma_l) / T.
    """
    x = [float(v) for v in series]
    T = len(x)
    m = math.fsum(x) / T
    gammas = []
    for lag in range(lags + 1):
        gammas.append(math.fsum(
            (x[t] - m) * (x[t - lag] - m) for t in range(lag, T)) / T)
    total = gammas[0] + 2 * math.fsum(
        weight(lag) * gammas[lag] for lag in range(1, lags + 1))
    return total / T


def newey_west_oracle(series, lags):
    """Bartlett-weighted variance of the mean.

    >>> newey_west_oracle([1, 2, 3, 4], 1)
    0.390625

    """
    return hac_variance_oracle(series, lags, lambda lag: 1 - lag / (lags + 1))


def hansen_hodrick_oracle(series, lags):
    """Uniformly weighted variance of the mean.

    >>> hansen_hodrick_oracle([1, 2, 3, 4], 1)
    0.46875

    """
    return hac_variance_oracle(series, lags, lambda lag: 1.)


def compound_oracle(returns):
    """prod(1 + r) - 1 by a plain loop, NaN if any return is missing."""
    gross = 1.
    for r in returns:
        if r is None or r != r:
            return float('nan')
        gross *= 1. + r
    return gross - 1.
