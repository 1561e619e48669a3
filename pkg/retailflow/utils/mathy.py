import math

import numpy as np

from ..exceptions import InsufficientGroupsError


__all__ = [
    'fsum_mean',
    'compound',
    'equal_count_groups'
]


def fsum_mean(values):
    """Mean with compensated summation, independent of accumulation order."""
    values = [float(v) for v in values]
    if not values:
        return float('nan')
    return math.fsum(values) / len(values)


def compound(returns):
    """Compounds simple returns into one return, NaN if any is missing.

    An empty sequence compounds to 0.
    """
    returns = np.asarray(returns, dtype=float)
    if np.isnan(returns).any():
        return float('nan')
    return float(np.prod(1. + returns) - 1.)


def equal_count_groups(values, tie_keys, n_groups):
    """Splits items into groups of (almost) equal count by ranking values.

    Items are ordered by value, ties broken by `tie_keys` (ascending), and
    the item with rank r out of n lands in group floor(r * n_groups / n).
    Group sizes therefore differ by at most one.

    Parameters
    ----------
    values: array-like, shape = (n_samples, )
        Sorting characteristic.

    tie_keys: array-like, shape = (n_samples, )
        Secondary key resolving ties deterministically, e.g. symbols.

    n_groups: int
        Number of groups.

    Returns
    -------
    groups: array, shape = (n_samples, )
        Group labels from 0 (lowest values) to n_groups - 1.

    Raises
    ------
    InsufficientGroupsError
        If there are fewer items than groups.

    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < n_groups:
        raise InsufficientGroupsError(
            'Cannot split {} items into {} groups.'.format(n, n_groups)
        )
    _, tie_rank = np.unique(np.asarray(tie_keys), return_inverse=True)
    order = np.lexsort((tie_rank.ravel(), values))
    groups = np.empty(n, dtype=np.int64)
    groups[order] = np.arange(n) * n_groups // n
    return groups
