"""Utilities for input validation."""


import numpy as np
import pandas as pd

from ..exceptions import DataError


__all__ = [
    "check_is_dataframe",
    "check_column_existence",
    "check_strictly_increasing",
    "check_lags_precede"
]


def check_is_dataframe(X):
    """Checks whether object is a pandas.DataFrame.

    Parameters
    ----------
    X: object
        Object suspected of being a pandas.DataFrame.

    Raises
    ------
    TypeError
        If object is not a pandas.DataFrame.

    """
    if not isinstance(X, pd.DataFrame):
        raise TypeError("Input must be an instance of pandas.DataFrame.")


def check_column_existence(X, columns):
    """Checks whether all listed columns are in a given DataFrame.

    Parameters
    ----------
    X: pandas.DataFrame
        Data with columns to be checked for occurrence.

    columns: single label or list-like
        Columns' labels to check.

    Raises
    ------
    DataError
        If one of the elements of `columns` is not found in the `X` columns.

    """
    check_is_dataframe(X)
    if isinstance(columns, str):
        columns = [columns]

    missing = [col for col in columns if col not in X.columns]
    if missing:
        raise DataError(
            "Columns not found in the DataFrame: {}".format(", ".join(missing))
        )


def check_strictly_increasing(values, name):
    """Checks that a sequence is strictly increasing.

    Parameters
    ----------
    values: array-like
        Sequence of comparable values, e.g. dates.

    name: str
        Name used in the error message.

    Raises
    ------
    DataError
        At the first position where the sequence does not increase.

    """
    values = pd.Series(values).reset_index(drop=True)
    if len(values) < 2:
        return
    steps = values.iloc[1:].values > values.iloc[:-1].values
    if not steps.all():
        position = int(np.flatnonzero(~steps)[0]) + 1
        raise DataError(
            "{} must be strictly increasing, violated at position {} ({!r})"
            .format(name, position, values.iloc[position])
        )


def check_lags_precede(X, period_column, dated_columns):
    """Checks the no look-ahead property of a panel.

    Parameters
    ----------
    X: pandas.DataFrame
        Panel where every row is dated by `period_column`.

    period_column: str
        Column with the period of the dependent variable.

    dated_columns: dict
        Maps a regressor column onto the column holding the period its value
        is measured at.

    Raises
    ------
    DataError
        If some regressor is not dated strictly before its row's period.

    """
    for column, date_column in dated_columns.items():
        observed = X[column].notna()
        late = observed & ~(X[date_column] < X[period_column])
        if late.any():
            raise DataError(
                "Look-ahead in {!r}: {} rows are not dated before {!r}"
                .format(column, int(late.sum()), period_column)
            )
