"""Utilities for importing files."""


import io
import re

import numpy as np
import pandas as pd

from ..exceptions import MalformedRowError, PrecisionExceededError


__all__ = [
    'PRICE_SCALE',
    'read_schema_csv',
    'parse_fixed_point',
    'parse_integers',
    'parse_floats'
]


# Prices are held as integer ten-thousandths of a dollar.
PRICE_SCALE = 10000

_FIXED_POINT = r'^\s*(?P<sign>-?)(?P<int>\d+)(?:\.(?P<frac>\d*))?\s*$'
_INTEGER = r'^\s*-?\d+\s*$'
_TOKENIZER_LINE = re.compile(r'line (\d+)')

# Header occupies line 1, first record is on line 2.
FIRST_DATA_LINE = 2


def _open_source(source):
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(source)
    if isinstance(source, str) and '\n' in source:
        return io.StringIO(source)
    return source


def read_schema_csv(source, columns, schema=None, optional=()):
    """Reads a headered CSV keeping every field as text.

    Parameters
    ----------
    source: path, bytes, str or file-like
        CSV with a header line. A string containing a newline is taken as
        the CSV content itself.

    columns: list
        Canonical names of the required columns.

    schema: dict, optional (default=None)
        Maps canonical names onto the names used in the file header. Names
        not listed are expected verbatim.

    optional: iterable, optional (default=())
        Canonical names of columns kept when present.

    Returns
    -------
    frame: pandas.DataFrame
        Text columns renamed to their canonical names, in file order with a
        default RangeIndex.

    Raises
    ------
    MalformedRowError
        If a required column is missing, a row has the wrong number of
        fields or a required field is empty.

    """
    schema = dict(schema or {})
    try:
        frame = pd.read_csv(
            _open_source(source), dtype=str, keep_default_na=False,
            na_values=[], skipinitialspace=True
        )
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=[schema.get(c, c) for c in columns])
    except pd.errors.ParserError as e:
        match = _TOKENIZER_LINE.search(str(e))
        raise MalformedRowError(
            'wrong number of fields',
            int(match.group(1)) if match else None
        ) from e

    renaming = {}
    for name in list(columns) + list(optional):
        source_name = schema.get(name, name)
        if source_name in frame.columns:
            renaming[source_name] = name
        elif name in columns:
            raise MalformedRowError(
                'missing column {!r} (mapped from {!r})'
                .format(source_name, name), 1
            )
    frame = frame.rename(columns=renaming)
    kept = [c for c in list(columns) + list(optional) if c in frame.columns]
    frame = frame[kept].reset_index(drop=True)

    for name in columns:
        empty = frame[name].isna() | (frame[name].astype(str).str.len() == 0)
        if empty.any():
            position = int(np.flatnonzero(empty.values)[0])
            raise MalformedRowError(
                'empty field {!r}'.format(name), FIRST_DATA_LINE + position
            )

    return frame


def _first_bad(mask, values, name, error=MalformedRowError, reason=None):
    position = int(np.flatnonzero(np.asarray(mask))[0])
    raise error(
        '{} {!r} for {!r}'.format(
            reason or 'cannot parse', values.iloc[position], name
        ),
        FIRST_DATA_LINE + position
    )


def parse_fixed_point(values, name='price', digits=4, allow_missing=False):
    """Parses decimal strings into integers scaled by 10**digits.

    The conversion never goes through binary floating point so the subpenny
    digits survive exactly.

    Parameters
    ----------
    values: pandas.Series of str
        Decimal strings such as '20.0070'.

    name: str, optional (default='price')
        Column name used in error messages.

    digits: int, optional (default=4)
        Number of decimal digits kept.

    allow_missing: bool, optional (default=False)
        Whether empty strings are accepted and mapped to missing values.

    Returns
    -------
    parsed: pandas.Series
        int64 when nothing is missing, nullable Int64 otherwise.

    Raises
    ------
    PrecisionExceededError
        If any value carries more than `digits` decimals.

    """
    values = pd.Series(values, dtype=object).fillna('').astype(str)
    missing = values.str.strip().str.len() == 0
    if missing.any() and not allow_missing:
        _first_bad(missing, values, name, reason='missing value')

    parts = values.str.extract(_FIXED_POINT)
    bad = parts['int'].isna() & ~missing
    if bad.any():
        _first_bad(bad, values, name)

    fraction = parts['frac'].fillna('')
    too_precise = fraction.str.len() > digits
    if too_precise.any():
        _first_bad(
            too_precise, values, name, error=PrecisionExceededError,
            reason='more than {} decimals in'.format(digits)
        )

    valid = ~missing
    scaled = pd.Series(pd.NA, index=values.index, dtype='Int64')
    if valid.any():
        whole = parts.loc[valid, 'int'].astype(np.int64)
        frac = fraction[valid].str.ljust(digits, '0').astype(np.int64)
        sign = np.where(parts.loc[valid, 'sign'] == '-', -1, 1)
        scaled[valid] = sign * (whole * 10 ** digits + frac)
    if not missing.any():
        scaled = scaled.astype(np.int64)
    return scaled


def parse_integers(values, name, allow_missing=False):
    """Parses integer strings, see `parse_fixed_point` for the contract."""
    values = pd.Series(values, dtype=object).fillna('').astype(str)
    missing = values.str.strip().str.len() == 0
    if missing.any() and not allow_missing:
        _first_bad(missing, values, name, reason='missing value')
    bad = ~values.str.match(_INTEGER) & ~missing
    if bad.any():
        _first_bad(bad, values, name)
    if missing.any():
        parsed = pd.Series(pd.NA, index=values.index, dtype='Int64')
        parsed[~missing] = values[~missing].astype(np.int64)
        return parsed
    return values.astype(np.int64)


def parse_floats(values, name, allow_missing=False):
    """Parses decimal strings into floats, empty strings become NaN."""
    values = pd.Series(values, dtype=object).fillna('').astype(str)
    missing = values.str.strip().str.len() == 0
    if missing.any() and not allow_missing:
        _first_bad(missing, values, name, reason='missing value')
    parsed = pd.to_numeric(values.where(~missing, None), errors='coerce')
    bad = parsed.isna() & ~missing
    if bad.any():
        _first_bad(bad, values, name)
    return parsed.astype(float)
