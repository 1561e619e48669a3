"""Scoring of a classification against planted truth."""


from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..decorators import operation_context
from ..exceptions import IdMismatchError


__all__ = [
    'ConfusionResult',
    'confusion'
]


@dataclass(frozen=True)
class ConfusionResult:
    """Identification and sign accuracy of one method.

    Attributes
    ----------
    identification_rate: float
        Share of planted retail trades the method signed, NaN without
        planted retail trades.

    sign_accuracy: float
        Share of the signed retail trades with the planted side, NaN when
        none was signed.

    cells: dict
        Counts of signed_correct, signed_wrong, unsigned and
        false_positive trades.

    """
    identification_rate: float
    sign_accuracy: float
    cells: dict

    @property
    def unsigned_rate(self):
        total = self.cells['signed_correct'] + self.cells['signed_wrong'] \
            + self.cells['unsigned']
        return self.cells['unsigned'] / total if total else float('nan')


@operation_context('synth', 'confusion')
def confusion(truth, signed, trade_ids=None):
    """Compares signed trades with the planted retail sides.

    Parameters
    ----------
    truth: pandas.DataFrame
        Planted retail trades with trade_id and true_side.

    signed: pandas.DataFrame
        Output of one method with trade_id and direction.

    trade_ids: array-like, optional (default=None)
        Every trade identifier of the market; checked against both inputs
        when given.

    Returns
    -------
    result: ConfusionResult

    Raises
    ------
    IdMismatchError
        If identifiers repeat or are not trades of the market.

    """
    for name, frame in (('truth', truth), ('signed', signed)):
        if frame['trade_id'].duplicated().any():
            raise IdMismatchError(
                'Trade identifiers repeat in the {} records.'.format(name))
        if trade_ids is not None:
            unknown = ~frame['trade_id'].isin(pd.Index(trade_ids))
            if unknown.any():
                raise IdMismatchError(
                    '{} {} identifiers are not trades of the market, e.g. {}.'
                    .format(int(unknown.sum()), name,
                            frame.loc[unknown, 'trade_id'].iloc[0]))

    joined = truth[['trade_id', 'true_side']].merge(
        signed[['trade_id', 'direction']], on='trade_id', how='outer',
        indicator=True)
    both = joined['_merge'] == 'both'
    correct = both & (joined['true_side'] == joined['direction'])
    cells = {
        'signed_correct': int(correct.sum()),
        'signed_wrong': int((both & ~correct).sum()),
        'unsigned': int((joined['_merge'] == 'left_only').sum()),
        'false_positive': int((joined['_merge'] == 'right_only').sum())
    }
    n_retail = len(truth)
    n_signed = cells['signed_correct'] + cells['signed_wrong']
    return ConfusionResult(
        identification_rate=n_signed / n_retail if n_retail else np.nan,
        sign_accuracy=cells['signed_correct'] / n_signed if n_signed
        else np.nan,
        cells=cells
    )
