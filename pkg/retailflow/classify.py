"""Identification and signing of marketable retail trades.

Retail trades are off-exchange prints (exchange code 'D') whose price
carries a non-zero fraction of a cent. Two rules sign them:

- `BJZZ` looks at the fractional cent alone, (0.6, 1) is a buy and (0, 0.4)
  is a sell, anything in [0.4, 0.6] stays unsigned.
- `QMP` compares the price with the prevailing NBBO midpoint and leaves the
  trades priced within the 40%-60% band of the spread unsigned.

All price comparisons are carried out on integer ten-thousandths of a
dollar, thresholds are turned into exact ratios beforehand.
"""


import logging
import warnings

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pandas as pd

from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin

from .decorators import operation_context
from .exceptions import ConfigError, CrossedQuoteWarning
from .mdio import OFF_EXCHANGE, iter_records


__all__ = [
    'BJZZ',
    'QMP',
    'METHODS',
    'BUY',
    'SELL',
    'SIGNED_COLUMNS',
    'SignedRetailTrade',
    'QuoteTape',
    'ClassifiedDay',
    'RetailTradeClassifier',
    'subpenny_fraction',
    'classify_bjzz',
    'prevailing_nbbo',
    'classify_qmp',
    'classify_day',
    'classify_days'
]

logger = logging.getLogger(__name__)

BJZZ = 'BJZZ'
QMP = 'QMP'
METHODS = (BJZZ, QMP)
BUY = 'Buy'
SELL = 'Sell'

NO_QUOTE = 'NO_QUOTE'
CROSSED = 'CROSSED'
INSIDE_BAND = 'INSIDE_BAND'

# Ten-thousandths of a dollar per cent.
CENT = 100
ROUND_LOT = 100
REGULAR_CONDITIONS = ('', '@')

SIGNED_COLUMNS = ['trade_id', 'symbol', 'date', 'ts', 'price', 'size',
                  'method', 'direction', 'fraction', 'bid', 'ask']


def _ratio(value):
    """Exact (numerator, denominator) of a decimal threshold."""
    ratio = Fraction(str(value)).limit_denominator(10 ** 6)
    return ratio.numerator, ratio.denominator


def _hundredths(value):
    return int(Fraction(str(value)) * CENT)


def subpenny_fraction(price):
    """Fractional cent of a price given in ten-thousandths of a dollar.

    Parameters
    ----------
    price: int or array-like of int
        Price(s) in ten-thousandths, e.g. 200070 for $20.0070.

    Returns
    -------
    fraction: float or numpy.ndarray
        Value in [0, 1), e.g. 0.70 for $20.0070.

    """
    if np.ndim(price) == 0:
        return (int(price) % CENT) / CENT
    return (np.asarray(price, dtype=np.int64) % CENT) / CENT


@dataclass(frozen=True)
class SignedRetailTrade:
    """A retail-identified trade together with the sign a method gave it."""
    trade: object
    method: str
    direction: str
    subpenny_fraction: float
    matched_bid: int = None
    matched_ask: int = None


def _is_identified(ex, price):
    return (ex == OFF_EXCHANGE) & (np.asarray(price, dtype=np.int64) % CENT
                                   != 0)


def _bjzz_directions(hundredths, buy_low, sell_high):
    """Vectorised BJZZ signs: 1 buy, -1 sell, 0 unsigned."""
    buy = hundredths > _hundredths(buy_low)
    sell = (hundredths > 0) & (hundredths < _hundredths(sell_high))
    return np.where(buy, 1, np.where(sell, -1, 0))


def _qmp_directions(price, bid, ask, band_low, band_high):
    """Vectorised QMP signs on integer prices: 1 buy, -1 sell, 0 unsigned.

    The band [bid + low * spread, bid + high * spread] is inclusive.
    """
    price = np.asarray(price, dtype=np.int64)
    bid = np.asarray(bid, dtype=np.int64)
    ask = np.asarray(ask, dtype=np.int64)
    spread = ask - bid
    offset = price - bid
    low_num, low_den = _ratio(band_low)
    high_num, high_den = _ratio(band_high)
    inside = (offset * low_den >= low_num * spread) \
        & (offset * high_den <= high_num * spread)
    doubled = 2 * price
    buy = ~inside & (doubled > bid + ask)
    sell = ~inside & (doubled < bid + ask)
    return np.where(buy, 1, np.where(sell, -1, 0))


def _direction_name(sign):
    return BUY if sign > 0 else SELL


def classify_bjzz(trade, buy_low=.6, sell_high=.4):
    """Signs a trade by its fractional cent.

    Parameters
    ----------
    trade: TradeRecord
        Trade to classify.

    buy_low: float, optional (default=.6)
        Fractions strictly above it (and below 1) are buys.

    sell_high: float, optional (default=.4)
        Fractions strictly between 0 and it are sells.

    Returns
    -------
    signed: SignedRetailTrade or None
        None for on-exchange trades, round-cent prices and fractions inside
        [sell_high, buy_low].

    """
    if trade.exchange_code != OFF_EXCHANGE:
        return None
    hundredths = int(trade.price) % CENT
    sign = int(_bjzz_directions(np.array([hundredths]), buy_low, sell_high)[0])
    if sign == 0:
        return None
    return SignedRetailTrade(
        trade=trade, method=BJZZ, direction=_direction_name(sign),
        subpenny_fraction=hundredths / CENT
    )


def classify_qmp(trade, nbbo, band_low=.4, band_high=.6):
    """Signs a retail-identified trade against the quote midpoint.

    Parameters
    ----------
    trade: TradeRecord
        Trade to classify.

    nbbo: tuple (bid, ask) or None
        Prevailing quote in ten-thousandths, see `prevailing_nbbo`.

    band_low, band_high: float, optional (default=.4, .6)
        Bounds of the inclusive exclusion band as fractions of the spread
        measured from the bid.

    Returns
    -------
    signed: SignedRetailTrade or None
        None if the trade is not retail-identified, no usable quote
        prevails or the price lies inside the band.

    """
    if trade.exchange_code != OFF_EXCHANGE or int(trade.price) % CENT == 0:
        return None
    if nbbo is None:
        return None
    bid, ask = nbbo
    if bid >= ask:
        return None
    sign = int(_qmp_directions(
        [trade.price], [bid], [ask], band_low, band_high
    )[0])
    if sign == 0:
        return None
    return SignedRetailTrade(
        trade=trade, method=QMP, direction=_direction_name(sign),
        subpenny_fraction=(int(trade.price) % CENT) / CENT,
        matched_bid=int(bid), matched_ask=int(ask)
    )


class QuoteTape(object):
    """Per-symbol, time-sorted quotes with an as-of lookup.

    Quotes with equal timestamps keep their file order so that a lookup
    resolves ties to the last of them.

    Parameters
    ----------
    tapes: dict
        Maps a symbol onto a tuple of numpy arrays (ts, bid, ask, crossed)
        sorted by ts.

    """
    def __init__(self, tapes):
        self.tapes = tapes

    @classmethod
    def from_quotes(cls, quotes):
        """Builds the tape from the output of `mdio.parse_quotes`."""
        tapes = {}
        if len(quotes):
            ordered = quotes.sort_values('ts', kind='mergesort')
            for symbol, group in ordered.groupby('symbol', sort=True):
                tapes[symbol] = (
                    group['ts'].to_numpy(dtype=np.int64),
                    group['bid'].to_numpy(dtype=np.int64),
                    group['ask'].to_numpy(dtype=np.int64),
                    group['crossed'].to_numpy(dtype=bool)
                )
        return cls(tapes)

    @property
    def symbols(self):
        return sorted(self.tapes)

    def lookup(self, symbols, timestamps, delay=0):
        """Vectorised as-of lookup of the prevailing quotes.

        Parameters
        ----------
        symbols: array-like of str
            Symbol of every query.

        timestamps: array-like of int
            Query times in nanoseconds.

        delay: int, optional (default=0)
            Quotes must be stamped at or before `timestamp - delay`.

        Returns
        -------
        matched: pandas.DataFrame
            Columns bid, ask (nullable Int64) and reason, which is '' for a
            usable quote, 'NO_QUOTE' or 'CROSSED' otherwise. Bid and ask of
            a crossed quote are reported but must not be used for signing.

        """
        if delay < 0:
            raise ConfigError('Quote delay must be non-negative.')
        symbols = np.asarray(symbols, dtype=object)
        timestamps = np.asarray(timestamps, dtype=np.int64)
        n = len(symbols)
        bid = np.zeros(n, dtype=np.int64)
        ask = np.zeros(n, dtype=np.int64)
        found = np.zeros(n, dtype=bool)
        crossed = np.zeros(n, dtype=bool)
        for symbol in pd.unique(symbols):
            if symbol not in self.tapes:
                continue
            rows = np.flatnonzero(symbols == symbol)
            ts, bids, asks, flags = self.tapes[symbol]
            position = np.searchsorted(
                ts, timestamps[rows] - delay, side='right'
            ) - 1
            hit = position >= 0
            rows, position = rows[hit], position[hit]
            bid[rows] = bids[position]
            ask[rows] = asks[position]
            crossed[rows] = flags[position]
            found[rows] = True
        reason = np.where(~found, NO_QUOTE, np.where(crossed, CROSSED, ''))
        return pd.DataFrame({
            'bid': pd.arrays.IntegerArray(bid, ~found),
            'ask': pd.arrays.IntegerArray(ask, ~found),
            'reason': reason
        })

    def __repr__(self):
        return 'QuoteTape({} symbols)'.format(len(self.tapes))


def prevailing_nbbo(tape, symbol, timestamp, delay=0):
    """Latest usable quote at `timestamp - delay`.

    Returns
    -------
    nbbo: tuple (bid, ask) or None
        None for unknown symbols, when no quote prevails yet or when the
        prevailing quote is crossed or locked.

    """
    matched = tape.lookup([symbol], [timestamp], delay)
    if matched['reason'].iloc[0]:
        return None
    return int(matched['bid'].iloc[0]), int(matched['ask'].iloc[0])


@dataclass
class ClassifiedDay:
    """Parallel BJZZ and QMP streams of one trading day.

    `unsigned` counts retail-identified but unsigned trades per symbol,
    method and reason.
    """
    bjzz: pd.DataFrame
    qmp: pd.DataFrame
    unsigned: pd.DataFrame

    def signed(self):
        """Both streams stacked, BJZZ first."""
        return pd.concat([self.bjzz, self.qmp], ignore_index=True)

    def to_records(self, method):
        """SignedRetailTrade records of one method's stream."""
        frame = self.bjzz if method == BJZZ else self.qmp
        for trade, row in zip(iter_records(frame, 'trades'),
                              frame.itertuples(index=False)):
            yield SignedRetailTrade(
                trade=trade, method=method, direction=row.direction,
                subpenny_fraction=row.fraction,
                matched_bid=None if pd.isna(row.bid) else int(row.bid),
                matched_ask=None if pd.isna(row.ask) else int(row.ask)
            )


class RetailTradeClassifier(BaseEstimator, TransformerMixin):
    """Identifies retail trades and signs them by BJZZ and QMP.

    Parameters
    ----------
    methods: tuple, optional (default=('BJZZ', 'QMP'))
        Methods to apply.

    delay_ns: int, optional (default=0)
        Quote-matching delay of the QMP rule in nanoseconds.

    band_low, band_high: float, optional (default=.4, .6)
        Inclusive QMP exclusion band as fractions of the spread.

    buy_low, sell_high: float, optional (default=.6, .4)
        BJZZ thresholds on the fractional cent.

    regular_only: bool, optional (default=False)
        Keep only trades whose `cond` column marks a regular-way sale
        ('' or '@'). Ignored when the trades carry no conditions.

    size_class: str {'all', 'round', 'odd'}, optional (default='all')
        Keep all trades, round lots (size >= 100) or odd lots only.

    n_jobs: int, optional (default=1)
        Number of jobs classifying symbols in parallel.

    verbose: int, optional (default=0)
        Logs classification counts at INFO level when positive.

    Attributes
    ----------
    tape_: QuoteTape
        Quotes the QMP rule is matched against.

    """
    def __init__(self, methods=METHODS, delay_ns=0, band_low=.4,
                 band_high=.6, buy_low=.6, sell_high=.4, regular_only=False,
                 size_class='all', n_jobs=1, verbose=0):
        self.methods = methods
        self.delay_ns = delay_ns
        self.band_low = band_low
        self.band_high = band_high
        self.buy_low = buy_low
        self.sell_high = sell_high
        self.regular_only = regular_only
        self.size_class = size_class
        self.n_jobs = n_jobs
        self.verbose = verbose

    @classmethod
    def from_config(cls, config, **kwargs):
        """Builds the classifier from a `RunConfig`."""
        params = dict(
            delay_ns=config['qmp.delay_ns'],
            band_low=config['qmp.band_low'],
            band_high=config['qmp.band_high'],
            buy_low=config['bjzz.buy_low'],
            sell_high=config['bjzz.sell_high'],
            regular_only=config['classify.regular_only'],
            size_class=config['classify.size_class'],
            n_jobs=config['run.threads']
        )
        params.update(kwargs)
        return cls(**params)

    def fit(self, X, y=None):
        """Builds the quote tape.

        Parameters
        ----------
        X: pandas.DataFrame or QuoteTape
            Quotes as returned by `mdio.parse_quotes`.

        Returns
        -------
        self: object
            Returns the instance itself.

        """
        if not 0 <= self.band_low <= .5 <= self.band_high <= 1:
            raise ConfigError(
                'QMP band must satisfy 0 <= low <= 0.5 <= high <= 1.'
            )
        if not 0 < self.sell_high <= self.buy_low < 1:
            raise ConfigError(
                'BJZZ thresholds must satisfy 0 < sell_high <= buy_low < 1.'
            )
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError('Unknown methods: {}'.format(sorted(unknown)))
        self.tape_ = X if isinstance(X, QuoteTape) else \
            QuoteTape.from_quotes(X)
        return self

    def transform(self, X):
        """Signs the trades in X.

        Returns
        -------
        signed: pandas.DataFrame
            Columns `SIGNED_COLUMNS`, one row per trade and method that
            signed it; methods stacked in `methods` order, trades in file
            order within each method.

        """
        day = self.classify(X)
        frames = [day.bjzz if m == BJZZ else day.qmp for m in self.methods]
        return pd.concat(frames, ignore_index=True)

    def classify(self, X):
        """Signs the trades in X and reports the unsigned ones.

        Returns
        -------
        day: ClassifiedDay

        """
        try:
            getattr(self, 'tape_')
        except AttributeError:
            raise RuntimeError('Could not find the attribute.\n'
                               'Fitting is necessary before you do '
                               'the transformation.')

        trades = self._select(X).assign(_row=lambda f: np.arange(len(f)))
        partitions = [g for _, g in trades.groupby('symbol', sort=True)]
        results = Parallel(n_jobs=self.n_jobs)(
            delayed(self._classify_partition)(part) for part in partitions
        )
        signed = {method: [] for method in METHODS}
        unsigned = []
        for partition_signed, partition_unsigned in results:
            for method in METHODS:
                signed[method].append(partition_signed[method])
            unsigned.append(partition_unsigned)

        streams = {
            method: self._finish(signed[method]) for method in METHODS
        }
        unsigned = self._count_unsigned(unsigned)

        n_crossed = int(unsigned.loc[unsigned['reason'] == CROSSED, 'n']
                        .sum()) if len(unsigned) else 0
        if n_crossed:
            warnings.warn(
                '{} retail trades matched a crossed or locked quote and were '
                'left unsigned by QMP.'.format(n_crossed), CrossedQuoteWarning
            )
        log = logger.info if self.verbose > 0 else logger.debug
        log('Classified %d trades: %d BJZZ and %d QMP signed.', len(trades),
            len(streams[BJZZ]), len(streams[QMP]))
        return ClassifiedDay(streams[BJZZ], streams[QMP], unsigned)

    def _select(self, trades):
        if self.regular_only and 'cond' in trades.columns:
            trades = trades[trades['cond'].str.strip().isin(
                REGULAR_CONDITIONS)]
        if self.size_class == 'round':
            trades = trades[trades['size'] >= ROUND_LOT]
        elif self.size_class == 'odd':
            trades = trades[trades['size'] < ROUND_LOT]
        elif self.size_class != 'all':
            raise ConfigError(
                'Unknown size class: {}'.format(self.size_class)
            )
        if 'date' not in trades.columns:
            trades = trades.assign(date=pd.NaT)
        return trades.reset_index(drop=True)

    def _classify_partition(self, trades):
        identified = trades[_is_identified(
            trades['ex'].to_numpy(), trades['price'].to_numpy()
        )].reset_index(drop=True)
        hundredths = identified['price'].to_numpy(dtype=np.int64) % CENT
        base = identified.assign(fraction=hundredths / CENT)
        signed = {}
        unsigned = []

        bjzz = _bjzz_directions(hundredths, self.buy_low, self.sell_high)
        signed[BJZZ] = base[bjzz != 0].assign(
            method=BJZZ,
            direction=np.where(bjzz[bjzz != 0] > 0, BUY, SELL),
            bid=pd.NA, ask=pd.NA
        )
        unsigned.append(base.loc[bjzz == 0, ['symbol']].assign(
            method=BJZZ, reason=INSIDE_BAND))

        matched = self.tape_.lookup(
            identified['symbol'], identified['ts'], self.delay_ns
        )
        usable = (matched['reason'] == '').to_numpy()
        qmp = np.zeros(len(identified), dtype=np.int64)
        if usable.any():
            qmp[usable] = _qmp_directions(
                identified['price'].to_numpy()[usable],
                matched['bid'].to_numpy()[usable].astype(np.int64),
                matched['ask'].to_numpy()[usable].astype(np.int64),
                self.band_low, self.band_high
            )
        reason = np.where(usable, INSIDE_BAND, matched['reason'].to_numpy())
        signed[QMP] = base.assign(
            bid=matched['bid'].values, ask=matched['ask'].values
        )[qmp != 0].assign(
            method=QMP, direction=np.where(qmp[qmp != 0] > 0, BUY, SELL)
        )
        unsigned.append(base.loc[qmp == 0, ['symbol']].assign(
            method=QMP, reason=reason[qmp == 0]))
        return signed, pd.concat(unsigned, ignore_index=True)

    @staticmethod
    def _finish(frames):
        if not frames:
            return pd.DataFrame(columns=SIGNED_COLUMNS)
        stream = pd.concat(frames, ignore_index=True) \
            .sort_values('_row', kind='mergesort')
        stream['bid'] = stream['bid'].astype('Int64')
        stream['ask'] = stream['ask'].astype('Int64')
        return stream[SIGNED_COLUMNS].reset_index(drop=True)

    @staticmethod
    def _count_unsigned(frames):
        columns = ['symbol', 'method', 'reason', 'n']
        if not frames:
            return pd.DataFrame(columns=columns)
        counts = pd.concat(frames, ignore_index=True)
        if not len(counts):
            return pd.DataFrame(columns=columns)
        return counts.groupby(['symbol', 'method', 'reason'], sort=True) \
            .size().rename('n').reset_index()


@operation_context('classify', 'classify_day')
def classify_day(trades, tape, config=None, **kwargs):
    """Applies both classifiers to every trade of a day.

    Parameters
    ----------
    trades: pandas.DataFrame
        Output of `mdio.parse_trades`.

    tape: QuoteTape or pandas.DataFrame
        Quotes of the same day.

    config: RunConfig, optional (default=None)
        Supplies the classification keys, defaults otherwise.

    **kwargs:
        Overrides of `RetailTradeClassifier` parameters.

    Returns
    -------
    day: ClassifiedDay

    """
    if config is not None:
        classifier = RetailTradeClassifier.from_config(config, **kwargs)
    else:
        classifier = RetailTradeClassifier(**kwargs)
    return classifier.fit(tape).classify(trades)


@operation_context('classify', 'classify_days')
def classify_days(trades, quotes, config=None, **kwargs):
    """Classifies a multi-day file day by day.

    Timestamps restart every day, so each day's trades are matched against
    that day's quotes only.

    Parameters
    ----------
    trades, quotes: pandas.DataFrame
        Parsed trades and quotes with a `date` column.

    Returns
    -------
    day: ClassifiedDay
        Streams and unsigned counts of all days, in date order.

    """
    if 'date' not in trades.columns or 'date' not in quotes.columns:
        return classify_day(trades, quotes, config, **kwargs)
    days = []
    by_date = dict(tuple(quotes.groupby('date', sort=True)))
    for date, day_trades in trades.groupby('date', sort=True):
        day_quotes = by_date.get(date, quotes.iloc[:0])
        days.append(classify_day(day_trades, day_quotes, config, **kwargs))
    if not days:
        return classify_day(trades, quotes.iloc[:0], config, **kwargs)
    unsigned = pd.concat([d.unsigned for d in days], ignore_index=True)
    if len(unsigned):
        unsigned = unsigned.groupby(['symbol', 'method', 'reason'],
                                    sort=True)['n'].sum().reset_index()
    return ClassifiedDay(
        pd.concat([d.bjzz for d in days], ignore_index=True),
        pd.concat([d.qmp for d in days], ignore_index=True),
        unsigned
    )
