"""Parsing and validation of market data files and the stock universe.

Five headered CSV layouts are understood; a schema mapping renames the
columns of a differently labelled file onto the canonical names below.

========  ==========================================================
file      canonical columns
========  ==========================================================
trades    symbol, ts, price, size, ex  (optional: date, trade_id, cond)
quotes    symbol, ts, bid, ask, bsz, asz  (optional: date)
daily     symbol, date, close, bid, ask, shrout, shrcd, be, vol, pilot
factors   date, mkt_rf, smb, hml, rf
calendar  date, week_id
========  ==========================================================

Timestamps are nanoseconds since midnight. Prices are decimal strings with
at most four decimals and are held as integer ten-thousandths of a dollar.
In the daily file `vol` is the day's share volume and `be` the book equity
in dollars (may be empty).
"""


import logging

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .decorators import operation_context
from .exceptions import (
    CalendarGapError, CrossedQuoteWarning, MalformedRowError
)
from .utils.exporting import format_fixed_point, frame_to_csv
from .utils.importing import (
    FIRST_DATA_LINE, PRICE_SCALE, parse_fixed_point, parse_floats,
    parse_integers, read_schema_csv
)
from .utils.validation import check_strictly_increasing


__all__ = [
    'TradeRecord',
    'QuoteRecord',
    'DailySecurityRecord',
    'FactorRecord',
    'TradingCalendar',
    'TRADE_COLUMNS',
    'QUOTE_COLUMNS',
    'DAILY_COLUMNS',
    'FACTOR_COLUMNS',
    'CALENDAR_COLUMNS',
    'MARKET_COLUMNS',
    'parse_trades',
    'parse_quotes',
    'parse_daily',
    'parse_factors',
    'parse_calendar',
    'parse_market',
    'parse_signed',
    'parse_flows',
    'write_records',
    'iter_records',
    'eligibility_table',
    'apply_universe_filters'
]

logger = logging.getLogger(__name__)

TRADE_COLUMNS = ['symbol', 'ts', 'price', 'size', 'ex']
QUOTE_COLUMNS = ['symbol', 'ts', 'bid', 'ask', 'bsz', 'asz']
DAILY_COLUMNS = ['symbol', 'date', 'close', 'bid', 'ask', 'shrout', 'shrcd',
                 'be', 'vol', 'pilot']
FACTOR_COLUMNS = ['date', 'mkt_rf', 'smb', 'hml', 'rf']
CALENDAR_COLUMNS = ['date', 'week_id']
MARKET_COLUMNS = ['date', 'mkt']
SIGNED_LAYOUT = ['trade_id', 'symbol', 'date', 'ts', 'price', 'size', 'method',
                 'direction', 'fraction', 'bid', 'ask']
FLOW_LAYOUT = ['symbol', 'date', 'method', 'mrbvol', 'mrsvol', 'mrbtrd',
               'mrstrd', 'mroibvol', 'mroibtrd']

NANOS_PER_DAY = 24 * 3600 * 10 ** 9
OFF_EXCHANGE = 'D'
COMMON_SHARE_CODES = (10, 11)
MIN_PRICE = 1 * PRICE_SCALE
PILOT_GROUPS = ('none', 'G1', 'G2', 'G3')
PILOT_EXCLUDED = ('G2', 'G3')
PILOT_START = pd.Period('2016-10', freq='M')
PILOT_END = pd.Period('2018-10', freq='M')


@dataclass(frozen=True)
class TradeRecord:
    """One printed transaction.

    `price` is in ten-thousandths of a dollar, `timestamp` in nanoseconds
    since midnight of `date`.
    """
    symbol: str
    timestamp: int
    price: int
    size: int
    exchange_code: str
    date: object = None
    trade_id: int = None
    condition: str = None

    @property
    def is_off_exchange(self):
        return self.exchange_code == OFF_EXCHANGE


@dataclass(frozen=True)
class QuoteRecord:
    """One national best bid and offer update, prices in ten-thousandths."""
    symbol: str
    timestamp: int
    bid: int
    ask: int
    bid_size: int = 0
    ask_size: int = 0
    date: object = None

    @property
    def crossed(self):
        """Crossed or locked quote (bid >= ask)."""
        return self.bid >= self.ask


@dataclass(frozen=True)
class DailySecurityRecord:
    symbol: str
    date: object
    close: int
    bid: int
    ask: int
    shares_outstanding: float
    share_code: int
    book_equity: float
    volume: int
    tick_pilot_group: str = 'none'


@dataclass(frozen=True)
class FactorRecord:
    date: object
    mkt_rf: float
    smb: float
    hml: float
    rf: float


def _bad_rows(mask, message):
    mask = np.asarray(mask)
    if mask.any():
        position = int(np.flatnonzero(mask)[0])
        raise MalformedRowError(message, FIRST_DATA_LINE + position)


def _parse_dates(values, name='date', allow_missing=False):
    values = pd.Series(values, dtype=object)
    parsed = pd.to_datetime(values, errors='coerce', format='mixed') \
        if len(values) else pd.Series([], dtype='datetime64[ns]')
    bad = parsed.isna()
    if allow_missing:
        bad &= values.fillna('').astype(str).str.len() > 0
    _bad_rows(bad, 'cannot parse {} value'.format(name))
    return parsed.dt.normalize()


def _attach_date(frame, raw, date):
    if 'date' in raw.columns:
        frame['date'] = _parse_dates(raw['date'])
    elif date is not None:
        frame['date'] = pd.Timestamp(date).normalize()
    return frame


@operation_context('mdio', 'parse_trades')
def parse_trades(source, schema=None, date=None):
    """Parses a trades CSV.

    Parameters
    ----------
    source: path, bytes, str or file-like
        CSV with columns symbol, ts, price, size, ex (see module docs).

    schema: dict, optional (default=None)
        Maps canonical column names onto the names in the file header.

    date: str or datetime-like, optional (default=None)
        Trading date attached to every record when the file has no `date`
        column.

    Returns
    -------
    trades: pandas.DataFrame
        Columns trade_id, symbol, ts, price, size, ex (and date, cond when
        available) in file order. `trade_id` defaults to the zero-based
        record position in the file.

    Raises
    ------
    MalformedRowError
        With the offending line number.

    PrecisionExceededError
        If a price has more than four decimals.

    """
    raw = read_schema_csv(
        source, TRADE_COLUMNS, schema, optional=('date', 'trade_id', 'cond')
    )
    trades = pd.DataFrame(index=raw.index)
    if 'trade_id' in raw.columns:
        trades['trade_id'] = parse_integers(raw['trade_id'], 'trade_id')
    else:
        trades['trade_id'] = np.arange(len(raw), dtype=np.int64)
    trades['symbol'] = raw['symbol'].str.strip()
    trades['ts'] = parse_integers(raw['ts'], 'ts')
    trades['price'] = parse_fixed_point(raw['price'], 'price')
    trades['size'] = parse_integers(raw['size'], 'size')
    trades['ex'] = raw['ex'].str.strip()

    _bad_rows(trades['price'] <= 0, 'price must be positive')
    _bad_rows(trades['size'] <= 0, 'size must be positive')
    _bad_rows((trades['ts'] < 0) | (trades['ts'] >= NANOS_PER_DAY),
              'timestamp outside the trading day')
    _bad_rows(trades['ex'].str.len() != 1,
              'exchange code must be a single character')

    trades = _attach_date(trades, raw, date)
    if 'cond' in raw.columns:
        trades['cond'] = raw['cond'].str.strip()
    logger.debug('Parsed %d trades.', len(trades))
    return trades


@operation_context('mdio', 'parse_quotes')
def parse_quotes(source, schema=None, date=None):
    """Parses a quotes CSV.

    Crossed and locked quotes (bid >= ask) are kept and flagged in the
    boolean `crossed` column.

    Parameters
    ----------
    source: path, bytes, str or file-like
        CSV with columns symbol, ts, bid, ask, bsz, asz.

    schema: dict, optional (default=None)
        Maps canonical column names onto the names in the file header.

    date: str or datetime-like, optional (default=None)
        Trading date attached when the file has no `date` column.

    Returns
    -------
    quotes: pandas.DataFrame
        Columns symbol, ts, bid, ask, bsz, asz, crossed (and date) in file
        order.

    """
    raw = read_schema_csv(source, QUOTE_COLUMNS, schema, optional=('date',))
    quotes = pd.DataFrame(index=raw.index)
    quotes['symbol'] = raw['symbol'].str.strip()
    quotes['ts'] = parse_integers(raw['ts'], 'ts')
    quotes['bid'] = parse_fixed_point(raw['bid'], 'bid')
    quotes['ask'] = parse_fixed_point(raw['ask'], 'ask')
    quotes['bsz'] = parse_integers(raw['bsz'], 'bsz')
    quotes['asz'] = parse_integers(raw['asz'], 'asz')

    _bad_rows(quotes['bid'] <= 0, 'bid must be positive')
    _bad_rows(quotes['ask'] <= 0, 'ask must be positive')
    _bad_rows((quotes['ts'] < 0) | (quotes['ts'] >= NANOS_PER_DAY),
              'timestamp outside the trading day')

    quotes['crossed'] = (quotes['bid'] >= quotes['ask']).astype(bool)
    quotes = _attach_date(quotes, raw, date)
    n_crossed = int(quotes['crossed'].sum())
    if n_crossed:
        logger.info('%d crossed or locked quotes flagged.', n_crossed)
    return quotes


@operation_context('mdio', 'parse_daily')
def parse_daily(source, schema=None):
    """Parses daily security records.

    Returns
    -------
    daily: pandas.DataFrame
        Columns symbol, date, close, bid, ask (nullable Int64
        ten-thousandths), shrout (float), shrcd (int), be (float, NaN when
        absent), vol (int), pilot (one of 'none', 'G1', 'G2', 'G3'), sorted
        by symbol and date.

    """
    raw = read_schema_csv(
        source, ['symbol', 'date', 'shrcd'], schema,
        optional=[c for c in DAILY_COLUMNS if c not in ('symbol', 'date',
                                                        'shrcd')]
    )
    for column in DAILY_COLUMNS:
        if column not in raw.columns:
            raw[column] = ''
    daily = pd.DataFrame(index=raw.index)
    daily['symbol'] = raw['symbol'].str.strip()
    daily['date'] = _parse_dates(raw['date'])
    for column in ('close', 'bid', 'ask'):
        daily[column] = parse_fixed_point(
            raw[column], column, allow_missing=True
        ).astype('Int64')
    daily['shrout'] = parse_floats(raw['shrout'], 'shrout', allow_missing=True)
    daily['shrcd'] = parse_integers(raw['shrcd'], 'shrcd')
    daily['be'] = parse_floats(raw['be'], 'be', allow_missing=True)
    daily['vol'] = parse_integers(
        raw['vol'], 'vol', allow_missing=True
    ).astype('Int64').fillna(0).astype(np.int64)
    pilot = raw['pilot'].str.strip().replace('', 'none')
    _bad_rows(~pilot.isin(PILOT_GROUPS), 'unknown tick pilot group')
    daily['pilot'] = pilot

    _bad_rows((daily['close'].fillna(1) <= 0).to_numpy(dtype=bool),
              'close must be positive')
    duplicated = daily.duplicated(['symbol', 'date'])
    _bad_rows(duplicated, 'duplicate symbol-date record')
    return daily.sort_values(['symbol', 'date'], kind='mergesort') \
        .reset_index(drop=True)


@operation_context('mdio', 'parse_factors')
def parse_factors(source, schema=None):
    """Parses factor returns (decimal fractions), dates strictly increasing.

    The file may hold daily or weekly returns; `panel.weekly_factors`
    compounds either onto calendar weeks.
    """
    raw = read_schema_csv(source, FACTOR_COLUMNS, schema)
    factors = pd.DataFrame(index=raw.index)
    factors['date'] = _parse_dates(raw['date'])
    for column in FACTOR_COLUMNS[1:]:
        factors[column] = parse_floats(raw[column], column)
    check_strictly_increasing(factors['date'], 'factor dates')
    return factors


@operation_context('mdio', 'parse_calendar')
def parse_calendar(source, schema=None):
    """Parses a trading calendar file into a `TradingCalendar`."""
    raw = read_schema_csv(source, CALENDAR_COLUMNS, schema)
    frame = pd.DataFrame({
        'date': _parse_dates(raw['date']),
        'week_id': parse_integers(raw['week_id'], 'week_id')
    })
    return TradingCalendar(frame['date'], frame['week_id'])


@operation_context('mdio', 'parse_market')
def parse_market(source, schema=None):
    """Parses daily total market returns, dates strictly increasing.

    The event study benchmarks against this series when
    `eventstudy.market = external`.
    """
    raw = read_schema_csv(source, MARKET_COLUMNS, schema)
    market = pd.DataFrame({
        'date': _parse_dates(raw['date']),
        'mkt': parse_floats(raw['mkt'], 'mkt')
    })
    check_strictly_increasing(market['date'], 'market dates')
    return market


@operation_context('mdio', 'parse_signed')
def parse_signed(source):
    """Parses signed retail trades written by `retailflow classify`.

    Returns
    -------
    signed: pandas.DataFrame
        Columns of `classify.SIGNED_COLUMNS`; bid and ask are nullable.

    """
    optional = ('date', 'bid', 'ask')
    raw = read_schema_csv(
        source, [c for c in SIGNED_LAYOUT if c not in optional],
        optional=optional
    )
    for column in optional:
        if column not in raw.columns:
            raw[column] = ''
    signed = pd.DataFrame(index=raw.index)
    signed['trade_id'] = parse_integers(raw['trade_id'], 'trade_id')
    signed['symbol'] = raw['symbol'].str.strip()
    signed['date'] = _parse_dates(raw['date'], allow_missing=True)
    signed['ts'] = parse_integers(raw['ts'], 'ts')
    signed['price'] = parse_fixed_point(raw['price'], 'price')
    signed['size'] = parse_integers(raw['size'], 'size')
    signed['method'] = raw['method'].str.strip()
    signed['direction'] = raw['direction'].str.strip()
    signed['fraction'] = parse_floats(raw['fraction'], 'fraction')
    for column in ('bid', 'ask'):
        signed[column] = parse_fixed_point(
            raw[column], column, allow_missing=True).astype('Int64')
    _bad_rows(~signed['direction'].isin(('Buy', 'Sell')),
              'direction must be Buy or Sell')
    return signed


@operation_context('mdio', 'parse_flows')
def parse_flows(source):
    """Parses daily flows written by `retailflow aggregate`.

    The imbalances are recomputed from the volumes and counts, so a file
    without them parses to the same frame.
    """
    raw = read_schema_csv(source, FLOW_LAYOUT[:7],
                          optional=('mroibvol', 'mroibtrd'))
    flows = pd.DataFrame(index=raw.index)
    flows['symbol'] = raw['symbol'].str.strip()
    flows['date'] = _parse_dates(raw['date'])
    flows['method'] = raw['method'].str.strip()
    for column in FLOW_LAYOUT[3:7]:
        flows[column] = parse_integers(raw[column], column)
    _bad_rows((flows[FLOW_LAYOUT[3:7]] < 0).any(axis=1),
              'flow counts must be non-negative')
    buys, sells = flows['mrbvol'], flows['mrsvol']
    with np.errstate(invalid='ignore'):
        flows['mroibvol'] = np.where(buys + sells > 0,
                                     (buys - sells) / (buys + sells), np.nan)
        buys, sells = flows['mrbtrd'], flows['mrstrd']
        flows['mroibtrd'] = np.where(buys + sells > 0,
                                     (buys - sells) / (buys + sells), np.nan)
    return flows


def write_records(frame, kind):
    """Serialises parsed records back to canonical CSV text.

    Prices are rendered with exactly four decimals, so parsing the text
    again reproduces the integer prices bit for bit.

    Parameters
    ----------
    frame: pandas.DataFrame
        Output of one of the parse functions.

    kind: str {'trades', 'quotes', 'daily', 'factors', 'calendar',
        'signed', 'flows'}
        Layout to write.

    Returns
    -------
    text: str

    """
    layouts = {
        'trades': (TRADE_COLUMNS + ['date', 'trade_id', 'cond'],
                   ('price',)),
        'quotes': (QUOTE_COLUMNS + ['date'], ('bid', 'ask')),
        'daily': (DAILY_COLUMNS, ('close', 'bid', 'ask')),
        'factors': (FACTOR_COLUMNS, ()),
        'calendar': (CALENDAR_COLUMNS, ()),
        'signed': (SIGNED_LAYOUT, ('price', 'bid', 'ask')),
        'flows': (FLOW_LAYOUT, ())
    }
    columns, prices = layouts[kind]
    out = frame[[c for c in columns if c in frame.columns]].copy()
    for column in prices:
        out[column] = format_fixed_point(out[column])
    if 'date' in out.columns:
        out['date'] = pd.to_datetime(out['date']).dt.strftime('%Y-%m-%d')
    if kind in ('factors', 'flows'):
        return frame_to_csv(out, float_format='%.17g')
    return frame_to_csv(out)


def _optional_int(value):
    return None if pd.isna(value) else int(value)


def iter_records(frame, kind):
    """Yields record dataclasses for the rows of a parsed frame.

    `kind` is one of 'trades', 'quotes', 'daily' or 'factors'; missing
    daily prices become None.
    """
    for row in frame.itertuples(index=False):
        if kind == 'trades':
            yield TradeRecord(
                symbol=row.symbol, timestamp=int(row.ts),
                price=int(row.price), size=int(row.size),
                exchange_code=row.ex, date=getattr(row, 'date', None),
                trade_id=int(row.trade_id),
                condition=getattr(row, 'cond', None)
            )
        elif kind == 'quotes':
            yield QuoteRecord(
                symbol=row.symbol, timestamp=int(row.ts), bid=int(row.bid),
                ask=int(row.ask), bid_size=int(row.bsz),
                ask_size=int(row.asz), date=getattr(row, 'date', None)
            )
        elif kind == 'daily':
            yield DailySecurityRecord(
                symbol=row.symbol, date=row.date,
                close=_optional_int(row.close), bid=_optional_int(row.bid),
                ask=_optional_int(row.ask), shares_outstanding=row.shrout,
                share_code=int(row.shrcd), book_equity=row.be,
                volume=int(row.vol), tick_pilot_group=row.pilot
            )
        elif kind == 'factors':
            yield FactorRecord(date=row.date, mkt_rf=row.mkt_rf, smb=row.smb,
                               hml=row.hml, rf=row.rf)
        else:
            raise ValueError('Unsupported record kind: {}'.format(kind))


class TradingCalendar(object):
    """Ordered trading dates with their week assignment.

    Parameters
    ----------
    dates: array-like of datetime-like
        Trading dates, strictly increasing.

    week_ids: array-like of int
        Week of every date. Weeks must be contiguous blocks of 1-5 dates
        with strictly increasing identifiers.

    Raises
    ------
    CalendarGapError
        If weeks overlap, are out of order or hold more than five dates.

    """
    def __init__(self, dates, week_ids):
        dates = pd.DatetimeIndex(pd.to_datetime(pd.Series(dates))).normalize()
        week_ids = np.asarray(week_ids, dtype=np.int64)
        check_strictly_increasing(pd.Series(dates), 'calendar dates')
        if len(week_ids) != len(dates):
            raise CalendarGapError('Every date needs exactly one week.')
        if len(week_ids) > 1 and (np.diff(week_ids) < 0).any():
            raise CalendarGapError('Week identifiers must not decrease.')
        counts = pd.Series(week_ids).value_counts()
        if (counts > 5).any():
            raise CalendarGapError(
                'Week {} holds more than five trading days.'
                .format(int(counts[counts > 5].index[0]))
            )
        self.dates = dates
        self.week_ids = week_ids
        self._position = pd.Series(np.arange(len(dates)), index=dates)

    @classmethod
    def from_dates(cls, dates, convention='calendar'):
        """Builds the calendar from trading dates.

        Parameters
        ----------
        dates: array-like of datetime-like
            Trading dates (duplicates are dropped).

        convention: str {'calendar', 'rolling5'}, optional
            (default='calendar')

            - `calendar`: Monday to Friday calendar weeks.
            - `rolling5`: consecutive bins of five trading days.

        """
        dates = pd.DatetimeIndex(
            pd.to_datetime(pd.Series(dates)).dt.normalize().unique()
        ).sort_values()
        if convention == 'calendar':
            iso = dates.isocalendar()
            keys = list(zip(iso['year'], iso['week']))
            week_ids = pd.factorize(pd.Series(keys, dtype=object))[0]
        elif convention == 'rolling5':
            week_ids = np.arange(len(dates)) // 5
        else:
            raise ValueError('Unknown week convention: {}'.format(convention))
        return cls(dates, week_ids)

    def to_frame(self):
        return pd.DataFrame({'date': self.dates, 'week_id': self.week_ids})

    @property
    def weeks(self):
        """Ordered distinct week identifiers."""
        return np.unique(self.week_ids)

    def week_of(self, dates):
        """Week identifiers of the given trading dates (-1 if unknown)."""
        lookup = pd.Series(self.week_ids, index=self.dates)
        found = lookup.reindex(pd.DatetimeIndex(pd.to_datetime(dates)))
        return found.fillna(-1).astype(np.int64).values

    def days_in_week(self, week):
        """Trading dates of a week."""
        return self.dates[self.week_ids == week]

    def position(self, dates):
        """Zero-based trading-day index of the given dates (-1 if unknown)."""
        found = self._position.reindex(pd.DatetimeIndex(pd.to_datetime(dates)))
        return found.fillna(-1).astype(np.int64).values

    def week_table(self):
        """One row per week: week_id, start, end, n_days, month.

        `month` is the month of the week's first trading day; month-dated
        controls attach to the week through it.
        """
        frame = self.to_frame().groupby('week_id')['date'] \
            .agg(start='min', end='max', n_days='count').reset_index()
        frame['month'] = frame['start'].dt.to_period('M')
        return frame

    def check_contiguous(self, weeks=None):
        """Raises CalendarGapError if week identifiers skip a value."""
        weeks = self.weeks if weeks is None else np.unique(weeks)
        if len(weeks) > 1 and (np.diff(weeks) != 1).any():
            position = int(np.flatnonzero(np.diff(weeks) != 1)[0])
            raise CalendarGapError(
                'Calendar gap between weeks {} and {}.'
                .format(int(weeks[position]), int(weeks[position + 1]))
            )

    def __len__(self):
        return len(self.dates)

    def __repr__(self):
        if not len(self.dates):
            return 'TradingCalendar(empty)'
        return 'TradingCalendar({} days, {} weeks, {} to {})'.format(
            len(self.dates), len(self.weeks),
            self.dates[0].date(), self.dates[-1].date()
        )


def _month_end_records(daily):
    daily = daily.assign(month=daily['date'].dt.to_period('M'))
    return daily.sort_values(['symbol', 'date'], kind='mergesort') \
        .groupby(['symbol', 'month'], sort=True).tail(1)


@operation_context('mdio', 'eligibility_table')
def eligibility_table(daily, months=None):
    """Evaluates the universe filters for every symbol-month.

    A symbol is eligible in month m iff its last record of month m - 1
    exists, has share code 10 or 11, a close of at least $1, and, for
    months October 2016 to October 2018, is not in Tick Size Pilot group
    G2 or G3.

    Parameters
    ----------
    daily: pandas.DataFrame
        Output of `parse_daily`.

    months: iterable of pandas.Period, optional (default=None)
        Months to evaluate. Defaults to every month with records.

    Returns
    -------
    table: pandas.DataFrame
        Columns symbol, month, eligible, reason. `reason` is empty for
        eligible rows and one of NO_PREV_MONTH_END, SHARE_CODE, NO_PRICE,
        PRICE, TICK_PILOT otherwise.

    """
    records = daily.assign(month=daily['date'].dt.to_period('M'))
    candidates = records[['symbol', 'month']].drop_duplicates()
    if months is not None:
        months = pd.PeriodIndex([pd.Period(m, freq='M') for m in months])
        candidates = candidates[candidates['month'].isin(months)]

    month_ends = _month_end_records(daily)
    month_ends = month_ends.assign(month=month_ends['month'] + 1)
    table = candidates.merge(
        month_ends[['symbol', 'month', 'close', 'shrcd', 'pilot']],
        on=['symbol', 'month'], how='left', indicator=True
    )

    in_pilot = (table['month'] >= PILOT_START) & (table['month'] <= PILOT_END)
    close = table['close'].astype('Float64')
    reason = np.select(
        [
            (table['_merge'] == 'left_only').to_numpy(),
            (~table['shrcd'].isin(COMMON_SHARE_CODES)).to_numpy(),
            close.isna().to_numpy(dtype=bool, na_value=True),
            (close < MIN_PRICE).to_numpy(dtype=bool, na_value=False),
            (in_pilot & table['pilot'].isin(PILOT_EXCLUDED)).to_numpy()
        ],
        ['NO_PREV_MONTH_END', 'SHARE_CODE', 'NO_PRICE', 'PRICE',
         'TICK_PILOT'],
        default=''
    )
    table = pd.DataFrame({
        'symbol': table['symbol'].values,
        'month': table['month'].values,
        'eligible': reason == '',
        'reason': reason
    }).sort_values(['month', 'symbol'], kind='mergesort') \
        .reset_index(drop=True)

    for row in table[~table['eligible']].itertuples(index=False):
        logger.debug('%s excluded in %s: %s', row.symbol, row.month,
                     row.reason)
    return table


@operation_context('mdio', 'apply_universe_filters')
def apply_universe_filters(daily, month):
    """Set of symbols eligible in `month` (see `eligibility_table`).

    Parameters
    ----------
    daily: pandas.DataFrame
        Output of `parse_daily`, must include the previous month.

    month: str or pandas.Period
        Month to evaluate, e.g. '2017-03'.

    Returns
    -------
    symbols: set

    """
    month = pd.Period(month, freq='M')
    table = eligibility_table(daily, months=[month])
    return set(table.loc[table['eligible'], 'symbol'])
