"""Synthetic trades and quotes with planted retail flow."""


import logging
import pathlib

from dataclasses import asdict, dataclass, fields

import numpy as np
import pandas as pd

from sklearn.utils import check_random_state

from ..classify import BUY, SELL
from ..config import read_key_values
from ..decorators import operation_context
from ..exceptions import ConfigError
from ..mdio import OFF_EXCHANGE, TradingCalendar, write_records
from ..utils.exporting import frame_to_csv
from ..utils.importing import PRICE_SCALE


__all__ = [
    'MarketScenario',
    'SyntheticMarket',
    'TRUTH_COLUMNS',
    'gen_market'
]

logger = logging.getLogger(__name__)

TRUTH_COLUMNS = ['trade_id', 'symbol', 'ts', 'true_side', 'is_retail']

CENT = PRICE_SCALE // 100
OPEN_NS = (9 * 3600 + 30 * 60) * 10 ** 9
CLOSE_NS = 16 * 3600 * 10 ** 9
LIT_EXCHANGES = np.array(['N', 'P', 'Q', 'Z'])
RISK_FREE = 1e-4


@dataclass(frozen=True)
class MarketScenario:
    """Parameters of a synthetic market.

    Parameters
    ----------
    seed: int, optional (default=0)
        Seed of the random stream; equal seeds give byte-identical files.

    n_symbols, n_days: int, optional (default=2, 5)
        Size of the market.

    start: str, optional (default='2017-01-03')
        First trading day, business days follow.

    trades_per_day, quotes_per_day: int, optional (default=200, 50)
        Prints and quote updates per symbol and day.

    retail_share: float, optional (default=0.3)
        Probability that a print is a marketable retail order.

    spread_cents: tuple, optional (default=(1, 1))
        Inclusive range of the quoted spread in cents; (1, 1) is the fixed
        penny-spread market.

    improvement: tuple, optional (default=(0.1, 0.3))
        Range of the retail price improvement as a share of the spread,
        measured from the quote on the trade's side.

    band_share: float, optional (default=0.0)
        Share of retail prints placed inside the 40%-60% band of the
        spread, which neither rule can sign.

    offexchange_share: float, optional (default=0.2)
        Share of institutional prints reported off-exchange at a round
        penny.

    start_price: float, optional (default=20.0)
        Initial bid in dollars.

    """
    seed: int = 0
    n_symbols: int = 2
    n_days: int = 5
    start: str = '2017-01-03'
    trades_per_day: int = 200
    quotes_per_day: int = 50
    retail_share: float = .3
    spread_cents: tuple = (1, 1)
    improvement: tuple = (.1, .3)
    band_share: float = 0.
    offexchange_share: float = .2
    start_price: float = 20.

    def __post_init__(self):
        low, high = self.spread_cents
        if not 1 <= low <= high:
            raise ConfigError('spread_cents must satisfy 1 <= low <= high.')
        if not 0 < self.improvement[0] <= self.improvement[1] < .4:
            raise ConfigError('improvement must lie in (0, 0.4).')
        for name in ('retail_share', 'band_share', 'offexchange_share'):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError('{} must lie in [0, 1].'.format(name))
        if self.quotes_per_day < 1 or self.trades_per_day < 0:
            raise ConfigError('Need at least one quote per day.')

    @property
    def penny(self):
        return tuple(self.spread_cents) == (1, 1)

    @classmethod
    def wide(cls, **kwargs):
        """Scenario with spreads of 5 to 20 cents."""
        params = dict(spread_cents=(5, 20))
        params.update(kwargs)
        return cls(**params)

    @classmethod
    def from_text(cls, text):
        """Scenario from ``key = value`` lines, e.g. ``n_days = 10``."""
        raw = read_key_values(text)
        known = {f.name: f for f in fields(cls)}
        params = {}
        for key, value in raw.items():
            if key not in known:
                raise ConfigError('Unknown scenario key: {}'.format(key))
            default = known[key].default
            if isinstance(default, tuple):
                params[key] = tuple(type(default[0])(v)
                                    for v in value.split(','))
            else:
                params[key] = type(default)(value.strip('"\''))
        return cls(**params)

    def to_text(self):
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, tuple):
                value = ', '.join(str(v) for v in value)
            lines.append('{} = {}'.format(key, value))
        return '\n'.join(lines) + '\n'


@dataclass
class SyntheticMarket:
    """Generated files as parsed frames.

    Attributes
    ----------
    trades, quotes, daily, factors: pandas.DataFrame
        Same layout as `mdio.parse_trades`, `parse_quotes`, `parse_daily`
        and `parse_factors` return.

    truth: pandas.DataFrame
        One row per planted retail print: trade_id, symbol, ts, true_side,
        is_retail. Read by the tests only.

    calendar: TradingCalendar

    """
    scenario: MarketScenario
    trades: pd.DataFrame
    quotes: pd.DataFrame
    truth: pd.DataFrame
    daily: pd.DataFrame
    factors: pd.DataFrame
    calendar: TradingCalendar

    def to_csv(self):
        """Maps file names onto CSV text."""
        return {
            'trades.csv': write_records(self.trades, 'trades'),
            'quotes.csv': write_records(self.quotes, 'quotes'),
            'truth.csv': frame_to_csv(self.truth.assign(
                is_retail=self.truth['is_retail'].astype(int))),
            'daily.csv': write_records(self.daily, 'daily'),
            'factors.csv': write_records(self.factors, 'factors'),
            'calendar.csv': write_records(self.calendar.to_frame(),
                                          'calendar'),
            'scenario.cfg': self.scenario.to_text()
        }

    def write(self, directory):
        """Writes every file into `directory` and returns their paths."""
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {}
        for name, text in self.to_csv().items():
            path = directory / name
            path.write_bytes(text.encode('utf-8'))
            paths[name] = path
        return paths


def _uniform_int(random_state, low, high):
    """Integers uniform on [low, high] elementwise."""
    low = np.asarray(low, dtype=np.int64)
    high = np.asarray(high, dtype=np.int64)
    draw = random_state.random_sample(np.broadcast(low, high).shape)
    return low + np.floor(draw * (high - low + 1)).astype(np.int64)


def _symbol_day(random_state, scenario, first_bid):
    n_q, n_t = scenario.quotes_per_day, scenario.trades_per_day
    quote_ts = np.sort(random_state.randint(OPEN_NS, CLOSE_NS, size=n_q,
                                           dtype=np.int64))
    quote_ts[0] = OPEN_NS
    steps = random_state.randint(-1, 2, size=n_q)
    steps[0] = 0
    bid_cents = np.maximum(first_bid + np.cumsum(steps), 100)
    spread_cents = random_state.randint(scenario.spread_cents[0],
                                        scenario.spread_cents[1] + 1,
                                        size=n_q)
    bid = bid_cents.astype(np.int64) * CENT
    ask = bid + spread_cents.astype(np.int64) * CENT
    quotes = pd.DataFrame({
        'ts': quote_ts.astype(np.int64), 'bid': bid, 'ask': ask,
        'bsz': random_state.randint(1, 50, size=n_q) * 100,
        'asz': random_state.randint(1, 50, size=n_q) * 100
    })
    quotes['crossed'] = quotes['bid'] >= quotes['ask']

    trade_ts = np.sort(random_state.randint(OPEN_NS + 1, CLOSE_NS, size=n_t,
                                           dtype=np.int64))
    matched = np.searchsorted(quote_ts, trade_ts, side='right') - 1
    t_bid, t_ask = bid[matched], ask[matched]
    spread = t_ask - t_bid
    retail = random_state.random_sample(n_t) < scenario.retail_share
    buy = random_state.random_sample(n_t) < .5
    in_band = retail & (random_state.random_sample(n_t) < scenario.band_share)

    low, high = scenario.improvement
    improvement = _uniform_int(
        random_state, np.maximum(np.ceil(low * spread), 1),
        np.floor(high * spread))
    band = _uniform_int(random_state, np.ceil(.4 * spread),
                        np.floor(.6 * spread))
    offset = np.where(in_band, band,
                      np.where(buy, spread - improvement, improvement))
    # A retail print always carries a fraction of a cent.
    round_penny = retail & (offset % CENT == 0)
    offset = np.where(round_penny & buy & ~in_band, offset - 1,
                      np.where(round_penny, offset + 1, offset))
    retail_price = t_bid + offset
    institutional_price = np.where(buy, t_ask, t_bid)

    off_exchange = random_state.random_sample(n_t) < scenario.offexchange_share
    exchange = LIT_EXCHANGES[random_state.randint(0, len(LIT_EXCHANGES),
                                                  size=n_t)]
    exchange = np.where(retail | off_exchange, OFF_EXCHANGE, exchange)
    size = np.where(retail, random_state.randint(1, 500, size=n_t),
                    random_state.randint(1, 20, size=n_t) * 100)
    trades = pd.DataFrame({
        'ts': trade_ts.astype(np.int64),
        'price': np.where(retail, retail_price, institutional_price),
        'size': size.astype(np.int64),
        'ex': exchange,
        'retail': retail,
        'true_side': np.where(buy, BUY, SELL)
    })
    return quotes, trades, int(bid_cents[-1])


def _daily_records(random_state, scenario, symbols, quotes, trades):
    shares = random_state.randint(10 ** 6, 10 ** 8, size=len(symbols))
    share_codes = np.where(random_state.random_sample(len(symbols)) < .5,
                           10, 11)
    book_ratio = random_state.uniform(.3, 1.5, size=len(symbols))
    last = quotes.groupby(['symbol', 'date'], sort=True).tail(1)
    volume = trades.groupby(['symbol', 'date'], sort=True)['size'].sum()
    daily = last[['symbol', 'date', 'bid', 'ask']] \
        .sort_values(['symbol', 'date'], kind='mergesort') \
        .reset_index(drop=True)
    daily['close'] = (daily['bid'] + daily['ask']) // (2 * CENT) * CENT
    position = pd.Index(symbols).get_indexer(daily['symbol'])
    daily['shrout'] = shares[position].astype(float)
    daily['shrcd'] = share_codes[position]
    daily['be'] = daily['shrout'] * daily['close'] / PRICE_SCALE \
        * book_ratio[position]
    daily['vol'] = volume.reindex(
        pd.MultiIndex.from_frame(daily[['symbol', 'date']])) \
        .fillna(0).astype(np.int64).values
    daily['pilot'] = 'none'
    for column in ('close', 'bid', 'ask'):
        daily[column] = daily[column].astype('Int64')
    return daily[['symbol', 'date', 'close', 'bid', 'ask', 'shrout', 'shrcd',
                  'be', 'vol', 'pilot']]


def _factor_records(random_state, daily, dates):
    closes = daily.pivot(index='date', columns='symbol', values='close') \
        .astype(float)
    market = closes.pct_change().mean(axis=1).fillna(0.).reindex(dates)
    return pd.DataFrame({
        'date': dates,
        'mkt_rf': market.values - RISK_FREE,
        'smb': random_state.normal(0., .005, size=len(dates)),
        'hml': random_state.normal(0., .005, size=len(dates)),
        'rf': RISK_FREE
    })


@operation_context('synth', 'gen_market')
def gen_market(scenario=None):
    """Generates a market with planted retail prints.

    Quotes follow a penny random walk of the bid with spreads drawn from
    the scenario. Retail prints are reported off-exchange at the quote on
    the trade's side improved by a fraction of the spread, institutional
    prints trade at the quotes, on an exchange or off-exchange at a round
    penny.

    Parameters
    ----------
    scenario: MarketScenario, optional (default=None)
        Defaults to the penny-spread scenario.

    Returns
    -------
    market: SyntheticMarket

    Examples
    --------
    >>> market = gen_market(MarketScenario(retail_share=0.))
    >>> len(market.truth)
    0

    """
    scenario = scenario or MarketScenario()
    random_state = check_random_state(scenario.seed)
    dates = pd.bdate_range(scenario.start, periods=scenario.n_days)
    symbols = ['S{:03d}'.format(i) for i in range(scenario.n_symbols)]
    bids = {s: int(round(scenario.start_price * 100)) for s in symbols}

    quote_frames, trade_frames = [], []
    for date in dates:
        for symbol in symbols:
            quotes, trades, bids[symbol] = _symbol_day(
                random_state, scenario, bids[symbol])
            quote_frames.append(quotes.assign(symbol=symbol, date=date))
            trade_frames.append(trades.assign(symbol=symbol, date=date))

    quotes = pd.concat(quote_frames, ignore_index=True)[
        ['symbol', 'ts', 'bid', 'ask', 'bsz', 'asz', 'crossed', 'date']]
    trades = pd.concat(trade_frames, ignore_index=True)
    trades['trade_id'] = np.arange(len(trades), dtype=np.int64)
    trades['cond'] = ''
    truth = trades.loc[trades['retail'], ['trade_id', 'symbol', 'ts',
                                          'true_side']] \
        .assign(is_retail=True).reset_index(drop=True)
    trades = trades[['trade_id', 'symbol', 'ts', 'price', 'size', 'ex',
                     'date', 'cond']]

    daily = _daily_records(random_state, scenario, symbols, quotes, trades)
    factors = _factor_records(random_state, daily, dates)
    calendar = TradingCalendar.from_dates(dates)
    logger.info('Generated %d trades (%d retail) and %d quotes.',
                len(trades), len(truth), len(quotes))
    return SyntheticMarket(scenario, trades, quotes, truth, daily, factors,
                           calendar)
