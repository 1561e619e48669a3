import pandas as pd
import pytest

from retailflow.exceptions import (
    CalendarGapError, DataError, MalformedRowError, PrecisionExceededError
)
from retailflow.mdio import (
    TradingCalendar, apply_universe_filters, eligibility_table, iter_records,
    parse_daily, parse_factors, parse_flows, parse_market, parse_signed,
    parse_trades, write_records
)


DAILY = """symbol,date,close,bid,ask,shrout,shrcd,be,vol,pilot
A,2017-01-31,10.0000,9.9900,10.0100,1000,10,5000,300,
A,2017-02-01,10.1000,10.0900,10.1100,1000,10,5000,200,
B,2017-01-31,0.5000,0.4900,0.5100,1000,11,,100,
B,2017-02-01,0.5200,0.5100,0.5300,1000,11,,100,
C,2017-01-31,20.0000,19.9900,20.0100,1000,12,,100,
C,2017-02-01,20.0000,19.9900,20.0100,1000,12,,100,
D,2017-01-31,15.0000,14.9900,15.0100,1000,10,,100,G2
D,2017-02-01,15.0000,14.9900,15.0100,1000,10,,100,G2
E,2017-02-01,30.0000,29.9900,30.0100,1000,10,,100,
"""


def test_parse_trades_keeps_subpenny_digits(fixture_trades):
    assert fixture_trades['price'].tolist()[:3] == [200080, 200020, 200050]
    assert fixture_trades['trade_id'].tolist() == list(range(10))
    assert (fixture_trades['date'] == pd.Timestamp('2017-01-03')).all()


def test_parse_trades_rejects_fifth_decimal():
    text = 'symbol,ts,price,size,ex\nA,1,20.0070,100,D\nA,2,20.00701,1,D\n'
    with pytest.raises(PrecisionExceededError) as info:
        parse_trades(text)
    assert info.value.line_number == 3
    assert info.value.module == 'mdio'
    assert info.value.operation == 'parse_trades'
    assert info.value.exit_code == 3


def test_parse_trades_maps_schema():
    text = 'sym,time,px,qty,venue\nXYZ,5,1.2345,10,D\n'
    trades = parse_trades(text, schema={'symbol': 'sym', 'ts': 'time',
                                        'price': 'px', 'size': 'qty',
                                        'ex': 'venue'},
                          date='2017-01-03')
    assert trades.loc[0, 'price'] == 12345
    assert trades.loc[0, 'date'] == pd.Timestamp('2017-01-03')


def test_parse_trades_reports_missing_column():
    with pytest.raises(MalformedRowError) as info:
        parse_trades('symbol,ts,price,size\nA,1,1.00,1\n')
    assert info.value.line_number == 1


def test_parse_quotes_flags_locked_quote(fixture_quotes):
    assert fixture_quotes['crossed'].tolist() == [False, False, False, True]


def test_write_records_reproduces_prices(fixture_trades):
    again = parse_trades(write_records(fixture_trades, 'trades'))
    pd.testing.assert_frame_equal(again, fixture_trades)


def test_iter_records_yields_trade_records(fixture_trades):
    first = next(iter_records(fixture_trades, 'trades'))
    assert first.symbol == 'AAA'
    assert first.price == 200080
    assert first.is_off_exchange


def test_iter_records_yields_daily_records():
    records = list(iter_records(parse_daily(DAILY), 'daily'))
    assert len(records) == 9
    first = records[0]
    assert (first.symbol, first.close, first.volume) == ('A', 100000, 300)
    assert first.book_equity == 5000.
    assert records[6].tick_pilot_group == 'G2'
    with pytest.raises(ValueError):
        next(iter_records(parse_daily(DAILY), 'bars'))


def test_parse_signed_reads_classify_output(data_dir):
    signed = parse_signed(data_dir / 'signed_bjzz.csv')
    assert len(signed) == 7
    assert signed['bid'].isna().all()
    assert signed['direction'].tolist()[:2] == ['Buy', 'Sell']

    qmp = parse_signed(data_dir / 'signed_qmp.csv')
    assert qmp['bid'].tolist() == [200000, 200000, 200100, 100000]


def test_parse_flows_recomputes_imbalances():
    text = ('symbol,date,method,mrbvol,mrsvol,mrbtrd,mrstrd\n'
            'A,2017-01-03,BJZZ,100,300,1,2\n'
            'B,2017-01-03,BJZZ,0,0,0,0\n')
    flows = parse_flows(text)
    assert flows.loc[0, 'mroibvol'] == pytest.approx(-.5)
    assert flows.loc[0, 'mroibtrd'] == pytest.approx(-1 / 3)
    assert pd.isna(flows.loc[1, 'mroibvol'])


def test_parse_daily_rejects_duplicates():
    text = DAILY + 'A,2017-02-01,10.1000,10.0900,10.1100,1000,10,,1,\n'
    with pytest.raises(MalformedRowError):
        parse_daily(text)


def test_parse_factors_requires_increasing_dates():
    text = ('date,mkt_rf,smb,hml,rf\n2017-01-04,0.01,0,0,0\n'
            '2017-01-03,0.01,0,0,0\n')
    with pytest.raises(DataError):
        parse_factors(text)


def test_parse_market_reads_daily_returns():
    market = parse_market('date,mkt\n2017-01-03,0.0125\n2017-01-04,-1\n')
    assert market['mkt'].tolist() == [.0125, -1.]
    assert market['date'].tolist() == [pd.Timestamp('2017-01-03'),
                                       pd.Timestamp('2017-01-04')]
    with pytest.raises(DataError):
        parse_market('date,mkt\n2017-01-04,0\n2017-01-04,0\n')


def test_calendar_weeks_follow_the_calendar():
    dates = pd.bdate_range('2017-01-02', '2017-01-13').delete(5)
    calendar = TradingCalendar.from_dates(dates)
    assert calendar.week_ids.tolist() == [0] * 5 + [1] * 4
    rolling = TradingCalendar.from_dates(dates, 'rolling5')
    assert rolling.week_ids.tolist() == [0] * 5 + [1] * 4
    table = calendar.week_table()
    assert table['n_days'].tolist() == [5, 4]
    assert str(table.loc[0, 'month']) == '2017-01'


def test_calendar_rejects_long_weeks():
    with pytest.raises(CalendarGapError):
        TradingCalendar(pd.bdate_range('2017-01-02', periods=6), [0] * 6)


def test_calendar_detects_gaps():
    calendar = TradingCalendar(pd.bdate_range('2017-01-02', periods=3),
                               [0, 1, 3])
    with pytest.raises(CalendarGapError):
        calendar.check_contiguous()


def test_eligibility_reasons():
    daily = parse_daily(DAILY)
    table = eligibility_table(daily, months=['2017-02']).set_index('symbol')
    assert table['reason'].to_dict() == {
        'A': '', 'B': 'PRICE', 'C': 'SHARE_CODE', 'D': 'TICK_PILOT',
        'E': 'NO_PREV_MONTH_END'
    }
    assert apply_universe_filters(daily, '2017-02') == {'A'}
