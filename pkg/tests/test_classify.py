import numpy as np
import pandas as pd
import pytest

from retailflow.classify import (
    BJZZ, QMP, QuoteTape, RetailTradeClassifier, classify_bjzz, classify_day,
    classify_days, classify_qmp, prevailing_nbbo, subpenny_fraction
)
from retailflow.exceptions import ConfigError, CrossedQuoteWarning
from retailflow.mdio import TradeRecord


def _trade(price, ex='D'):
    return TradeRecord(symbol='X', timestamp=0, price=price, size=100,
                       exchange_code=ex)


def _classify_fixture(trades, quotes, **kwargs):
    with pytest.warns(CrossedQuoteWarning):
        return classify_day(trades, quotes, **kwargs)


def test_subpenny_fraction():
    assert subpenny_fraction(200070) == pytest.approx(.7)
    np.testing.assert_allclose(subpenny_fraction([200000, 100019]), [0, .19])


@pytest.mark.parametrize('price, direction', [
    (200061, 'Buy'), (200099, 'Buy'), (200060, None), (200050, None),
    (200040, None), (200039, 'Sell'), (200001, 'Sell'), (200000, None)
])
def test_bjzz_thresholds_are_strict(price, direction):
    signed = classify_bjzz(_trade(price))
    assert (signed and signed.direction) == direction


def test_bjzz_ignores_lit_exchanges():
    assert classify_bjzz(_trade(200070, ex='N')) is None


def test_qmp_band_is_inclusive():
    nbbo = (200000, 200100)
    assert classify_qmp(_trade(200080), nbbo).direction == 'Buy'
    assert classify_qmp(_trade(200020), nbbo).direction == 'Sell'
    assert classify_qmp(_trade(200040), nbbo) is None
    assert classify_qmp(_trade(200060), nbbo) is None
    assert classify_qmp(_trade(200080), None) is None
    assert classify_qmp(_trade(200080), (200100, 200100)) is None


def test_qmp_signs_against_the_midpoint_of_wide_spreads():
    signed = classify_qmp(_trade(100070), (100000, 101000))
    assert signed.direction == 'Sell'
    assert signed.matched_bid == 100000
    assert classify_bjzz(_trade(100070)).direction == 'Buy'


def test_prevailing_nbbo_is_as_of(fixture_quotes):
    tape = QuoteTape.from_quotes(fixture_quotes)
    assert prevailing_nbbo(tape, 'AAA', 36000000000000) == (200100, 200200)
    assert prevailing_nbbo(tape, 'AAA', 36000000000000, delay=1) == \
        (200000, 200100)
    assert prevailing_nbbo(tape, 'AAA', 1) is None
    assert prevailing_nbbo(tape, 'BBB', 36100000000000) is None
    assert prevailing_nbbo(tape, 'ZZZ', 36100000000000) is None


def test_classify_day_matches_hand_computed_fixture(fixture_trades,
                                                    fixture_quotes,
                                                    data_dir):
    day = _classify_fixture(fixture_trades, fixture_quotes)
    for method, frame in ((BJZZ, day.bjzz), (QMP, day.qmp)):
        expected = pd.read_csv(
            data_dir / 'signed_{}.csv'.format(method.lower()))
        assert frame['trade_id'].tolist() == expected['trade_id'].tolist()
        assert frame['direction'].tolist() == \
            expected['direction'].tolist()
        assert (frame['method'] == method).all()
    expected = pd.read_csv(data_dir / 'unsigned.csv')
    assert day.unsigned.values.tolist() == expected.values.tolist()


def test_transform_stacks_selected_methods(fixture_trades, fixture_quotes):
    classifier = RetailTradeClassifier(methods=(QMP,)).fit(fixture_quotes)
    with pytest.warns(CrossedQuoteWarning):
        signed = classifier.transform(fixture_trades)
    assert signed['trade_id'].tolist() == [0, 1, 5, 6]
    assert signed['bid'].tolist() == [200000, 200000, 200100, 100000]


def test_unfitted_classifier_raises(fixture_trades):
    with pytest.raises(RuntimeError, match='Fitting is necessary'):
        RetailTradeClassifier().classify(fixture_trades)


@pytest.mark.parametrize('params', [
    {'band_low': .55}, {'band_high': .45}, {'buy_low': .3},
    {'methods': ('LR',)}
])
def test_invalid_parameters_raise_config_error(params, fixture_quotes):
    with pytest.raises(ConfigError):
        RetailTradeClassifier(**params).fit(fixture_quotes)


def test_size_class_filters_lots(fixture_trades, fixture_quotes):
    odd = classify_day(fixture_trades, fixture_quotes, size_class='odd')
    assert odd.bjzz.empty and odd.qmp.empty
    round_lots = _classify_fixture(fixture_trades, fixture_quotes,
                                   size_class='round')
    assert len(round_lots.bjzz) == 7


def test_delay_moves_the_matched_quote(fixture_trades, fixture_quotes):
    delayed = classify_day(fixture_trades, fixture_quotes,
                           delay_ns=400 * 10 ** 9)
    # Trade 0 at 9:35 now looks up 9:28:20, before the first quote.
    assert 0 not in delayed.qmp['trade_id'].tolist()
    reasons = delayed.unsigned.set_index(['symbol', 'method', 'reason'])
    assert reasons.loc[('AAA', QMP, 'NO_QUOTE'), 'n'] >= 1


def test_classify_days_matches_single_days(penny_market):
    trades, quotes = penny_market.trades, penny_market.quotes
    both = classify_days(trades, quotes)
    expected = []
    for date, day_trades in trades.groupby('date'):
        day = classify_day(day_trades, quotes[quotes['date'] == date])
        expected += day.bjzz['trade_id'].tolist()
    assert both.bjzz['trade_id'].tolist() == expected
    assert both.bjzz['date'].nunique() == penny_market.scenario.n_days


def test_threads_do_not_change_results(penny_market):
    trades, quotes = penny_market.trades, penny_market.quotes
    serial = classify_days(trades, quotes, n_jobs=1)
    parallel = classify_days(trades, quotes, n_jobs=2)
    pd.testing.assert_frame_equal(serial.bjzz, parallel.bjzz)
    pd.testing.assert_frame_equal(serial.qmp, parallel.qmp)
