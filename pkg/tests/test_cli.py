import json

import pandas as pd
import pytest

from retailflow.cli import _build_parser, _overrides, main
from retailflow.config import load_config
from retailflow.exceptions import CrossedQuoteWarning
from retailflow.mdio import parse_flows, parse_signed


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def _classify(data_dir, output_dir, *extra):
    argv = ['classify', '--trades', str(data_dir / 'trades.csv'),
            '--quotes', str(data_dir / 'quotes.csv'),
            '--output-dir', str(output_dir)] + list(extra)
    with pytest.warns(CrossedQuoteWarning):
        return main(argv)


def test_classify_writes_hand_computed_output(data_dir, tmp_path):
    assert _classify(data_dir, tmp_path) == 0
    for name in ('signed_bjzz.csv', 'signed_qmp.csv'):
        pd.testing.assert_frame_equal(parse_signed(tmp_path / name),
                                      parse_signed(data_dir / name))
    pd.testing.assert_frame_equal(pd.read_csv(tmp_path / 'unsigned.csv'),
                                  pd.read_csv(data_dir / 'unsigned.csv'))

    report = json.loads((tmp_path / 'report.json').read_text())
    assert report['n_trades'] == 10
    assert report['methods']['BJZZ']['buys'] == 3
    assert report['methods']['QMP']['unsigned'] == {
        'CROSSED': 1, 'INSIDE_BAND': 2, 'NO_QUOTE': 1
    }
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    assert set(manifest['inputs']) == {'trades', 'quotes'}
    assert 'signed_qmp.csv' in manifest['outputs']


def test_classify_single_method(data_dir, tmp_path):
    assert _classify(data_dir, tmp_path, '--method', 'qmp') == 0
    assert (tmp_path / 'signed_qmp.csv').exists()
    assert not (tmp_path / 'signed_bjzz.csv').exists()


def test_missing_input_is_a_config_error(tmp_path, capsys):
    assert main(['classify', '--output-dir', str(tmp_path)]) == 2
    error = _error(capsys)
    assert error['error'] == 'ConfigError'
    assert error['exit_code'] == 2


def test_unknown_key_is_a_config_error(tmp_path, capsys):
    assert main(['synth', 'market', '--set', 'run.colour=blue',
                 '--output-dir', str(tmp_path)]) == 2
    assert _error(capsys)['error'] == 'UnknownConfigKeyError'


def test_bad_price_is_a_data_error(tmp_path, capsys):
    trades = tmp_path / 'trades.csv'
    trades.write_text('symbol,ts,price,size,ex\nA,1,20.00701,100,D\n')
    quotes = tmp_path / 'quotes.csv'
    quotes.write_text('symbol,ts,bid,ask,bsz,asz\nA,0,20.00,20.01,1,1\n')
    code = main(['classify', '--trades', str(trades), '--quotes',
                 str(quotes), '--date', '2017-01-03', '--output-dir',
                 str(tmp_path / 'out')])
    assert code == 3
    error = _error(capsys)
    assert (error['module'], error['operation']) == ('mdio', 'parse_trades')


def test_synthetic_market_through_the_pipeline(tmp_path, capsys):
    market, signed, flows = (tmp_path / name for name in
                             ('market', 'signed', 'flows'))
    assert main(['synth', 'market', '--seed', '3', '--n-symbols', '2',
                 '--n-days', '3', '--output-dir', str(market)]) == 0
    assert (market / 'truth.csv').exists()

    assert main(['classify', '--trades', str(market / 'trades.csv'),
                 '--quotes', str(market / 'quotes.csv'),
                 '--output-dir', str(signed)]) == 0

    paths = ','.join(str(signed / name) for name in
                     ('signed_bjzz.csv', 'signed_qmp.csv'))
    assert main(['aggregate', '--signed', paths,
                 '--output-dir', str(flows)]) == 0
    daily = parse_flows(flows / 'daily_flows.csv')
    assert set(daily['method']) == {'BJZZ', 'QMP'}
    assert daily['date'].nunique() == 3
    assert (flows / 'weekly_flows.csv').exists()

    # Table 6 is refused before any work without factor returns.
    code = main(['study', '--flows', str(flows / 'daily_flows.csv'),
                 '--daily', str(market / 'daily.csv'), '--tables', '6',
                 '--output-dir', str(tmp_path / 'study')])
    assert code == 2
    assert 'input.factors' in _error(capsys)['message']


def test_synthetic_panel(tmp_path):
    assert main(['synth', 'panel', '--n-symbols', '20', '--n-weeks', '10',
                 '--seed', '1', '--output-dir', str(tmp_path)]) == 0
    truth = json.loads((tmp_path / 'truth.json').read_text())
    assert truth['n_weeks'] == 10
    panel = pd.read_csv(tmp_path / 'panel.csv')
    assert panel['symbol'].nunique() == 20


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(['--version'])
    assert capsys.readouterr().out.startswith('retailflow')


@pytest.mark.slow
def test_verify_reports_every_check(tmp_path, capsys):
    code = main(['verify', '--systems', '10', '--output-dir', str(tmp_path)])
    out = capsys.readouterr().out
    assert 'newey_west_worked_value' in out
    assert 'FAILED' not in out
    assert code == 0


@pytest.mark.parametrize('threads', ['1', '4'])
def test_aggregate_matches_golden_output(data_dir, tmp_path, threads):
    paths = ','.join(str(data_dir / name) for name in
                     ('signed_bjzz.csv', 'signed_qmp.csv'))
    assert main(['aggregate', '--signed', paths, '--threads', threads,
                 '--output-dir', str(tmp_path)]) == 0
    for name in ('daily_flows.csv', 'weekly_flows.csv'):
        assert (tmp_path / name).read_bytes() == \
            (data_dir / 'golden' / name).read_bytes()


def test_study_reads_the_market_flag():
    args = _build_parser().parse_args(['study', '--market', 'mkt.csv',
                                       '--set', 'eventstudy.market=external'])
    config = load_config(None, _overrides(args))
    assert config['input.market'] == 'mkt.csv'
    assert config['eventstudy.market'] == 'external'
