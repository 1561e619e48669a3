import pytest

from retailflow.config import (
    RunConfig, load_config, parse_period, read_key_values
)
from retailflow.exceptions import ConfigError, UnknownConfigKeyError


CONFIG = """
# weekly flows
run.methods = QMP
run.periods = 2017:2017, 2018-01:2018-06   # two panels
qmp.delay_ns = 1000
longshort.factor_mode = "stacked"
classify.regular_only = yes
"""


def test_read_key_values_strips_comments():
    values = read_key_values(CONFIG)
    assert values['run.periods'] == '2017:2017, 2018-01:2018-06'
    assert values['longshort.factor_mode'] == '"stacked"'


@pytest.mark.parametrize('text', ['run.methods', 'a = 1\na = 2'])
def test_read_key_values_rejects_bad_lines(text):
    with pytest.raises(ConfigError):
        read_key_values(text)


def test_parse_period():
    assert parse_period('2010:2015') == ('2010-2015', ('2010-01', '2015-12'))
    assert parse_period('2018-01:2018-06')[1] == ('2018-01', '2018-06')
    for text in ('2015:2010', '2015', '15:16'):
        with pytest.raises(ConfigError):
            parse_period(text)


def test_config_file_is_typed(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text(CONFIG)
    config = load_config(path, {'run.threads': '4', 'run.lags': None})
    assert config['run.methods'] == ('QMP',)
    assert config['qmp.delay_ns'] == 1000
    assert config['longshort.factor_mode'] == 'stacked'
    assert config['classify.regular_only'] is True
    assert config['run.threads'] == 4
    assert config.lags is None
    assert list(config.periods) == ['2017-2017', '2018-01-2018-06']


def test_missing_config_file():
    with pytest.raises(ConfigError):
        load_config('/nonexistent/run.cfg')


@pytest.mark.parametrize('values', [
    {'qmp.band_low': '.7'},
    {'run.tables': '9'},
    {'run.threads': 'two'},
    {'classify.size_class': 'tiny'},
    {'classify.regular_only': 'maybe'},
    {'bjzz.sell_high': .7, 'bjzz.buy_low': .6},
    {'eventstudy.cutoffs': '5, 1, 9'},
    {'run.periods': '2016'}
])
def test_invalid_values(values):
    with pytest.raises(ConfigError) as info:
        RunConfig(values)
    assert info.value.exit_code == 2


def test_unknown_key():
    with pytest.raises(UnknownConfigKeyError, match='run.colour'):
        RunConfig({'run.colour': 'blue'})
    with pytest.raises(KeyError):
        RunConfig()['run.colour']


def test_digest_tracks_values():
    first, second = RunConfig(), RunConfig({'run.threads': 1})
    assert first.digest() == second.digest()
    changed = first.updated({'run.lags': 10, 'run.threads': None})
    assert changed.digest() != first.digest()
    assert changed.lags == 10
    assert changed['run.threads'] == 1


def test_study_options():
    options = RunConfig({'studies.lags.table3': 2,
                         'longshort.quantiles': 10}).study_options()
    assert options['table_lags']['table3'] == 2
    assert options['n_quantiles'] == 10
    assert options['horizons'] == (1, 2, 4, 6, 8, 10, 12)
