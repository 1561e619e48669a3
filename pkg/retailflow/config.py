"""Run configuration: flat dotted keys with typed defaults.

Configuration files are plain text with one ``key = value`` pair per line.
``#`` starts a comment, strings may be quoted, booleans are ``true`` or
``false`` and lists are comma separated::

    # study.cfg
    run.methods = BJZZ, QMP
    run.periods = 2010:2015, 2016:2021
    qmp.delay_ns = 0
    longshort.factor_mode = "stacked"

Values given on the command line override the file, and everything is
validated before any work starts.
"""


import hashlib
import json
import logging
import pathlib
import re

from dataclasses import dataclass

import pandas as pd

from .exceptions import ConfigError, UnknownConfigKeyError


__all__ = [
    'DEFAULTS',
    'RunConfig',
    'read_key_values',
    'parse_period',
    'load_config'
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Key:
    default: object
    kind: type
    choices: tuple = None
    low: float = None
    high: float = None
    is_list: bool = False


DEFAULTS = {
    'input.trades': _Key('', str),
    'input.quotes': _Key('', str),
    'input.daily': _Key('', str),
    'input.factors': _Key('', str),
    'input.calendar': _Key('', str),
    'input.market': _Key('', str),
    'input.signed': _Key('', str),
    'input.flows': _Key('', str),
    'run.methods': _Key(('BJZZ', 'QMP'), str, ('BJZZ', 'QMP'), is_list=True),
    'run.periods': _Key(('2010:2015', '2016:2021'), str, is_list=True),
    'run.return_modes': _Key(('bidask',), str, ('bidask', 'close'),
                             is_list=True),
    'run.imbalances': _Key(('mroibvol', 'mroibtrd'), str,
                           ('mroibvol', 'mroibtrd'), is_list=True),
    'run.tables': _Key((1, 2, 3, 4, 5, 6, 7, 8), int, low=1, high=8,
                       is_list=True),
    'run.lags': _Key(-1, int, low=-1),
    'run.threads': _Key(1, int, low=1),
    'run.output_dir': _Key('out', str),
    'qmp.delay_ns': _Key(0, int, low=0),
    'qmp.band_low': _Key(.4, float, low=0., high=.5),
    'qmp.band_high': _Key(.6, float, low=.5, high=1.),
    'bjzz.buy_low': _Key(.6, float, low=0., high=1.),
    'bjzz.sell_high': _Key(.4, float, low=0., high=1.),
    'classify.regular_only': _Key(False, bool),
    'classify.size_class': _Key('all', str, ('all', 'round', 'odd')),
    'aggregate.weekly_regression': _Key('ratio', str, ('ratio', 'mean')),
    'aggregate.weekly_sort': _Key('mean', str, ('ratio', 'mean')),
    'panel.week_convention': _Key('calendar', str, ('calendar', 'rolling5')),
    'panel.turnover_scale': _Key(100., float, low=0.),
    'panel.subgroups': _Key(3, int, low=2),
    'studies.lags.table2': _Key(6, int, low=0),
    'studies.lags.table3': _Key(5, int, low=0),
    'studies.lags.table4': _Key(5, int, low=0),
    'studies.lags.table5': _Key(5, int, low=0),
    'studies.lags.table7': _Key(5, int, low=0),
    'studies.lags.table8': _Key(4, int, low=0),
    'studies.horizons': _Key((1, 2, 4, 6, 8, 10, 12), int, low=1,
                             is_list=True),
    'longshort.quantiles': _Key(5, int, low=2),
    'longshort.min_per_quantile': _Key(5, int, low=1),
    'longshort.factor_mode': _Key('compounded', str,
                                  ('compounded', 'stacked')),
    'longshort.universes': _Key(('all', 'small', 'medium', 'big'), str,
                                ('all', 'small', 'medium', 'big'),
                                is_list=True),
    'eventstudy.cutoffs': _Key((1, 5, 9), int, low=1, high=9, is_list=True),
    'eventstudy.offsets': _Key((-20, -15, -10, -5, 0, 5, 10, 15, 20), int,
                               is_list=True),
    'eventstudy.anchor': _Key('split', str, ('split', 'week_end')),
    'eventstudy.market': _Key('vw', str, ('vw', 'external'))
}

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')
_PERIOD = re.compile(r'^(\d{4})(?:-(\d{2}))?:(\d{4})(?:-(\d{2}))?$')


def read_key_values(text):
    """Splits ``key = value`` lines into a dict of raw strings.

    Raises
    ------
    ConfigError
        On a line without '=' or a key given twice.

    """
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(
                'Line {} is not a "key = value" pair: {!r}'
                .format(number, line)
            )
        key, value = (part.strip() for part in line.split('=', 1))
        if key in values:
            raise ConfigError('Key {} given twice.'.format(key))
        values[key] = value
    return values


def _unquote(text):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in '"\'':
        return text[1:-1]
    return text


def _convert_scalar(key, raw, spec):
    if not isinstance(raw, str):
        value = raw
    else:
        raw = _unquote(raw)
        if spec.kind is bool:
            if raw.lower() not in _TRUE + _FALSE:
                raise ConfigError('{} expects true or false, got {!r}.'
                                  .format(key, raw))
            return raw.lower() in _TRUE
        value = raw
    try:
        if spec.kind is bool:
            value = bool(value)
        elif spec.kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            value = int(value)
        else:
            value = spec.kind(value)
    except (TypeError, ValueError):
        raise ConfigError('{} expects {}, got {!r}.'
                          .format(key, spec.kind.__name__, raw))
    if spec.choices is not None and value not in spec.choices:
        raise ConfigError('{} must be one of {}, got {!r}.'
                          .format(key, list(spec.choices), value))
    if spec.low is not None and value < spec.low or \
            spec.high is not None and value > spec.high:
        raise ConfigError('{} = {} is outside [{}, {}].'
                          .format(key, value, spec.low, spec.high))
    return value


def _convert(key, raw):
    try:
        spec = DEFAULTS[key]
    except KeyError:
        raise UnknownConfigKeyError(key)
    if not spec.is_list:
        return _convert_scalar(key, raw, spec)
    if isinstance(raw, str):
        items = [item for item in _unquote(raw).split(',') if item.strip()]
    else:
        items = list(raw)
    return tuple(_convert_scalar(key, item, spec) for item in items)


def parse_period(text):
    """Label and inclusive month range of a period string.

    >>> parse_period('2016:2021')
    ('2016-2021', ('2016-01', '2021-12'))
    >>> parse_period('2017-03:2018-02')
    ('2017-03-2018-02', ('2017-03', '2018-02'))

    """
    match = _PERIOD.match(text.strip())
    if match is None:
        raise ConfigError('Period {!r} is not YYYY[-MM]:YYYY[-MM].'
                          .format(text))
    start_year, start_month, end_year, end_month = match.groups()
    start = '{}-{}'.format(start_year, start_month or '01')
    end = '{}-{}'.format(end_year, end_month or '12')
    if pd.Period(start, freq='M') > pd.Period(end, freq='M'):
        raise ConfigError('Period {!r} ends before it starts.'.format(text))
    if start_month is None and end_month is None:
        label = '{}-{}'.format(start_year, end_year)
    else:
        label = '{}-{}'.format(start, end)
    return label, (start, end)


class RunConfig(object):
    """Resolved and validated run configuration.

    Parameters
    ----------
    values: dict, optional (default=None)
        Overrides of the defaults, raw strings or typed values.

    Raises
    ------
    UnknownConfigKeyError
        If a key is not in `DEFAULTS`.

    ConfigError
        If a value has the wrong type, is out of range or the combination
        of values is inconsistent.

    Examples
    --------
    >>> config = RunConfig({'qmp.delay_ns': '5', 'run.methods': 'QMP'})
    >>> config['qmp.delay_ns'], config['run.methods']
    (5, ('QMP',))

    """
    def __init__(self, values=None):
        resolved = {key: spec.default for key, spec in DEFAULTS.items()}
        for key, raw in (values or {}).items():
            resolved[key] = _convert(key, raw)
        self._values = resolved
        self._validate()

    def _validate(self):
        if self['bjzz.sell_high'] > self['bjzz.buy_low']:
            raise ConfigError('bjzz.sell_high must not exceed bjzz.buy_low.')
        cutoffs = self['eventstudy.cutoffs']
        if len(cutoffs) != 3 or list(cutoffs) != sorted(set(cutoffs)):
            raise ConfigError('eventstudy.cutoffs needs three increasing '
                              'deciles.')
        if not self['run.methods']:
            raise ConfigError('run.methods is empty.')
        for period in self['run.periods']:
            parse_period(period)

    def __getitem__(self, key):
        try:
            return self._values[key]
        except KeyError:
            raise UnknownConfigKeyError(key)

    def __contains__(self, key):
        return key in self._values

    def __repr__(self):
        return 'RunConfig({} keys, digest={})'.format(
            len(self._values), self.digest()[:12])

    def updated(self, values):
        """New configuration with further overrides, e.g. from flags."""
        merged = dict(self._values)
        merged.update({k: v for k, v in values.items() if v is not None})
        return RunConfig(merged)

    def as_dict(self):
        return {key: list(value) if isinstance(value, tuple) else value
                for key, value in sorted(self._values.items())}

    def digest(self):
        """SHA-256 of the canonical JSON of all resolved keys."""
        text = json.dumps(self.as_dict(), sort_keys=True,
                          separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    @property
    def periods(self):
        """Maps period labels onto inclusive month ranges, in order."""
        return dict(parse_period(p) for p in self['run.periods'])

    @property
    def lags(self):
        """Lag override of every table, None when unset."""
        return self['run.lags'] if self['run.lags'] >= 0 else None

    def study_options(self):
        """Options of `studies.StudySpec` taken from the configuration."""
        return {
            'horizons': self['studies.horizons'],
            'subgroups': self['panel.subgroups'],
            'n_quantiles': self['longshort.quantiles'],
            'min_per_quantile': self['longshort.min_per_quantile'],
            'factor_mode': self['longshort.factor_mode'],
            'universes': self['longshort.universes'],
            'sort': self['aggregate.weekly_sort'],
            'weekly': self['aggregate.weekly_regression'],
            'cutoffs': self['eventstudy.cutoffs'],
            'offsets': self['eventstudy.offsets'],
            'anchor': self['eventstudy.anchor'],
            'table_lags': {
                key.rsplit('.', 1)[1]: self[key] for key in self._values
                if key.startswith('studies.lags.')
            }
        }

    @classmethod
    def from_file(cls, path, overrides=None):
        """Reads a configuration file and applies overrides on top."""
        try:
            text = pathlib.Path(path).read_text()
        except OSError as e:
            raise ConfigError('Cannot read configuration {}: {}'
                              .format(path, e))
        values = read_key_values(text)
        values.update({k: v for k, v in (overrides or {}).items()
                       if v is not None})
        logger.info('Configuration read from %s.', path)
        return cls(values)


def load_config(path=None, overrides=None):
    """RunConfig from an optional file and command line overrides."""
    if path is None:
        return RunConfig({k: v for k, v in (overrides or {}).items()
                          if v is not None})
    return RunConfig.from_file(path, overrides)
