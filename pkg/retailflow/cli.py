"""Command line interface: ``retailflow <command> [options]``.

Commands run the pipeline stages on files and write their results, plus a
JSON manifest, into the output directory:

==========  ============================================================
classify    signed_bjzz.csv, signed_qmp.csv, unsigned.csv, report.json
aggregate   daily_flows.csv, weekly_flows.csv
panel       panel_<method>_<mode>.csv for every method and return mode
study       table<N>.csv for every requested table
synth       synthetic market or panel with its truth files
verify      runs the oracle suite, exit code 0 when every check passes
==========  ============================================================

Any retailflow error ends the run with a JSON report on stderr and exit
code 2 (configuration), 3 (data) or 4 (numerical).
"""


import argparse
import json
import logging
import pathlib
import sys

import pandas as pd

from . import __version__
from .aggregate import daily_flows, weekly_flows
from .classify import BJZZ, QMP, classify_days
from .config import load_config
from .exceptions import ConfigError, RetailflowError
from .mdio import (
    TradingCalendar, parse_calendar, parse_daily, parse_factors, parse_flows,
    parse_market, parse_quotes, parse_signed, parse_trades, write_records
)
from .studies import build_study_data, panel_specs, run_tables, with_lags
from .synth import (
    MarketScenario, PanelScenario, gen_market, gen_panel, run_oracle_suite
)
from .utils.exporting import frame_to_csv, write_manifest


__all__ = [
    'main',
    'cmd_classify',
    'cmd_aggregate',
    'cmd_panel',
    'cmd_study',
    'cmd_synth',
    'cmd_verify'
]

logger = logging.getLogger(__name__)

METHOD_CHOICES = {'bjzz': BJZZ, 'qmp': QMP, 'both': '{},{}'.format(BJZZ, QMP)}
# Flags that override a configuration key of the same meaning.
FLAG_KEYS = {
    'trades': 'input.trades',
    'quotes': 'input.quotes',
    'daily': 'input.daily',
    'factors': 'input.factors',
    'calendar': 'input.calendar',
    'market': 'input.market',
    'signed': 'input.signed',
    'flows': 'input.flows',
    'period': 'run.periods',
    'return_mode': 'run.return_modes',
    'tables': 'run.tables',
    'lags': 'run.lags',
    'threads': 'run.threads',
    'output_dir': 'run.output_dir',
    'delay_ns': 'qmp.delay_ns'
}
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def _common(parser):
    parser.add_argument('--config', help='key = value configuration file')
    parser.add_argument('--set', action='append', default=[],
                        metavar='KEY=VALUE',
                        help='override any configuration key')
    parser.add_argument('--output-dir', help='directory of the results')
    parser.add_argument('--threads', type=int, help='number of workers')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for INFO, -vv for DEBUG logging')


def _inputs(parser, *names):
    helps = {
        'trades': 'trades CSV',
        'quotes': 'quotes CSV',
        'daily': 'daily security records CSV',
        'factors': 'factor returns CSV',
        'calendar': 'trading calendar CSV',
        'market': 'daily market returns CSV (date, mkt)',
        'signed': 'signed trades CSV(s), comma separated',
        'flows': 'daily flows CSV'
    }
    for name in names:
        parser.add_argument('--' + name, help=helps[name])


def _method(parser):
    parser.add_argument('--method', choices=sorted(METHOD_CHOICES),
                        help='identification method(s)')


def _build_parser():
    parser = argparse.ArgumentParser(
        prog='retailflow',
        description='Retail order flow identification and return '
                    'predictability studies.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    classify = commands.add_parser(
        'classify', help='identify and sign retail trades')
    _inputs(classify, 'trades', 'quotes')
    _method(classify)
    classify.add_argument('--date', help='trading date of files without '
                                         'a date column')
    classify.add_argument('--delay-ns', type=int,
                          help='QMP quote-matching delay')
    _common(classify)
    classify.set_defaults(handler=cmd_classify)

    aggregate = commands.add_parser(
        'aggregate', help='daily and weekly retail flows')
    _inputs(aggregate, 'signed', 'calendar')
    _common(aggregate)
    aggregate.set_defaults(handler=cmd_aggregate)

    panel = commands.add_parser('panel', help='firm-week regression panels')
    _inputs(panel, 'flows', 'daily', 'factors', 'calendar')
    _method(panel)
    panel.add_argument('--return-mode', help='bidask and/or close, '
                                             'comma separated')
    _common(panel)
    panel.set_defaults(handler=cmd_panel)

    study = commands.add_parser('study', help='compute the result tables')
    _inputs(study, 'flows', 'signed', 'trades', 'quotes', 'daily',
            'factors', 'calendar', 'market')
    _method(study)
    study.add_argument('--tables', help='table numbers, e.g. 2,3')
    study.add_argument('--period', help='YYYY[-MM]:YYYY[-MM], comma '
                                        'separated for several')
    study.add_argument('--return-mode', help='bidask and/or close, '
                                             'comma separated')
    study.add_argument('--lags', type=int,
                       help='Newey-West lags of every table')
    _common(study)
    study.set_defaults(handler=cmd_study)

    synth = commands.add_parser('synth', help='generate synthetic data')
    synth.add_argument('kind', choices=('market', 'panel'))
    synth.add_argument('--scenario', help='key = value scenario file '
                                          '(market only)')
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--n-symbols', type=int)
    synth.add_argument('--n-days', type=int, help='market days')
    synth.add_argument('--n-weeks', type=int, help='panel weeks')
    synth.add_argument('--wide', action='store_true',
                       help='spreads of 5 to 20 cents')
    _common(synth)
    synth.set_defaults(handler=cmd_synth)

    verify = commands.add_parser('verify', help='run the oracle suite')
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--systems', type=int, default=1000,
                        help='random least-squares systems')
    _common(verify)
    verify.set_defaults(handler=cmd_verify)
    return parser


def _overrides(args):
    values = {}
    for item in args.set:
        if '=' not in item:
            raise ConfigError('--set expects KEY=VALUE, got {!r}.'
                              .format(item))
        key, value = (part.strip() for part in item.split('=', 1))
        values[key] = value
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[key] = value
    method = getattr(args, 'method', None)
    if method is not None:
        values['run.methods'] = METHOD_CHOICES[method]
    return values


def _configure_logging(verbose):
    logging.basicConfig(
        level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
        format='%(asctime)s %(name)s %(levelname)s %(message)s'
    )


def _path(config, name, required=True):
    value = config['input.' + name]
    if not value:
        if required:
            raise ConfigError('input.{0} is required (--{0}).'.format(name))
        return None
    return pathlib.Path(value)


def _output_dir(config):
    directory = pathlib.Path(config['run.output_dir'])
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _calendar(config, dates):
    path = _path(config, 'calendar', required=False)
    if path is not None:
        return parse_calendar(path)
    return TradingCalendar.from_dates(dates, config['panel.week_convention'])


def _write(directory, name, text, written):
    path = directory / name
    path.write_bytes(text.encode('utf-8'))
    written.append(path)
    logger.info('Wrote %s.', path)
    return path


def _manifest(directory, command, config, inputs, written, **spec):
    spec.update(command=command)
    return write_manifest(directory / 'manifest.json', spec,
                          config.digest(), inputs, written)


def _classify(config, date=None):
    trades = parse_trades(_path(config, 'trades'), date=date)
    quotes = parse_quotes(_path(config, 'quotes'), date=date)
    return trades, classify_days(trades, quotes, config)


def _signed_inputs(config):
    return {'signed_{}'.format(i): pathlib.Path(p.strip()) for i, p in
            enumerate(config['input.signed'].split(',')) if p.strip()}


def _flows(config):
    """Daily flows from the first available stage of the pipeline."""
    path = _path(config, 'flows', required=False)
    if path is not None:
        return parse_flows(path), {'flows': path}
    signed = _signed_inputs(config)
    if signed:
        stacked = pd.concat([parse_signed(p) for p in signed.values()],
                            ignore_index=True)
        return daily_flows(stacked), signed
    _, day = _classify(config)
    return daily_flows(day.signed()), {
        'trades': _path(config, 'trades'), 'quotes': _path(config, 'quotes')}


def _study_data(config, flows, daily, factors, market=None):
    return build_study_data(
        flows, daily, _calendar(config, daily['date']), factors,
        return_modes=config['run.return_modes'],
        methods=config['run.methods'],
        weekly=config['aggregate.weekly_regression'],
        sort=config['aggregate.weekly_sort'],
        week_convention=config['panel.week_convention'],
        turnover_scale=config['panel.turnover_scale'],
        market=config['eventstudy.market'], external_market=market
    )


def _market_inputs(config, inputs):
    daily_path = _path(config, 'daily')
    factors_path = _path(config, 'factors', required=False)
    market_path = _path(config, 'market', required=False)
    inputs.update(daily=daily_path, factors=factors_path,
                  calendar=_path(config, 'calendar', required=False),
                  market=market_path)
    factors = parse_factors(factors_path) if factors_path else None
    market = parse_market(market_path) if market_path else None
    return parse_daily(daily_path), factors, market


def _report(trades, day, methods):
    unsigned = day.unsigned
    report = {'n_trades': int(len(trades)), 'methods': {}}
    for method in methods:
        signed = day.bjzz if method == BJZZ else day.qmp
        reasons = unsigned[unsigned['method'] == method] \
            .groupby('reason')['n'].sum() if len(unsigned) else {}
        report['methods'][method] = {
            'signed': int(len(signed)),
            'buys': int((signed['direction'] == 'Buy').sum()),
            'sells': int((signed['direction'] == 'Sell').sum()),
            'unsigned': {str(k): int(v) for k, v in dict(reasons).items()}
        }
    return report


def cmd_classify(args, config):
    """Signs the retail trades of a trades and a quotes file."""
    trades, day = _classify(config, args.date)
    directory = _output_dir(config)
    written = []
    methods = config['run.methods']
    for method in methods:
        frame = day.bjzz if method == BJZZ else day.qmp
        _write(directory, 'signed_{}.csv'.format(method.lower()),
               write_records(frame, 'signed'), written)
    _write(directory, 'unsigned.csv', frame_to_csv(day.unsigned), written)
    _write(directory, 'report.json', json.dumps(
        _report(trades, day, methods), indent=2, sort_keys=True) + '\n',
        written)
    _manifest(directory, 'classify', config,
              {'trades': _path(config, 'trades'),
               'quotes': _path(config, 'quotes')},
              written, methods=list(methods), date=args.date)
    return 0


def cmd_aggregate(args, config):
    """Daily and weekly flows of signed trade files."""
    inputs = _signed_inputs(config)
    if not inputs:
        raise ConfigError('input.signed is required (--signed).')
    signed = pd.concat([parse_signed(p) for p in inputs.values()],
                       ignore_index=True)
    flows = daily_flows(signed)
    calendar = _calendar(config, flows['date'])
    inputs['calendar'] = _path(config, 'calendar', required=False)
    weekly = weekly_flows(flows, calendar,
                          config['aggregate.weekly_regression'])
    directory = _output_dir(config)
    written = []
    _write(directory, 'daily_flows.csv', write_records(flows, 'flows'),
           written)
    _write(directory, 'weekly_flows.csv',
           frame_to_csv(weekly, float_format='%.17g'), written)
    _manifest(directory, 'aggregate', config, inputs, written,
              how=config['aggregate.weekly_regression'])
    return 0


def cmd_panel(args, config):
    """Firm-week panels of every method and return mode."""
    flows, inputs = _flows(config)
    daily, factors, market = _market_inputs(config, inputs)
    data = _study_data(config, flows, daily, factors, market)
    directory = _output_dir(config)
    written = []
    for (method, mode), panel in sorted(data.panels.items()):
        _write(directory, 'panel_{}_{}.csv'.format(method.lower(), mode),
               frame_to_csv(panel, float_format='%.17g'), written)
    _manifest(directory, 'panel', config, inputs, written,
              panels=['{} {}'.format(*key) for key in sorted(data.panels)])
    return 0


def cmd_study(args, config):
    """Computes the requested tables over methods and periods."""
    tables = ['table{}'.format(n) for n in sorted(set(config['run.tables']))]
    flows, inputs = _flows(config)
    daily, factors, market = _market_inputs(config, inputs)
    if factors is None and 'table6' in tables:
        raise ConfigError('Table 6 needs input.factors (--factors).')
    data = _study_data(config, flows, daily, factors, market)

    specs = []
    for mode in config['run.return_modes']:
        specs += panel_specs(config.periods, config['run.methods'],
                             return_mode=mode,
                             options=config.study_options())
    if config.lags is not None:
        specs = with_lags(specs, config.lags)
    results = run_tables(data, specs, tables,
                         imbalances=config['run.imbalances'],
                         n_jobs=config['run.threads'])

    directory = _output_dir(config)
    written = []
    for name, frame in results.items():
        _write(directory, name + '.csv', frame_to_csv(frame), written)
    _manifest(directory, 'study', config, inputs, written, tables=tables,
              panels=[spec.label for spec in specs])
    return 0


def _read_scenario(path):
    try:
        return MarketScenario.from_text(pathlib.Path(path).read_text())
    except OSError as e:
        raise ConfigError('Cannot read scenario {}: {}'.format(path, e))


def cmd_synth(args, config):
    """Writes a synthetic market or panel with its truth files."""
    directory = _output_dir(config)
    params = {'seed': args.seed}
    if args.n_symbols is not None:
        params['n_symbols'] = args.n_symbols
    if args.kind == 'market':
        if args.n_days is not None:
            params['n_days'] = args.n_days
        if args.scenario:
            scenario = _read_scenario(args.scenario)
        elif args.wide:
            scenario = MarketScenario.wide(**params)
        else:
            scenario = MarketScenario(**params)
        paths = gen_market(scenario).write(directory)
    else:
        if args.n_weeks is not None:
            params['n_weeks'] = args.n_weeks
        paths = gen_panel(PanelScenario(**params)).write(directory)
    _manifest(directory, 'synth', config, {}, list(paths.values()),
              kind=args.kind, seed=args.seed)
    return 0


def cmd_verify(args, config):
    """Runs the oracle suite; exit code 1 when a check fails."""
    checks = run_oracle_suite(seed=args.seed, n_systems=args.systems)
    status = {True: 'ok', False: 'FAILED', None: 'skipped'}
    for check in checks:
        sys.stdout.write('{:<36} {:<8} {}\n'.format(
            check.name, status[check.passed], check.detail))
    failed = [check.name for check in checks if check.passed is False]
    if failed:
        logger.warning('Failed checks: %s', ', '.join(failed))
        return 1
    return 0


def main(argv=None):
    """Entry point of the ``retailflow`` command.

    Returns
    -------
    exit_code: int

    """
    args = _build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = load_config(args.config, _overrides(args))
        logger.info('Running %s with %r.', args.command, config)
        return args.handler(args, config)
    except RetailflowError as e:
        sys.stderr.write(json.dumps(e.report(), sort_keys=True) + '\n')
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
