"""Command-line front end: `hcm-modem simulate | analyze | optimize-interleaver | papr`.

Exit codes: 0 ok, 1 configuration or command line could not be parsed, 2 invalid specification, 3 stop rule error
target missed at one or more points (the CSV is still written, with those points listed in the manifest).
"""
import argparse
import asyncio
import json
import logging
import math
import os
import sys
import typing

import numpy as np

import hcm_modem
from hcm_modem import aco_ofdm, analysis, config, formats, hcm, sim
from hcm_modem.errors import ModemError, StopRuleUnreachable, UnsupportedFeature
from hcm_modem.interleaver_opt import design_gain, isi_cost, optimize_interleaver, save_interleaver

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SPEC = 2

# flag dest -> SweepSpec field
_SPEC_FLAGS = {
    'scheme': 'scheme',
    'n': 'n',
    'm': 'm',
    'cp_len': 'cp_len',
    'p0': 'p0',
    'taps': 'taps',
    'noise_dbm': 'noise_dbm',
    'power': 'powers',
    'min_errors': 'min_errors',
    'max_bits': 'max_bits',
    'symbols_per_trial': 'symbols_per_trial',
    'equalize': 'equalize',
    'seed': 'seed',
    'workers': 'workers',
    'interleaver': 'interleaver',
    'anneal_budget': 'anneal_budget',
}


def _print_json(data: typing.Dict[str, typing.Any]) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


class _FlagCollector:
    """on_point subscriber remembering the powers of flagged points."""

    def __init__(self) -> None:
        self.flagged = []  # type: typing.List[float]

    def __call__(self, point: sim.BerPoint) -> None:
        if point.flagged:
            self.flagged.append(point.power_dbm)


# ---- simulate ----

def _resolve_runs(args) -> typing.List[typing.Tuple[str, config.SweepSpec, typing.Optional[hcm.Interleaver]]]:
    overrides = {field: getattr(args, dest) for dest, field in _SPEC_FLAGS.items()}

    if args.manifest:
        manifest = formats.load_manifest(args.manifest)
        spec = formats.manifest_spec(manifest)
        interleaver = None if manifest.interleaver is None else hcm.Interleaver.from_perm(manifest.interleaver)
        return [(manifest.label, spec, interleaver)]

    if args.preset:
        runs = config.preset(args.preset)
    else:
        runs = [('', config.SweepSpec())]

    result = []
    for label, spec in runs:
        if args.config:
            spec = config.load_config(args.config, spec)
        spec = config.apply_overrides(spec, overrides)
        result.append((label or spec.scheme.value, spec, None))
    return result


async def _simulate(runs, out_dir: str) -> typing.Dict[str, typing.Any]:
    summary = {'curves': {}}  # type: typing.Dict[str, typing.Any]
    curves = {}
    flagged_any = []

    with sim.Simulator() as simulator:
        for label, spec, interleaver in runs:
            collector = _FlagCollector()
            simulator.on_point += collector
            try:
                curve = await simulator.run_sweep(spec, label, interleaver)
            finally:
                simulator.on_point -= collector

            perm = None if curve.interleaver is None else curve.interleaver.perm.tolist()
            manifest = formats.build_manifest(label, spec, hcm_modem.__version__, perm, collector.flagged)
            csv_path = os.path.join(out_dir, "%s.csv" % label)
            formats.write_atomic(csv_path, formats.csv_text(curve.points))
            formats.write_atomic(formats.manifest_path(csv_path), formats.manifest_text(manifest))

            curves[label] = curve
            flagged_any.extend(collector.flagged)
            summary['curves'][label] = {'csv': csv_path, 'config_sha256': manifest.config_sha256,
                                        'flagged': collector.flagged}

    crossovers = {}
    for label, curve in curves.items():
        if not curve.spec.scheme.is_hcm:
            continue
        reference = label.replace(curve.spec.scheme.value, config.Scheme.ACO_OFDM.value, 1)
        if reference != label and reference in curves:
            crossovers[label] = analysis.crossover_dbm(
                [(p.power_dbm, p.ber) for p in curve.points],
                [(p.power_dbm, p.ber) for p in curves[reference].points])
            LOG.info("%s falls below %s at %s dBm", label, reference, crossovers[label])
    if crossovers:
        summary['crossover_dbm'] = crossovers

    if flagged_any:
        _print_json(summary)
        raise StopRuleUnreachable(flagged_any)
    return summary


def cmd_simulate(args) -> int:
    runs = _resolve_runs(args)
    # Validate everything up front so a bad spec never leaves part of a preset behind
    for _, spec, _ in runs:
        spec.validate()
    os.makedirs(args.out_dir, exist_ok=True)
    _print_json(asyncio.run(_simulate(runs, args.out_dir)))
    return EXIT_OK


# ---- analyze ----

def _analyze(args) -> typing.Dict[str, typing.Any]:
    what = args.quantity
    if what == 'q':
        return {'q': analysis.q_function(args.x)}
    if what == 'aco-power':
        return {'p_aco': analysis.aco_average_power(args.sigma, args.p0)}
    if what == 'aco-clip-variance':
        return {'clip_variance': analysis.aco_clip_variance(args.sigma, args.p0)}
    if what == 'aco-sigma':
        return {'sigma': analysis.aco_sigma_for_power(args.power, args.p0)}
    if what == 'aco-snr':
        return {'snr': analysis.aco_snr(args.sigma, args.p0, args.noise_var),
                'subcarrier_snr': analysis.aco_subcarrier_snr(args.sigma, args.p0, args.noise_var)}
    if what == 'ber-ofdm':
        return {'ber': float(analysis.ber_ofdm_analytic(args.m, args.snr))}
    if what == 'ber-hcm':
        return {'ber': float(analysis.ber_hcm_analytic(args.m, args.sigma, args.noise_std)),
                'ber_pam_gray': float(analysis.ber_pam_gray(args.m, args.sigma, args.noise_std))}
    if what == 'rate':
        rate = analysis.aco_rate(args.n, args.m) if args.scheme == 'aco-ofdm' else analysis.hcm_rate(args.n, args.m)
        return {'rate': rate}
    if what == 'crossover':
        curve = [(row['power_dbm'], row['ber']) for row in formats.read_csv(args.curve)]
        reference = [(row['power_dbm'], row['ber']) for row in formats.read_csv(args.reference)]
        return {'crossover_dbm': analysis.crossover_dbm(curve, reference)}
    if what == 'dcr-ratio':
        return {'ratio': analysis.dcr_power_ratio(args.n, args.m, args.symbols, args.seed),
                'bound': analysis.dcr_saving_bound(args.n)}
    raise UnsupportedFeature(what)


def cmd_analyze(args) -> int:
    _print_json(_analyze(args))
    return EXIT_OK


# ---- optimize-interleaver ----

def cmd_optimize_interleaver(args) -> int:
    # Without a noise level the search minimizes the minimax leakage alone
    design = None
    if args.noise_dbm is not None:
        spec = config.apply_overrides(config.SweepSpec(), {
            'n': args.n, 'm': args.m, 'taps': args.taps, 'noise_dbm': args.noise_dbm, 'powers': args.power})
        design = sim.interleaver_design(spec)

    interleaver = optimize_interleaver(args.taps, args.n, args.budget, args.seed, design=design)
    save_interleaver(args.out, interleaver)
    result = {
        'n': args.n,
        'path': args.out,
        'cost': isi_cost(interleaver, args.taps).cost,
        'identity_cost': isi_cost(hcm.Interleaver.identity(args.n), args.taps).cost,
    }
    if design is not None:
        result['relative_ber'] = design_gain(interleaver, args.taps, design, args.seed).tolist()
    _print_json(result)
    return EXIT_OK


# ---- papr ----

def papr_ensemble(scheme: config.Scheme, n: int, m: int, symbols: int, seed: int) -> np.ndarray:
    """Unit-scale transmit symbols of a scheme, one per row."""
    rng = np.random.Generator(np.random.Philox(seed))
    if scheme is config.Scheme.ACO_OFDM:
        bits = rng.integers(0, 2, size=(symbols, n // 4 * int(math.log2(m))), dtype=np.uint8)
        return aco_ofdm.aco_modulate(aco_ofdm.aco_frame(aco_ofdm.qam_map(bits, m), 1.0))

    bits = rng.integers(0, 2, size=(symbols, (n - 1) * int(math.log2(m))), dtype=np.uint8)
    u = hcm.pam_map(bits, m)
    if scheme is config.Scheme.DCR_HCM:
        return hcm.dcr_encode(u)
    return hcm.hcm_encode(u)


def cmd_papr(args) -> int:
    scheme = config.Scheme.parse(args.scheme)
    ensemble = papr_ensemble(scheme, args.n, args.m, args.symbols, args.seed)
    thresholds = [1.5, 2, 3, 4, 6, 8, 10]
    _print_json({
        'scheme': scheme.value,
        'n': args.n,
        'm': args.m,
        'symbols': args.symbols,
        'max_papr': analysis.papr(ensemble),
        'percentiles': analysis.papr_percentiles(ensemble),
        'ccdf': {str(t): float(p) for t, p in zip(thresholds, analysis.papr_ccdf(ensemble, thresholds))},
    })
    return EXIT_OK


# ---- argument parsing ----

def _typed(parse: typing.Callable[[str], typing.Any]) -> typing.Callable[[str], typing.Any]:
    """argparse type wrapper turning ModemErrors into usage errors."""
    def wrapper(text: str):
        try:
            return parse(text)
        except (ModemError, UnsupportedFeature) as e:
            raise argparse.ArgumentTypeError(str(e))
    wrapper.__name__ = getattr(parse, '__name__', 'value')
    return wrapper


def _taps(text: str) -> typing.Tuple[float, ...]:
    return config.read_value(text, config.Taps)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='hcm-modem', description="HCM / ACO-OFDM optical modem BER simulator")
    parser.add_argument('--version', action='version', version='%(prog)s ' + hcm_modem.__version__)
    parser.add_argument('-v', '--verbose', action='count', default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    simulate = commands.add_parser('simulate', help="run BER sweeps and write CSV + manifest")
    simulate.set_defaults(handler=cmd_simulate)
    simulate.add_argument('--config', help="INI config file")
    simulate.add_argument('--preset', choices=sorted(config.PRESETS) + sorted(config.PRESET_ALIASES))
    simulate.add_argument('--manifest', help="rerun the sweep recorded in a manifest")
    simulate.add_argument('--out-dir', default='.', help="directory for CSV and manifest files")
    simulate.add_argument('--scheme', help="hcm, dcr-hcm, interleaved-hcm or aco-ofdm")
    simulate.add_argument('--n', type=int)
    simulate.add_argument('--m', type=int)
    simulate.add_argument('--cp-len', type=int)
    simulate.add_argument('--p0', type=float, help="LED peak power, W")
    simulate.add_argument('--taps', type=_typed(_taps), help="comma separated FIR taps")
    simulate.add_argument('--noise-dbm', help="noise variance in dBm, or 'none'")
    simulate.add_argument('--power', help="average optical power grid, dBm: start:stop:step or a list")
    simulate.add_argument('--min-errors', type=int)
    simulate.add_argument('--max-bits', type=int)
    simulate.add_argument('--symbols-per-trial', type=int)
    simulate.add_argument('--equalize', action='store_const', const=True, help="ACO-OFDM one-tap equalizer")
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--workers', type=int)
    simulate.add_argument('--interleaver', help="permutation file for interleaved-hcm")
    simulate.add_argument('--anneal-budget', type=int)

    analyze = commands.add_parser('analyze', help="evaluate closed-form expressions")
    analyze.set_defaults(handler=cmd_analyze)
    quantities = analyze.add_subparsers(dest='quantity')
    quantities.required = True
    quantities.add_parser('q').add_argument('--x', type=float, required=True)
    for name in ('aco-power', 'aco-clip-variance'):
        sub = quantities.add_parser(name)
        sub.add_argument('--sigma', type=float, required=True)
        sub.add_argument('--p0', type=float, default=0.5)
    sub = quantities.add_parser('aco-sigma')
    sub.add_argument('--power', type=float, required=True, help="average optical power, W")
    sub.add_argument('--p0', type=float, default=0.5)
    sub = quantities.add_parser('aco-snr')
    sub.add_argument('--sigma', type=float, required=True)
    sub.add_argument('--p0', type=float, default=0.5)
    sub.add_argument('--noise-var', type=float, required=True)
    sub = quantities.add_parser('ber-ofdm')
    sub.add_argument('--m', type=int, required=True)
    sub.add_argument('--snr', type=float, required=True)
    sub = quantities.add_parser('ber-hcm')
    sub.add_argument('--m', type=int, required=True)
    sub.add_argument('--sigma', type=float, required=True)
    sub.add_argument('--noise-std', type=float, required=True)
    sub = quantities.add_parser('rate')
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--m', type=int, required=True)
    sub.add_argument('--scheme', choices=('hcm', 'aco-ofdm'), default='hcm')
    sub = quantities.add_parser('crossover', help="power where one BER curve CSV falls below another")
    sub.add_argument('--curve', required=True)
    sub.add_argument('--reference', required=True)
    sub = quantities.add_parser('dcr-ratio')
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--m', type=int, default=2)
    sub.add_argument('--symbols', type=int, default=10000)
    sub.add_argument('--seed', type=int, default=config.DEFAULT_SEED)

    optimize = commands.add_parser('optimize-interleaver', help="search a chip permutation for a FIR channel")
    optimize.set_defaults(handler=cmd_optimize_interleaver)
    optimize.add_argument('--taps', type=_typed(_taps), required=True)
    optimize.add_argument('--n', type=int, required=True)
    optimize.add_argument('--budget', type=int, default=20000)
    optimize.add_argument('--m', type=int, default=2)
    optimize.add_argument('--noise-dbm', help="noise variance in dBm; tunes the search to the BER at --power")
    optimize.add_argument('--power', default='14:23.5:0.5', help="operating powers, dBm")
    optimize.add_argument('--seed', type=int, default=config.DEFAULT_SEED)
    optimize.add_argument('--out', required=True)

    papr = commands.add_parser('papr', help="peak-to-average power statistics")
    papr.set_defaults(handler=cmd_papr)
    papr.add_argument('--scheme', default=config.Scheme.HCM.value)
    papr.add_argument('--n', type=int, default=128)
    papr.add_argument('--m', type=int, default=2)
    papr.add_argument('--symbols', type=int, default=10000)
    papr.add_argument('--seed', type=int, default=config.DEFAULT_SEED)

    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors, which are configuration errors here
        return EXIT_CONFIG if e.code == 2 else (e.code or EXIT_OK)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return args.handler(args)
    except ModemError as e:
        LOG.error("%s", e)
        return e.error_code
    except UnsupportedFeature as e:
        LOG.error("%s", e)
        return EXIT_SPEC
