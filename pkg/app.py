"""Sector IGA eigenvalue solver - command-line entry point."""

import argparse
import logging
import sys
from dataclasses import replace

import pandas as pd

from analysis.rates import REPORT_COLUMNS
from config.experiment import ExperimentConfig, parse_angle
from config.settings import settings
from core.exceptions import ConfigError, SectorIGAError
from exact.spectrum import find_pair
from geometry.sector import build_sector
from services.experiment_runner import experiment_runner
from services.report_writer import NORMALIZATION_NOTE, report_writer

logger = logging.getLogger(__name__)

EXACT_COLUMNS = ['index', 'k', 'm', 'nu', 'frequency', 'eigenvalue', 'regularity', 'sobolev_limit']
FIELD_COLUMNS = ['r', 'phi', 'x', 'y', 'u_h', 'u']


def _ints(text: str):
    return tuple(int(part) for part in text.split(',') if part.strip())


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='KEY=value experiment file')
    parser.add_argument('--omega', type=parse_angle, help="sector angle, e.g. 2pi or pi/2")
    parser.add_argument('--degree', type=int)
    parser.add_argument('--regularity', type=int, help='smoothness k at inserted knots (default p-1)')
    parser.add_argument('--schedule', type=_ints, help='radial subdivisions J1, e.g. 4,8,16')
    parser.add_argument('--mu', help="grading parameter, 'auto' or 'mode'")
    parser.add_argument('--mesh', choices=['tensor', 'hierarchical'])
    parser.add_argument('--hierarchical-basis', choices=['bspline', 'nurbs'], dest='hierarchical_basis')
    parser.add_argument('--quadrature', type=int)
    parser.add_argument('--n-ev', type=int, dest='n_ev')
    parser.add_argument('--mode', help="target mode 'k,m' or 'spectrum'")
    parser.add_argument('--angular-ratio', type=int, dest='angular_ratio')
    parser.add_argument('--rate-targets', dest='rate_targets', help='e.g. h1:2,l2:3,eigenvalue:4')
    parser.add_argument('--rate-tolerance', type=float, dest='rate_tolerance')
    parser.add_argument('--variants', help="spectrum-compare variants 'p:k:mu,...'")
    parser.add_argument('--target-dofs', type=int, dest='target_dofs')
    parser.add_argument('--output', help='output CSV path (relative to OUTPUT_DIR)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='sector-iga',
        description='Graded isogeometric Laplace eigensolver for circular sectors',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    exact = sub.add_parser('exact-spectrum', help='exact eigenpairs from Bessel zeros')
    exact.add_argument('--omega', type=parse_angle, default='2pi')
    exact.add_argument('--count', type=int, default=22)
    exact.add_argument('--output')

    solve = sub.add_parser('solve', help='solve one refinement level')
    _add_config_arguments(solve)
    solve.add_argument('--J1', type=int, dest='J1', help='radial subdivisions (default: first schedule entry)')
    solve.add_argument('--dump-field', dest='dump_field', help='CSV of u_h and u on a polar grid')
    solve.add_argument('--dump-matrices', dest='dump_matrices', help='prefix for stiffness/mass triplet files')

    convergence = sub.add_parser('convergence', help='convergence study of one mode')
    _add_config_arguments(convergence)

    compare = sub.add_parser('spectrum-compare', help='eigenvalue errors of several variants')
    _add_config_arguments(compare)

    suggest = sub.add_parser('suggest-mu', help='grading parameter rules')
    suggest.add_argument('--omega', type=parse_angle, default='2pi')
    suggest.add_argument('--degree', type=int, default=2)
    suggest.add_argument('--k', type=int, help='angular index for the per-mode rule')

    geometry = sub.add_parser('dump-geometry', help='control net, weights and knots')
    geometry.add_argument('--omega', type=parse_angle, default='2pi')
    geometry.add_argument('--output', default='geometry.json')

    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """File values first, then command-line overrides."""
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {
        'omega': args.omega,
        'degree': args.degree,
        'regularity': args.regularity,
        'schedule': args.schedule,
        'mesh': args.mesh,
        'hierarchical_basis': args.hierarchical_basis,
        'quadrature': args.quadrature,
        'n_ev': args.n_ev,
        'angular_ratio': args.angular_ratio,
        'rate_tolerance': args.rate_tolerance,
        'target_dofs': args.target_dofs,
        'output': args.output,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    text = {'MU': args.mu, 'MODE': args.mode, 'RATE_TARGETS': args.rate_targets, 'VARIANTS': args.variants}
    text = {k: v for k, v in text.items() if v is not None}
    parsed = ExperimentConfig.from_mapping(text)
    for key in text:
        name = key.lower()
        overrides[name] = getattr(parsed, name)
    return replace(config, **overrides).validate()


def _header(config: ExperimentConfig, **sections):
    header = {'config': config.to_dict()}
    header.update(sections)
    header['settings'] = settings.get_all()
    return header


def cmd_exact_spectrum(args) -> int:
    rows = experiment_runner.run_exact(args.omega, args.count)
    report_writer.write_table(
        rows, args.output or 'exact_spectrum.csv',
        header={'exact': {'omega': args.omega, 'count': args.count}},
        columns=EXACT_COLUMNS,
    )
    print(pd.DataFrame(rows, columns=EXACT_COLUMNS).to_string(index=False))
    return 0


def cmd_solve(args) -> int:
    config = resolve_config(args)
    J1 = args.J1 or config.schedule[0]
    level = experiment_runner.run_solve(config, J1)
    header = _header(config, space=level.summary(), normalization={'note': NORMALIZATION_NOTE})
    report_writer.write_table(
        [r.to_row() for r in level.reports], config.output or 'solve.csv',
        header=header, columns=REPORT_COLUMNS,
    )

    if args.dump_matrices:
        report_writer.write_matrix(level.system.stiffness, f"{args.dump_matrices}_stiffness.txt")
        report_writer.write_matrix(level.system.mass, f"{args.dump_matrices}_mass.txt")
    if args.dump_field:
        if config.mode is None:
            raise ConfigError("--dump-field needs a target MODE")
        pair = find_pair(config.omega, *config.mode)
        rows = experiment_runner.sample_field(level, pair)
        report_writer.write_table(rows, args.dump_field, header=header, columns=FIELD_COLUMNS)

    print(pd.DataFrame([r.to_row() for r in level.reports], columns=REPORT_COLUMNS).to_string(index=False))
    return 0


def cmd_convergence(args) -> int:
    config = resolve_config(args)
    result = experiment_runner.run_convergence(config)
    rows = [r.to_row() for r in result.reports if (r.k, r.m) == tuple(config.mode)]
    rates = {name: estimate.slope for name, estimate in result.rates.items()}
    header = _header(
        config,
        space=result.levels[-1].summary(),
        rates=rates,
        normalization={'note': NORMALIZATION_NOTE},
    )
    report_writer.write_table(rows, config.output or 'convergence.csv', header=header, columns=REPORT_COLUMNS)

    print(pd.DataFrame(rows, columns=REPORT_COLUMNS).to_string(index=False))
    for name, estimate in result.rates.items():
        flag = '' if estimate.monotone else ' (non-monotone)'
        print(f"rate[{name}] = {estimate.slope:.4f}{flag}")

    experiment_runner.check_rate_targets(result)
    return 0


def cmd_spectrum_compare(args) -> int:
    config = resolve_config(args)
    rows = experiment_runner.run_spectrum_compare(config)
    columns = ['variant'] + REPORT_COLUMNS
    report_writer.write_table(rows, config.output or 'spectrum_compare.csv', header=_header(config), columns=columns)

    df = pd.DataFrame(rows, columns=columns)
    print(df.groupby('variant', sort=False)['rel_error'].agg(['count', 'mean', 'max']).to_string())
    return 0


def cmd_suggest_mu(args) -> int:
    suggestion = experiment_runner.suggest_mu(args.omega, args.degree, args.k)
    for rule, mu in suggestion.items():
        print(f"{rule}: mu = {mu:.6g}")
    return 0


def cmd_dump_geometry(args) -> int:
    geo = build_sector(args.omega)
    paths = report_writer.write_geometry(geo.to_dict(), args.output)
    print(f"Wrote {paths['json']} and {paths['csv']}")
    return 0


COMMANDS = {
    'exact-spectrum': cmd_exact_spectrum,
    'solve': cmd_solve,
    'convergence': cmd_convergence,
    'spectrum-compare': cmd_spectrum_compare,
    'suggest-mu': cmd_suggest_mu,
    'dump-geometry': cmd_dump_geometry,
}


def main(argv=None) -> int:
    """Run one subcommand and return its exit code."""
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SectorIGAError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except ValueError as e:
        logger.error(f"{args.command}: invalid input: {e}")
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
