"""Main entry point for blind-bounds."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .core.config import ConfigManager
from .core.debug_config import DebugConfig
from .core.errors import BlindBoundsError, InvariantViolationError, ValidationError
from .experiments import (
    EXIT_INVARIANT,
    EXIT_VALIDATION,
    ExperimentFactory,
    ExperimentResult,
    OutputFormat,
)
from .utils.logger import get_logger, setup_logging
from .utils.serialization import write_text

EXIT_ERROR = 1

# Parser destinations that are not ExperimentConfig fields
_CLI_ONLY = {'command', 'config', 'debug', 'format', 'log_file'}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, default=None,
                        help='JSON sweep file; its values override defaults, flags override it')
    common.add_argument('--seed', type=int, default=None, help='Master random seed')
    common.add_argument('--output', type=Path, default=None,
                        help='Write the result here instead of stdout '
                             '(CSV runs also write a JSON document next to it)')
    common.add_argument('--format', choices=[f.value for f in OutputFormat], default=None,
                        help='Output format (default depends on the command)')
    common.add_argument('--debug', action='store_true', help='Enable verbose logging')
    common.add_argument('--log-file', type=Path, default=None, help='Log file path')
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment."""
    parser = argparse.ArgumentParser(
        prog='blind-bounds',
        description='Lower bounds on blind compression of classical ensembles')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    common = _common_parser()
    sub = parser.add_subparsers(dest='command', required=True,
                                metavar='{' + ','.join(ExperimentFactory.commands()) + '}')

    p = sub.add_parser('example-2x2', parents=[common],
                       help='Exact distances and defect bound for (1/2, 1/2) vs (1/3, 2/3)')
    p.add_argument('--eps', default=None, help='Output error, e.g. 0, 1/72 or 0.001')

    p = sub.add_parser('separation', parents=[common],
                       help='Rate bound log d - 7 for the uniform/staircase ensemble')
    p.add_argument('--d', dest='d_list', type=int, nargs='+', default=None,
                   help='Alphabet sizes (each >= 2)')

    p = sub.add_parser('protocol', parents=[common],
                       help='Bucketing protocol on the uniform/staircase pair')
    p.add_argument('--d', type=int, default=None, help='Alphabet size')
    p.add_argument('--delta', type=float, default=None, help='Level ratio, in (0, 1/2)')
    p.add_argument('--gamma', type=float, default=None, help='Truncation mass, in (0, 1)')
    p.add_argument('--samples', type=int, default=None, help='Monte Carlo samples per state')

    p = sub.add_parser('defect', parents=[common], help='Minimize the information defect')
    p.add_argument('--ensemble', choices=['example', 'uniform-staircase'], default=None)
    p.add_argument('--dims', dest='defect_dims', type=int, nargs='+', default=None,
                   help='Alphabet sizes for the uniform/staircase ensemble')
    p.add_argument('--eps', dest='eps_list', type=float, nargs='+', default=None,
                   help='Output errors to solve for')
    p.add_argument('--backend', choices=['penalty-gradient', 'grid-oracle'], default=None)
    p.add_argument('--restarts', type=int, default=None)
    p.add_argument('--max-iter', type=int, default=None)

    p = sub.add_parser('audit', parents=[common], help='Randomized audit of the inequalities')
    p.add_argument('--trials', type=int, default=None, help='Random instances per dimension')
    p.add_argument('--d-max', type=int, default=None, help='Largest alphabet size (<= 7)')
    p.add_argument('--suite', dest='suites', action='append', default=None,
                   help='Run only this suite (repeatable)')
    p.add_argument('--inject-faulty-constant', dest='faulty_shift_constant', type=int,
                   default=None,
                   help='Replace the shift constant 4 of the doubly-stochastic '
                        'approximation (11 makes the audit fail)')

    p = sub.add_parser('decompose', parents=[common],
                       help='Birkhoff decomposition of a doubly-stochastic matrix')
    p.add_argument('--matrix', type=Path, default=None,
                   help='JSON file with a list of rows or {"rows": [...]}')

    p = sub.add_parser('ki-sensitivity', parents=[common],
                       help='Fidelity and entropy errors at delta = gamma = log^2 d / sqrt d')
    p.add_argument('--d', dest='d_list', type=int, nargs='+', default=None,
                   help='Alphabet sizes (each >= 2)')

    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in _CLI_ONLY and v is not None}


def _emit(result: ExperimentResult, fmt: OutputFormat, command: str, seed: int,
          output: Optional[Path]):
    text = result.render(fmt, __version__, command, seed)
    if output is None:
        write_text(text, sys.stdout)
        return
    write_text(text, output)
    if fmt == OutputFormat.CSV:
        sidecar = output.with_suffix('.json')
        if sidecar != output:
            write_text(result.render(OutputFormat.JSON, __version__, command, seed), sidecar)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point.

    Returns:
        0 on success, 2 on validation errors, 3 when an inequality fails
    """
    args = build_parser().parse_args(argv)

    DebugConfig.set_debug_mode(args.debug)
    setup_logging(logging.DEBUG if args.debug else logging.INFO, args.log_file)
    logger = get_logger(__name__)
    logger.debug(f"blind-bounds {__version__}: {args.command}")

    try:
        config = ConfigManager().build_config(args.command, _flags(args), args.config)
        experiment = ExperimentFactory.create_experiment(config)
        experiment.validate_config()
        result = experiment.run()
    except ValidationError as e:
        logger.error(f"Invalid input: {e}")
        if e.measured:
            logger.error(f"Measured: {e.measured}")
        return EXIT_VALIDATION
    except InvariantViolationError as e:
        logger.error(f"Invariant violated: {e}")
        if e.measured:
            logger.error(f"Measured: {e.measured}")
        return EXIT_INVARIANT
    except BlindBoundsError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=DebugConfig.is_debug_mode())
        return EXIT_ERROR

    fmt = OutputFormat(args.format) if args.format else experiment.default_format
    _emit(result, fmt, args.command, config.seed, config.output)

    if result.success:
        logger.info(result.message)
    else:
        logger.error(result.message)
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
