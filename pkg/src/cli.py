#!/usr/bin/env python3
"""
UV-Group Renormalization Workbench - CLI Entry Point

Usage:
    renorm validate --model models/phi4_single_point.yaml
    renorm wick "phi[x]^4" --model models/phi4_single_point.yaml
    renorm check all --seed 7
"""

import argparse
import logging
import sys
import time
from dataclasses import asdict
from typing import List, Optional, Sequence

from models import SubtractionScheme, WorkbenchError
from orchestrator import WorkbenchOrchestrator, backup_file_if_exists
from reporting import build_report, render_report
from session import SessionConfig
from suites import SUITES


def _common_flags() -> argparse.ArgumentParser:
    """Flags accepted by every command, before or after its arguments."""
    common = argparse.ArgumentParser(add_help=False)

    common.add_argument(
        '--model',
        help='Model file (YAML or JSON)'
    )

    common.add_argument(
        '--max-sym-degree',
        type=int,
        help='Highest number of vertices in a multiset (default: model file, '
             'then RENORM_MAX_SYM_DEGREE, then 3)'
    )

    common.add_argument(
        '--max-field-degree',
        type=int,
        help='Highest total field degree (default: model file, then RENORM_MAX_FIELD_DEGREE, then 8)'
    )

    common.add_argument(
        '--coupling-order',
        type=int,
        help='Truncation order of coupling series (default: model file, then RENORM_COUPLING_ORDER, then 3)'
    )

    common.add_argument(
        '--regulator-order',
        type=int,
        help='Highest regulator exponent kept in Laurent values (default: model file, then 8)'
    )

    common.add_argument(
        '--seed',
        type=int,
        default=0,
        help='Seed of the randomized check suites (default: 0)'
    )

    common.add_argument(
        '--subtraction',
        choices=[s.value for s in SubtractionScheme],
        default=SubtractionScheme.MINIMAL.value,
        help='Finite parts of pole-killing counterterms (default: minimal)'
    )

    common.add_argument(
        '--finite-parts',
        help='Renormalization file with finite parts (--subtraction file)'
    )

    common.add_argument(
        '--cases',
        type=int,
        help='Override the case count of every suite'
    )

    common.add_argument(
        '--parallel',
        type=int,
        default=1,
        help='Worker threads for check suites (default: 1)'
    )

    common.add_argument(
        '--output',
        help='Write the JSON report to this file instead of standard output'
    )

    common.add_argument(
        '--timing',
        action='store_true',
        help='Include wall-clock durations in the report'
    )

    common.add_argument(
        '--verbose',
        action='store_true',
        help='Per-case progress and debug logging on standard error'
    )

    return common


def parse_args(argv: Optional[Sequence[str]] = None):
    """Parse command line arguments."""
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog='renorm',
        description='UV-Group Renormalization Workbench',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Validate a model and classify its measure
  renorm validate --model models/phi4_single_point.yaml

  # Evaluate the measure on one element
  renorm wick "phi[x]^4" --model models/phi4_single_point.yaml

  # Evaluate an interacting word (position 1 is rightmost)
  renorm eval "[1, phi[x]^2]" --model models/phi4_single_point.yaml

  # Renormalization taking one measure to another, saved for later use
  renorm renorm find models/chain.yaml models/chain_shifted.yaml --save rho.yaml

  # Apply a saved renormalization to an element
  renorm renorm apply rho.yaml "phi[p0]^2" --model models/chain.yaml

  # Cancel the poles of a regularized model
  renorm polekill --model models/regularized.yaml --save counterterms.yaml

  # Gram matrix of a word basis
  renorm gns "[1, 1]" "[1, phi[x]]" --model models/phi4_single_point.yaml

  # S-matrix expectation and unitarity through order 2
  renorm smatrix 2 --model models/phi4_single_point.yaml

  # Every property suite, reproducibly
  renorm check all --seed 7
        """
    )
    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    commands.add_parser('validate', parents=[common], help='Validate a model file')

    wick = commands.add_parser('wick', parents=[common], help='omega(A) for one element')
    wick.add_argument('expression', help='Element, e.g. "phi[x]^4 + 1/2*(phi^2*psi)[y]"')

    evaluate = commands.add_parser('eval', parents=[common], help='Value of a word [A_n, ..., A_1]')
    evaluate.add_argument('word', help='Word, e.g. "[exp(i*lam*phi[x]^4), phi[x]^2]"')
    evaluate.add_argument('--free', action='store_true', help='Ignore the model Lagrangian')

    renorm = commands.add_parser('renorm', help='Find or apply renormalizations')
    renorm_commands = renorm.add_subparsers(dest='renorm_command', required=True, metavar='ACTION')
    find = renorm_commands.add_parser('find', parents=[common], help='g with g . omega1 = omega2')
    find.add_argument('first', help='Model file of omega1')
    find.add_argument('second', help='Model file of omega2')
    find.add_argument('--save', help='Write the renormalization to this file (.json or .yaml)')
    apply_ = renorm_commands.add_parser('apply', parents=[common], help='rho(A) and (rho . omega)(A)')
    apply_.add_argument('renormalization', help='Renormalization file')
    apply_.add_argument('expression', help='Element to transform')

    polekill = commands.add_parser('polekill', parents=[common], help='Cancel poles of a regularized model')
    polekill.add_argument('--save', help='Write the counterterms to this file (.json or .yaml)')

    gns = commands.add_parser('gns', parents=[common], help='Gram matrix of a word basis')
    gns.add_argument('basis', nargs='+', help='Basis words, each of even length')

    smatrix = commands.add_parser('smatrix', parents=[common], help='S-matrix expectation and unitarity')
    smatrix.add_argument('order', type=int, help='Coupling order to report through')

    check = commands.add_parser('check', parents=[common], help='Run a property suite')
    check.add_argument('suite', choices=list(SUITES) + ['all'], help='Suite name or all')

    return parser.parse_args(argv)


def _command_echo(args) -> List[str]:
    if args.command == 'wick':
        return ['wick', args.expression]
    if args.command == 'eval':
        return ['eval', args.word] + (['--free'] if args.free else [])
    if args.command == 'renorm' and args.renorm_command == 'find':
        return ['renorm', 'find', args.first, args.second]
    if args.command == 'renorm':
        return ['renorm', 'apply', args.renormalization, args.expression]
    if args.command == 'gns':
        return ['gns'] + list(args.basis)
    if args.command == 'smatrix':
        return ['smatrix', str(args.order)]
    if args.command == 'check':
        return ['check', args.suite]
    return [args.command]


def _input_paths(args) -> List[Optional[str]]:
    paths = [args.model, args.finite_parts]
    if args.command == 'renorm' and args.renorm_command == 'find':
        paths += [args.first, args.second]
    elif args.command == 'renorm':
        paths.append(args.renormalization)
    return paths


def run(args, orchestrator: WorkbenchOrchestrator):
    """Dispatch one parsed command; returns the results dictionary."""
    if args.command == 'validate':
        results = orchestrator.validate()
        print(f"✓ Model valid: {len(orchestrator.model.causal.points)} points, "
              f"{results['scalar_kind']} scalars", file=sys.stderr)
        return results
    if args.command == 'wick':
        return orchestrator.wick(args.expression)
    if args.command == 'eval':
        return orchestrator.evaluate(args.word, free=args.free)
    if args.command == 'renorm' and args.renorm_command == 'find':
        return orchestrator.renorm_find(args.first, args.second, output=args.save)
    if args.command == 'renorm':
        return orchestrator.renorm_apply(args.renormalization, args.expression)
    if args.command == 'polekill':
        return orchestrator.polekill(output=args.save)
    if args.command == 'gns':
        return orchestrator.gns(args.basis)
    if args.command == 'smatrix':
        return orchestrator.smatrix(args.order)
    if args.command == 'check':
        return asdict(orchestrator.check(args.suite))
    raise WorkbenchError(f"Unknown command: {args.command}")


def main(argv: Optional[Sequence[str]] = None):
    """Main entry point."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    start_time = time.time()
    try:
        session = SessionConfig(
            max_sym_degree=args.max_sym_degree,
            max_field_degree=args.max_field_degree,
            coupling_order=args.coupling_order,
            regulator_order=args.regulator_order,
            seed=args.seed,
            subtraction=args.subtraction,
            finite_parts=args.finite_parts,
            cases=args.cases,
            parallel=args.parallel,
            timing=args.timing,
            verbose=args.verbose,
        )
        orchestrator = WorkbenchOrchestrator(session, args.model)
        results = run(args, orchestrator)
        report = build_report(
            _command_echo(args),
            session.to_dict(orchestrator.model),
            results,
            paths=_input_paths(args),
            argv=argv,
            elapsed=time.time() - start_time if args.timing else None,
        )
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    except WorkbenchError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)

    text = render_report(report)
    if args.output:
        backup = backup_file_if_exists(args.output)
        if backup:
            print(f"  Backed up existing file to: {backup}", file=sys.stderr)
        with open(args.output, 'w') as f:
            f.write(text + "\n")
        print(f"✓ Report written to {args.output}", file=sys.stderr)
    else:
        print(text)

    # Exit code for CI
    sys.exit(0 if report['ok'] else 1)


if __name__ == "__main__":
    main()
