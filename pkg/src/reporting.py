"""
Reporting Module
Builds the JSON report written to standard output and the console summary
written to standard error.
"""

import hashlib
import json
import os
import sys
from enum import Enum
from typing import Dict, List, Optional, Sequence

from fields import SymElement
from scalars import CouplingSeries, ExactComplex, RegulatorLaurent, as_scalar


def json_default(obj):
    """Enums by value, anything else by its exact text."""
    if isinstance(obj, Enum):
        return obj.value
    return str(obj)


def render_element(element: SymElement) -> str:
    return str(element)


def coupling_orders(value) -> Dict[str, str]:
    """
    Non-zero parts of a scalar by total coupling order.

    Exact scalars sit at order 0; Laurent values are left to their
    exponent mapping and give an empty dict.
    """
    if isinstance(value, RegulatorLaurent):
        return {}
    if isinstance(value, CouplingSeries):
        grouped: Dict[int, Dict] = {}
        for exps, coeff in value.terms.items():
            grouped.setdefault(sum(exps), {})[exps] = coeff
        return {str(k): str(CouplingSeries(value.ring, terms)) for k, terms in sorted(grouped.items())}
    c = as_scalar(value)
    return {} if isinstance(c, ExactComplex) and c.is_zero() else {'0': str(c)}


def inputs_digest(paths: Sequence[Optional[str]], argv: Sequence[str]) -> str:
    """sha256 over the named input files and the argument list."""
    digest = hashlib.sha256()
    for path in paths:
        if path and os.path.exists(path):
            with open(path, 'rb') as f:
                digest.update(f.read())
        digest.update(b"\0")
    digest.update(json.dumps(list(argv)).encode())
    return digest.hexdigest()


def collect_checks(results: Dict) -> List[Dict]:
    """Case dictionaries of a command's results (empty for pure evaluations)."""
    if 'checks' in results:
        return list(results['checks'])
    return list(results.get('results', []))


def report_ok(report: Dict) -> bool:
    """True when no check case failed."""
    return all(_result_value(c.get('result')) != "FAIL" for c in report.get('checks', []))


def _result_value(result) -> str:
    return result.value if isinstance(result, Enum) else str(result)


def build_report(command: Sequence[str], settings: Dict, results: Dict,
                 paths: Sequence[Optional[str]] = (), argv: Sequence[str] = (),
                 elapsed: Optional[float] = None) -> Dict:
    """
    Assemble the report.

    Args:
        command: Command echo, e.g. ['wick', 'phi[x]^4']
        settings: Resolved session settings
        results: Command results from the orchestrator
        paths: Input files hashed into the digest
        argv: Full argument list hashed into the digest
        elapsed: Wall-clock seconds; only reported when given
    """
    checks = collect_checks(results)
    report = {
        'command': list(command),
        'inputs_digest': inputs_digest(paths, argv),
        'settings': settings,
        'results': {k: v for k, v in results.items() if k not in ('checks', 'results')},
        'checks': checks,
    }
    report['ok'] = report_ok(report)
    if elapsed is not None:
        report['timing'] = {'elapsed_seconds': round(elapsed, 3)}
    return report


def render_report(report: Dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=json_default)


def print_summary(summary: Dict):
    """Print a formatted check summary to standard error."""
    out = sys.stderr
    print(f"\n{'=' * 80}", file=out)
    print("CHECK SUMMARY", file=out)
    print(f"{'=' * 80}", file=out)
    print(f"Suite: {summary.get('suite', 'unknown')}", file=out)
    print(f"Seed: {summary.get('seed', 0)}", file=out)
    print(f"Total: {summary.get('total_checks', 0)}", file=out)
    print(f"Passed: {summary.get('passed', 0)}", file=out)
    print(f"Failed: {summary.get('failed', 0)}", file=out)
    print(f"Warnings: {summary.get('warnings', 0)}", file=out)
    print(f"Skipped: {summary.get('skipped', 0)}", file=out)
    if summary.get('duration_seconds'):
        print(f"Duration: {summary['duration_seconds']:.2f}s", file=out)
    for case in summary.get('results', []):
        if _result_value(case.get('result')) == "FAIL":
            print(f"  ✗ {case['name']}: {case['message']}", file=out)
    print(f"{'=' * 80}", file=out)
