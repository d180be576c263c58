"""
Workbench Orchestrator
Thin orchestration layer that loads the model, dispatches one command to the
engine modules and collects the results for reporting.
"""

import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence

from expressions import is_word, parse_element, parse_word_factors
from fields import render_key
from model_file import Model, dump_renormalization, load_renormalization, renormalization_to_dict
from models import CheckCase, CheckResult, CheckSummary, ModelError, ScalarKind, SubtractionScheme, Truncation
from operators import TensorWord, gns_gram, interacting_eval, omega_tensor, s_matrix
from reporting import coupling_orders, print_summary, render_element
from scalars import render_scalar
from session import SessionConfig
from suites import PlannedCase, PropertyChecker
from uvgroup import find_renormalization, pole_kill, renorm_act_measure
from wick import classify_measure


def backup_file_if_exists(filepath: str) -> str:
    """
    Backup existing file with timestamp before overwriting.

    Args:
        filepath: Path to the file to backup

    Returns:
        Path to backup file if created, empty string otherwise
    """
    if not os.path.exists(filepath):
        return ""

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    base, ext = os.path.splitext(filepath)
    backup_path = f"{base}_{timestamp}{ext}"

    shutil.copy2(filepath, backup_path)
    return backup_path


def _status(ok: bool) -> str:
    return "✓" if ok else "✗"


class WorkbenchOrchestrator:
    """
    Main orchestrator - one instance per CLI invocation.

    Every command returns a results dictionary; commands that verify
    something also return a 'checks' list of case dictionaries, and the
    invocation succeeds iff none of them failed.
    """

    def __init__(self, session: SessionConfig, model_path: Optional[str] = None):
        """
        Initialize the orchestrator.

        Args:
            session: SessionConfig for truncations, seed and run options
            model_path: Path to the model file (YAML or JSON)

        Raises:
            FileNotFoundError: model file does not exist
            ModelError: model file is invalid
        """
        self.session = session
        self.model_path = model_path
        self.model: Optional[Model] = session.load(model_path) if model_path else None

    # -------------------------------------------------------------------------
    # Helpers
    # -------------------------------------------------------------------------

    def _require_model(self) -> Model:
        if self.model is None:
            raise ModelError("this command needs a model file (--model)")
        return self.model

    @property
    def truncation(self) -> Truncation:
        return self.session.truncation(self.model)

    def _log(self, message: str) -> None:
        if self.session.verbose:
            print(message, file=sys.stderr)

    def _word(self, text: str, truncation: Truncation) -> TensorWord:
        model = self._require_model()
        if not is_word(text):
            raise ModelError(f"expected a word [A_n, ..., A_1], got {text!r}")
        return TensorWord(parse_word_factors(text, model.context(truncation)))

    # -------------------------------------------------------------------------
    # Commands
    # -------------------------------------------------------------------------

    def validate(self) -> Dict:
        """Parse the model and classify its measure through a small truncation."""
        model = self._require_model()
        trunc = self.truncation
        omega = model.measure(trunc)
        flags_trunc = Truncation(min(3, trunc.max_sym_degree), min(4, trunc.max_field_degree))
        flags = classify_measure(omega, flags_trunc) if omega.scalar_kind != ScalarKind.LAURENT else None
        theory = model.theory(trunc)
        symmetries = None
        if model.symmetries:
            group, finite = model.symmetry_group(trunc)
            symmetries = {'generators': len(model.symmetries), 'finite': finite,
                          'order': len(group) if finite else None}
        return {
            'model': model.to_dict(),
            'scalar_kind': omega.scalar_kind.value,
            'cut': model.cut.flags(),
            'flags': flags.to_dict() if flags else None,
            'interacting': theory is not None,
            'symmetries': symmetries,
        }

    def wick(self, expression: str) -> Dict:
        """omega(A) for one element of the composite-field algebra."""
        model = self._require_model()
        trunc = self.truncation
        element = parse_element(expression, model.context(trunc))
        value = model.measure(trunc).evaluate(element)
        return {
            'expression': expression,
            'element': render_element(element),
            'value': render_scalar(value),
            'by_order': coupling_orders(value),
        }

    def evaluate(self, text: str, free: bool = False) -> Dict:
        """
        Value of a word on the model.

        With a Lagrangian every factor is dressed by exp(i f L) unless free
        is set; a bare element is evaluated by the measure.
        """
        model = self._require_model()
        trunc = self.truncation
        if not is_word(text):
            return self.wick(text)
        word = self._word(text, trunc)
        theory = None if free else model.theory(trunc)
        if theory is None:
            value = omega_tensor(model.measure(trunc), word)
        else:
            value = interacting_eval(theory, word)
        return {
            'word': text,
            'degree': word.degree,
            'interacting': theory is not None,
            'value': render_scalar(value),
            'by_order': coupling_orders(value),
        }

    def renorm_find(self, first: str, second: str, output: Optional[str] = None) -> Dict:
        """The unique renormalization g with g . omega1 = omega2 on the spanning keys."""
        m1 = self.session.load(first)
        m2 = self.session.load(second)
        if not m1.cut.same_entries(m2.cut):
            raise ModelError(f"{first} and {second} have different cut propagators")
        trunc = self.session.truncation(m1)
        omega1, omega2 = m1.measure(trunc), m2.measure(trunc)
        rho = find_renormalization(omega1, omega2, trunc)
        results = {'models': [first, second], 'components': len(rho.data)}
        results.update(renormalization_to_dict(rho))
        if output:
            backup = backup_file_if_exists(output)
            if backup:
                print(f"  Backed up existing file to: {backup}", file=sys.stderr)
            dump_renormalization(rho, output)
            results['output_file'] = output
        return results

    def renorm_apply(self, path: str, expression: str) -> Dict:
        """rho(A) and (rho . omega)(A) for a renormalization file."""
        model = self._require_model()
        trunc = self.truncation
        rho = load_renormalization(path, model, trunc)
        element = parse_element(expression, model.context(trunc))
        image = rho.act(element)
        value = renorm_act_measure(rho, model.measure(trunc)).evaluate(element)
        return {
            'renormalization': path,
            'expression': expression,
            'image': render_element(image),
            'value': render_scalar(value),
        }

    def polekill(self, output: Optional[str] = None) -> Dict:
        """Counterterms cancelling every pole of a regularized model."""
        model = self._require_model()
        if model.regulator is None:
            raise ModelError("polekill: the model has no regulator section")
        trunc = self.truncation
        finite_parts = None
        if self.session.subtraction == SubtractionScheme.FILE:
            finite_parts = load_renormalization(self.session.finite_parts, model, trunc).data
        omega = model.measure(trunc)
        result = pole_kill(omega, trunc, self.session.subtraction, finite_parts)
        finite_values = {
            render_key(key): render_scalar(result.measure.evaluate_key(key))
            for key in sorted(result.renormalization.data)
        }
        results = {
            'scheme': self.session.subtraction.value,
            'stages': result.stages,
            'verified_keys': result.verified_keys,
            'finite_values': finite_values,
        }
        results.update(renormalization_to_dict(result.renormalization))
        if output:
            backup = backup_file_if_exists(output)
            if backup:
                print(f"  Backed up existing file to: {backup}", file=sys.stderr)
            dump_renormalization(result.renormalization, output)
            results['output_file'] = output
        check = CheckCase(
            name="polekill-finite",
            result=CheckResult.PASS,
            message=f"{result.verified_keys} keys finite after {len(result.renormalization.data)} counterterms",
            duration_ms=0,
        )
        results['checks'] = [asdict(check)]
        return results

    def gns(self, basis: Sequence[str]) -> Dict:
        """Gram matrix <b_i, b_j> = omega(b_i* b_j) and its LDL data."""
        model = self._require_model()
        trunc = self.truncation
        words = [self._word(text, trunc) for text in basis]
        report = gns_gram(model.measure(trunc), words)
        return {
            'basis': list(basis),
            'matrix': [[render_scalar(v) for v in row] for row in report.matrix],
            'hermitian': report.hermitian,
            'psd': report.psd,
            'rank': report.rank,
            'pivots': [render_scalar(p) for p in report.pivots],
        }

    def smatrix(self, order: int) -> Dict:
        """omega(S) and the unitarity witness omega(S* S) through a coupling order."""
        model = self._require_model()
        if model.ring is None or not model.lagrangian:
            raise ModelError("smatrix: the model needs couplings and a lagrangian")
        if order > model.ring.order:
            raise ModelError(f"smatrix: order {order} exceeds the model's coupling order {model.ring.order}")
        base = self.truncation
        lagrangian = model.lagrangian_element(base)
        fields = max((v.field_degree for key in lagrangian.terms for v in key), default=0)
        trunc = base.widen(order + 1, fields * order)
        theory = model.theory(trunc)
        s = s_matrix(theory)
        expectation = s.expectation()
        unitarity = s.matrix_element(s.unitarity_word())
        defect = {k: v for k, v in coupling_orders(unitarity - 1).items() if int(k) <= order}
        ok = not defect
        check = CheckCase(
            name="smatrix-unitarity",
            result=CheckResult.PASS if ok else CheckResult.FAIL,
            message="omega(S* S) = 1" if ok else "omega(S* S) differs from 1",
            duration_ms=0,
            metadata={'defect': defect} if not ok else None,
        )
        return {
            'order': order,
            'expectation': {k: v for k, v in coupling_orders(expectation).items() if int(k) <= order},
            'unitarity': {k: v for k, v in coupling_orders(unitarity).items() if int(k) <= order},
            'checks': [asdict(check)],
        }

    # -------------------------------------------------------------------------
    # Property suites
    # -------------------------------------------------------------------------

    def run_cases(self, cases: List[PlannedCase]) -> List[CheckCase]:
        """Run planned cases inline or in a thread pool, sorted by name."""
        results: List[CheckCase] = []

        def report(result: CheckCase) -> None:
            results.append(result)
            self._log(f"  {_status(result.result != CheckResult.FAIL)} {result.name}: "
                      f"{result.result.value} {result.message}")

        if self.session.parallel > 1 and len(cases) > 1:
            self._log(f"\nRunning {len(cases)} cases with {self.session.parallel} workers...")
            with ThreadPoolExecutor(max_workers=self.session.parallel) as executor:
                futures = {executor.submit(runner): name for name, runner in cases}
                for future in as_completed(futures):
                    report(future.result())
        else:
            for _, runner in cases:
                report(runner())

        results.sort(key=lambda r: r.name)
        return results

    def check(self, suite: str) -> CheckSummary:
        """Run one suite (or 'all') and summarize it."""
        start_time = datetime.now(timezone.utc)
        checker = PropertyChecker(self.session, self.model)
        cases = checker.plan(suite)
        print(f"\n{'=' * 80}", file=sys.stderr)
        print(f"RUNNING SUITE: {suite.upper()}", file=sys.stderr)
        print(f"{'=' * 80}", file=sys.stderr)
        print(f"Seed: {self.session.seed}  Cases: {len(cases)}", file=sys.stderr)

        results = self.run_cases(cases)
        if not self.session.timing:
            for r in results:
                r.duration_ms = 0
        end_time = datetime.now(timezone.utc)
        summary = CheckSummary(
            suite=suite,
            seed=self.session.seed,
            start_time=start_time.isoformat() if self.session.timing else "",
            end_time=end_time.isoformat() if self.session.timing else "",
            duration_seconds=(end_time - start_time).total_seconds() if self.session.timing else 0.0,
            total_checks=len(results),
            passed=sum(1 for r in results if r.result == CheckResult.PASS),
            failed=sum(1 for r in results if r.result == CheckResult.FAIL),
            warnings=sum(1 for r in results if r.result == CheckResult.WARN),
            skipped=sum(1 for r in results if r.result == CheckResult.SKIP),
            results=[asdict(r) for r in results],
        )
        print_summary(asdict(summary))
        return summary
