"""
Tests for reporting module.
"""

import json

import pytest

from models import CheckResult
from reporting import (
    build_report, collect_checks, coupling_orders, inputs_digest, json_default, print_summary,
    render_report, report_ok,
)
from scalars import CouplingRing, ExactComplex, Regulator


@pytest.fixture
def sample_summary():
    return {
        'suite': 'wick',
        'seed': 3,
        'total_checks': 2,
        'passed': 1,
        'failed': 1,
        'warnings': 0,
        'skipped': 0,
        'duration_seconds': 0.0,
        'results': [
            {'name': 'wick-000', 'result': CheckResult.PASS, 'message': '4 fields'},
            {'name': 'wick-001', 'result': CheckResult.FAIL, 'message': '6 fields'},
        ],
    }


class TestCouplingOrders:
    """Test grouping scalars by coupling order."""

    def test_exact(self):
        assert coupling_orders(ExactComplex(3)) == {'0': "3"}
        assert coupling_orders(ExactComplex(0)) == {}

    def test_series(self):
        lam = CouplingRing(("lam",), 2).variable("lam")
        orders = coupling_orders(lam + lam * lam)
        assert sorted(orders) == ['1', '2']

    def test_laurent_is_left_alone(self):
        assert coupling_orders(Regulator("eps", 4).pole(1)) == {}


class TestReport:
    """Test report assembly."""

    def test_build_report_moves_checks(self):
        results = {'value': "2", 'checks': [{'name': 'a', 'result': CheckResult.PASS}]}
        report = build_report(['wick', 'phi[x]^2'], {'seed': 0}, results)
        assert report['command'] == ['wick', 'phi[x]^2']
        assert report['results'] == {'value': "2"}
        assert len(report['checks']) == 1
        assert report['ok'] is True
        assert 'timing' not in report

    def test_build_report_timing(self):
        report = build_report(['check', 'wick'], {}, {}, elapsed=1.23456)
        assert report['timing'] == {'elapsed_seconds': 1.235}

    def test_suite_results_become_checks(self, sample_summary):
        assert collect_checks(sample_summary) == sample_summary['results']
        report = build_report(['check', 'wick'], {}, sample_summary)
        assert 'results' not in report['results']
        assert report['ok'] is False

    @pytest.mark.parametrize("checks,expected", [
        ([], True),
        ([{'result': 'PASS'}, {'result': 'SKIP'}], True),
        ([{'result': 'FAIL'}], False),
        ([{'result': CheckResult.FAIL}], False),
    ])
    def test_report_ok(self, checks, expected):
        assert report_ok({'checks': checks}) is expected

    def test_render_report_is_sorted_json(self):
        text = render_report({'b': CheckResult.SKIP, 'a': ExactComplex(1, 1)})
        assert json.loads(text) == {'a': "1+i", 'b': "SKIP"}
        assert text.index('"a"') < text.index('"b"')

    def test_json_default(self):
        assert json_default(CheckResult.PASS) == "PASS"
        assert json_default(ExactComplex(0, -1)) == "-i"


class TestInputsDigest:
    """Test the input digest."""

    def test_depends_on_file_contents(self, tmp_path):
        path = tmp_path / "model.yaml"
        path.write_text("points: [x]\n")
        first = inputs_digest([str(path)], ['validate'])
        path.write_text("points: [y]\n")
        assert inputs_digest([str(path)], ['validate']) != first

    def test_depends_on_arguments(self):
        assert inputs_digest([], ['check', 'wick']) != inputs_digest([], ['check', 'gaussian'])

    def test_missing_paths_are_skipped(self, tmp_path):
        digest = inputs_digest([None, str(tmp_path / "absent.yaml")], ['wick'])
        assert len(digest) == 64


class TestPrintSummary:
    """Test console summary."""

    def test_print_summary(self, sample_summary, capsys):
        print_summary(sample_summary)
        captured = capsys.readouterr()
        assert "CHECK SUMMARY" in captured.err
        assert "Suite: wick" in captured.err
        assert "Failed: 1" in captured.err
        assert "✗ wick-001: 6 fields" in captured.err
        assert "wick-000" not in captured.err
        assert captured.out == ""

    def test_print_summary_with_defaults(self, capsys):
        print_summary({})
        captured = capsys.readouterr()
        assert "Suite: unknown" in captured.err
        assert "Total: 0" in captured.err
