"""
Tests for orchestrator module.
"""

import os

import pytest

from models import CheckResult, ModelError, ParityError
from orchestrator import WorkbenchOrchestrator, backup_file_if_exists
from session import SessionConfig

ENTRY_PHI2_P0 = {'point': 'p0', 'monomials': [{'phi': 2}], 'value': '2'}


@pytest.fixture
def model_path(models_dir):
    def path(name):
        return os.path.join(models_dir, name)
    return path


def orchestrator(path=None, **kwargs):
    return WorkbenchOrchestrator(SessionConfig(environ={}, **kwargs), path)


class TestOrchestratorInit:
    """Test orchestrator initialization."""

    def test_init_without_model(self):
        orch = orchestrator()
        assert orch.model is None

    def test_init_loads_model(self, model_path):
        orch = orchestrator(model_path("chain.yaml"))
        assert list(orch.model.causal.points) == ["p0", "p1"]

    def test_init_missing_model(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            orchestrator(str(tmp_path / "absent.yaml"))

    def test_commands_need_a_model(self):
        with pytest.raises(ModelError, match="needs a model file"):
            orchestrator().wick("phi[x]^2")


class TestEvaluationCommands:
    """Test validate, wick, eval and gns."""

    def test_validate(self, model_path):
        results = orchestrator(model_path("chain.yaml")).validate()
        assert results['scalar_kind'] == 'exact'
        assert results['interacting'] is False
        assert results['cut']
        assert results['symmetries'] is None

    def test_validate_regularized_skips_flags(self, model_path):
        results = orchestrator(model_path("regularized.yaml")).validate()
        assert results['scalar_kind'] == 'laurent'
        assert results['flags'] is None

    def test_validate_symmetries(self, model_path):
        results = orchestrator(model_path("swap_symmetric.yaml")).validate()
        assert results['symmetries'] == {'generators': 1, 'finite': True, 'order': 2}

    def test_wick(self, model_path):
        results = orchestrator(model_path("phi4_single_point.yaml")).wick("phi[x]^4")
        assert results['value'] == "12"
        assert results['by_order'] == {'0': "12"}

    def test_eval_bare_element_is_wick(self, model_path):
        results = orchestrator(model_path("phi4_single_point.yaml")).evaluate("phi[x]^2")
        assert results['value'] == "2"

    def test_eval_free_word(self, model_path):
        results = orchestrator(model_path("phi4_single_point.yaml")).evaluate("[phi[x]^2, 1]", free=True)
        assert results['value'] == "-2"
        assert results['degree'] == 2
        assert results['interacting'] is False

    def test_eval_interacting_flag(self, model_path):
        results = orchestrator(model_path("phi4_single_point.yaml")).evaluate("[1, 1]")
        assert results['interacting'] is True
        assert results['value'] == "1"

    def test_eval_odd_word(self, model_path):
        with pytest.raises(ParityError):
            orchestrator(model_path("phi4_single_point.yaml")).evaluate("[1]", free=True)

    def test_gns(self, model_path):
        results = orchestrator(model_path("phi4_single_point.yaml")).gns(["[1, 1]", "[1, phi[x]]"])
        assert results['matrix'] == [["1", "0"], ["0", "2"]]
        assert results['hermitian'] is True
        assert results['psd'] is True
        assert results['rank'] == 2


class TestRenormalizationCommands:
    """Test renorm find/apply and polekill."""

    def test_find_diagonal_shift(self, model_path):
        results = orchestrator().renorm_find(model_path("chain.yaml"), model_path("chain_shifted.yaml"))
        assert ENTRY_PHI2_P0 in results['renormalization']['1']
        assert results['components'] >= 1

    def test_find_then_apply(self, model_path, tmp_path):
        saved = str(tmp_path / "rho.yaml")
        results = orchestrator().renorm_find(model_path("chain.yaml"), model_path("chain_shifted.yaml"),
                                             output=saved)
        assert results['output_file'] == saved
        assert os.path.exists(saved)
        applied = orchestrator(model_path("chain.yaml")).renorm_apply(saved, "phi[p0]^2")
        assert applied['value'] == "3"

    def test_find_rejects_different_cuts(self, model_path):
        with pytest.raises(ModelError, match="different cut propagators"):
            orchestrator().renorm_find(model_path("chain.yaml"), model_path("swap_symmetric.yaml"))

    def test_polekill(self, model_path):
        results = orchestrator(model_path("regularized.yaml")).polekill()
        assert results['scheme'] == 'minimal'
        assert results['verified_keys'] > 0
        assert results['checks'][0]['result'] == CheckResult.PASS
        assert results['renormalization']['1']

    def test_polekill_needs_regulator(self, model_path):
        with pytest.raises(ModelError, match="no regulator"):
            orchestrator(model_path("chain.yaml")).polekill()

    def test_polekill_file_scheme(self, model_path, tmp_path):
        parts = tmp_path / "parts.yaml"
        parts.write_text(
            "renormalization:\n"
            "  '1':\n"
            "  - point: x\n"
            "    monomials: [{phi: 2}]\n"
            "    value: 4\n"
        )
        orch = orchestrator(model_path("regularized.yaml"), subtraction='file', finite_parts=str(parts))
        results = orch.polekill()
        assert results['scheme'] == 'file'
        assert results['finite_values']['phi^2[x]'] in ("5", {'0': "5"})


class TestSMatrix:
    """Test the S-matrix command."""

    def test_unitarity(self, model_path):
        results = orchestrator(model_path("phi4_single_point.yaml")).smatrix(2)
        assert results['checks'][0]['result'] == CheckResult.PASS
        assert results['unitarity'] == {'0': "1"}

    def test_order_above_ring(self, model_path):
        with pytest.raises(ModelError, match="exceeds"):
            orchestrator(model_path("phi4_single_point.yaml")).smatrix(5)

    def test_needs_lagrangian(self, model_path):
        with pytest.raises(ModelError, match="couplings and a lagrangian"):
            orchestrator(model_path("chain.yaml")).smatrix(1)


class TestCheck:
    """Test property suite runs."""

    def test_check_summary(self, capsys):
        summary = orchestrator(cases=2).check('wick')
        assert summary.total_checks == 2
        assert summary.passed == 2
        assert summary.start_time == ""
        assert all(r['duration_ms'] == 0 for r in summary.results)
        captured = capsys.readouterr()
        assert "RUNNING SUITE: WICK" in captured.err
        assert "CHECK SUMMARY" in captured.err

    def test_parallel_results_sorted(self):
        summary = orchestrator(cases=4, parallel=3).check('hermiticity')
        names = [r['name'] for r in summary.results]
        assert names == sorted(names)
        assert summary.failed == 0

    def test_timing_keeps_times(self):
        summary = orchestrator(cases=1, timing=True).check('wick')
        assert summary.start_time


class TestBackupFile:
    """Test backup before overwriting."""

    def test_no_file(self, tmp_path):
        assert backup_file_if_exists(str(tmp_path / "absent.json")) == ""

    def test_existing_file(self, tmp_path):
        path = tmp_path / "report.json"
        path.write_text("{}")
        backup = backup_file_if_exists(str(path))
        assert backup != str(path)
        assert backup.endswith(".json")
        assert os.path.exists(backup)
