"""
Tests for model_file module.
"""

import json
import os

import pytest

from fields import Vertex, make_key
from model_file import (
    dump_renormalization, load_model, load_renormalization, parse_model,
    renormalization_from_dict, renormalization_to_dict,
)
from models import ModelError, ScalarKind, Truncation
from scalars import ExactComplex
from uvgroup import Renormalization

TRUNC = Truncation(2, 4)
PHI2 = make_key([Vertex.of("x", {"phi": 2})])
PHI_PHI = make_key([Vertex.of("x", {"phi": 1})] * 2)


def with_changes(base, **changes):
    data = dict(base)
    data.update(changes)
    return data


class TestBundledModels:
    """Test the model files shipped with the workbench."""

    @pytest.mark.parametrize("name", [
        "chain.yaml", "chain_shifted.yaml", "phi4_single_point.yaml",
        "regularized.yaml", "swap_symmetric.yaml",
    ])
    def test_loads(self, models_dir, name):
        model = load_model(os.path.join(models_dir, name))
        assert model.source.endswith(name)
        assert model.description

    def test_chain(self, models_dir):
        model = load_model(os.path.join(models_dir, "chain.yaml"))
        assert model.causal.leq("p0", "p1")
        assert model.cut.value(("p0", "phi"), ("p1", "phi")) == ExactComplex(1, 1)
        assert model.truncation == {'max_sym_degree': 2, 'max_field_degree': 4}

    def test_phi4_theory(self, models_dir):
        model = load_model(os.path.join(models_dir, "phi4_single_point.yaml"))
        assert model.ring.order == 2
        assert model.theory(Truncation(3, 8)) is not None

    def test_coupling_order_override(self, models_dir):
        model = load_model(os.path.join(models_dir, "phi4_single_point.yaml"), coupling_order=1)
        assert model.ring.order == 1

    def test_regularized_measure_is_laurent(self, models_dir):
        model = load_model(os.path.join(models_dir, "regularized.yaml"))
        assert model.measure(TRUNC).scalar_kind == ScalarKind.LAURENT

    def test_measure_cached_per_truncation(self, models_dir):
        model = load_model(os.path.join(models_dir, "chain.yaml"))
        assert model.measure(TRUNC) is model.measure(TRUNC)

    def test_swap_symmetry_group(self, models_dir):
        model = load_model(os.path.join(models_dir, "swap_symmetric.yaml"))
        group, finite = model.symmetry_group(TRUNC)
        assert finite
        assert len(group) == 2

    def test_no_lagrangian_means_no_theory(self, models_dir):
        assert load_model(os.path.join(models_dir, "chain.yaml")).theory() is None


class TestParseErrors:
    """Test validation messages name the offending section."""

    @pytest.mark.parametrize("changes,message", [
        ({'bogus': 1}, "unknown sections"),
        ({'points': []}, "points: at least one point"),
        ({'order': [['x']]}, "order: expected pairs"),
        ({'propagator': [['x', 'phi', 'x', 2]]}, r"propagator\[0\]: expected"),
        ({'feynman_diagonal': [['x', 'phi', 2]]}, r"feynman_diagonal\[0\]"),
        ({'truncation': {'max_sym_degree': -1}}, "truncation.max_sym_degree: expected a non-negative integer"),
        ({'cutoff': {'z': 1}}, "unknown point"),
        ({'lagrangian': "phi[z]^4"}, "unknown point"),
    ])
    def test_rejected(self, sample_model_data, changes, message):
        with pytest.raises(ModelError, match=message):
            parse_model(with_changes(sample_model_data, **changes))

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ModelError, match="top level must be a mapping"):
            parse_model(["x"])

    def test_non_local_propagator(self):
        data = {
            'points': ['x', 'y'],
            'propagator': [['x', 'phi', 'y', 'phi', 1], ['y', 'phi', 'x', 'phi', 2]],
        }
        with pytest.raises(ModelError, match="not local"):
            parse_model(data)
        assert parse_model(with_changes(data, require_locality=False)).cut.is_local is False

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="Model file not found"):
            load_model(str(tmp_path / "absent.yaml"))

    def test_yaml_syntax_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("points: [x\nspecies: [phi]\n")
        with pytest.raises(ModelError, match="syntax error at line"):
            load_model(str(path))


class TestTwist:
    """Test measure twists declared in the model file."""

    def test_twist_shifts_vertex_value(self, sample_model_data):
        twist = {'1': [{'point': 'x', 'monomials': [{'phi': 2}], 'value': 1}]}
        model = parse_model(with_changes(sample_model_data, twist=twist))
        assert model.measure(TRUNC).evaluate_key(PHI2) == 3

    def test_identity_twist_is_dropped(self, sample_model_data):
        model = parse_model(with_changes(sample_model_data, twist={'1': []}))
        assert model.measure(TRUNC).twist is None


class TestRenormalizationFiles:
    """Test reading and writing renormalization files."""

    @pytest.fixture
    def model(self, sample_model_data):
        return parse_model(sample_model_data)

    @pytest.fixture
    def rho(self, model):
        return Renormalization(model.causal, {PHI2: 3, PHI_PHI: ExactComplex(1, -1)}, TRUNC)

    def test_to_dict_groups_by_degree(self, rho):
        data = renormalization_to_dict(rho)['renormalization']
        assert sorted(data) == ['1', '2']
        assert data['1'] == [{'point': 'x', 'monomials': [{'phi': 2}], 'value': '3'}]

    @pytest.mark.parametrize("name", ["rho.yaml", "rho.json"])
    def test_dump_then_load(self, tmp_path, model, rho, name):
        path = str(tmp_path / name)
        dump_renormalization(rho, path)
        assert load_renormalization(path, model, TRUNC).same_as(rho)

    def test_json_output_is_json(self, tmp_path, rho):
        path = str(tmp_path / "rho.json")
        dump_renormalization(rho, path)
        with open(path) as f:
            assert 'renormalization' in json.load(f)

    def test_missing_section(self, model):
        with pytest.raises(ModelError, match="'renormalization' section"):
            renormalization_from_dict(model, {'other': {}})

    def test_incomplete_entry(self, model):
        with pytest.raises(ModelError, match="expected point, monomials and value"):
            renormalization_from_dict(model, {'renormalization': {'1': [{'point': 'x'}]}})

    def test_missing_file(self, tmp_path, model):
        with pytest.raises(FileNotFoundError):
            load_renormalization(str(tmp_path / "absent.yaml"), model)
