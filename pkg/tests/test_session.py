"""
Tests for session module.
"""

import os

import pytest

from model_file import parse_model
from models import ConfigError, SubtractionScheme, Truncation
from session import SessionConfig


@pytest.fixture
def chain_path(models_dir):
    return os.path.join(models_dir, "chain.yaml")


@pytest.fixture
def bare_model(sample_model_data):
    data = dict(sample_model_data)
    data.pop('truncation', None)
    return parse_model(data)


class TestTruncationPrecedence:
    """Test flag > model file > environment > defaults."""

    def test_defaults(self):
        session = SessionConfig(environ={})
        assert session.truncation() == Truncation(3, 8)
        assert session.default_coupling_order() == 3

    def test_environment_over_defaults(self, bare_model):
        session = SessionConfig(environ={'RENORM_MAX_SYM_DEGREE': '4', 'RENORM_MAX_FIELD_DEGREE': '6'})
        assert session.truncation(bare_model) == Truncation(4, 6)

    def test_model_file_over_environment(self, chain_path):
        session = SessionConfig(environ={'RENORM_MAX_SYM_DEGREE': '5'})
        assert session.truncation(session.load(chain_path)) == Truncation(2, 4)

    def test_flag_over_model_file(self, chain_path):
        session = SessionConfig(max_sym_degree=1, environ={})
        assert session.truncation(session.load(chain_path)) == Truncation(1, 4)

    def test_coupling_order_from_environment(self):
        assert SessionConfig(environ={'RENORM_COUPLING_ORDER': '2'}).default_coupling_order() == 2

    def test_bad_environment_value(self):
        session = SessionConfig(environ={'RENORM_MAX_SYM_DEGREE': 'three'})
        with pytest.raises(ConfigError, match="RENORM_MAX_SYM_DEGREE"):
            session.truncation()


class TestValidation:
    """Test option validation."""

    @pytest.mark.parametrize("kwargs,message", [
        ({'max_sym_degree': -1}, "max-sym-degree: must be non-negative"),
        ({'cases': 'many'}, "cases: expected a non-negative integer"),
        ({'seed': True}, "seed: expected a non-negative integer"),
        ({'subtraction': 'maximal'}, "subtraction: expected minimal or file"),
        ({'subtraction': 'file'}, "requires --finite-parts"),
    ])
    def test_rejected(self, kwargs, message):
        with pytest.raises(ConfigError, match=message):
            SessionConfig(environ={}, **kwargs)

    def test_string_subtraction_accepted(self):
        session = SessionConfig(subtraction='file', finite_parts='parts.yaml', environ={})
        assert session.subtraction == SubtractionScheme.FILE

    def test_parallel_at_least_one(self):
        assert SessionConfig(parallel=0, environ={}).parallel == 1


class TestRunHelpers:
    """Test seeded generators, case counts and loading."""

    def test_rng_is_deterministic(self):
        a = SessionConfig(seed=7, environ={}).rng("wick")
        b = SessionConfig(seed=7, environ={}).rng("wick")
        assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]

    def test_rng_depends_on_salt(self):
        session = SessionConfig(seed=7, environ={})
        assert session.rng("wick").random() != session.rng("gaussian").random()

    def test_case_count(self):
        assert SessionConfig(environ={}).case_count(25) == 25
        assert SessionConfig(cases=3, environ={}).case_count(25) == 3

    def test_load_is_cached(self, chain_path):
        session = SessionConfig(environ={})
        assert session.load(chain_path) is session.load(chain_path)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            SessionConfig(environ={}).load(str(tmp_path / "missing.yaml"))

    def test_to_dict(self, chain_path):
        session = SessionConfig(seed=4, cases=2, environ={})
        assert session.to_dict(session.load(chain_path)) == {
            'max_sym_degree': 2,
            'max_field_degree': 4,
            'coupling_order': 3,
            'seed': 4,
            'subtraction': 'minimal',
            'finite_parts': None,
            'cases': 2,
        }
