"""
Session Configuration
Truncations, seed and run options for one workbench invocation.

Precedence for the truncation settings: command-line flag, then the model
file, then the RENORM_* environment variables, then the defaults.
"""

import logging
import os
import random
from typing import Dict, Mapping, Optional

from model_file import Model, load_model
from models import ConfigError, SubtractionScheme, Truncation

logger = logging.getLogger(__name__)

DEFAULT_MAX_SYM_DEGREE = 3
DEFAULT_MAX_FIELD_DEGREE = 8
DEFAULT_COUPLING_ORDER = 3

ENV_MAX_SYM_DEGREE = "RENORM_MAX_SYM_DEGREE"
ENV_MAX_FIELD_DEGREE = "RENORM_MAX_FIELD_DEGREE"
ENV_COUPLING_ORDER = "RENORM_COUPLING_ORDER"


def _non_negative(value, name: str) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a non-negative integer, got {value!r}")
    try:
        number = int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{name}: expected a non-negative integer, got {value!r}")
    if number < 0:
        raise ConfigError(f"{name}: must be non-negative, got {number}")
    return number


class SessionConfig:
    """
    Settings shared by every command of one run.

    Unset truncation values are resolved against the model file and the
    environment when the model is loaded.
    """

    def __init__(self,
                 max_sym_degree: Optional[int] = None,
                 max_field_degree: Optional[int] = None,
                 coupling_order: Optional[int] = None,
                 regulator_order: Optional[int] = None,
                 seed: int = 0,
                 subtraction: SubtractionScheme = SubtractionScheme.MINIMAL,
                 finite_parts: Optional[str] = None,
                 cases: Optional[int] = None,
                 parallel: int = 1,
                 timing: bool = False,
                 verbose: bool = False,
                 environ: Optional[Mapping[str, str]] = None):
        """
        Initialize session configuration.

        Args:
            max_sym_degree: D, the highest number of vertices in a multiset
            max_field_degree: F, the highest total number of fields
            coupling_order: K, the truncation order of coupling series
            regulator_order: Highest regulator exponent kept in Laurent values
            seed: Seed of the randomized check suites
            subtraction: Scheme used by pole_kill
            finite_parts: Renormalization file with finite parts for the file scheme
            cases: Overrides every suite's default case count
            parallel: Worker threads for suites (1 runs inline)
            timing: Include wall-clock durations in reports
            verbose: Per-case progress lines
            environ: Environment to read defaults from (os.environ when None)
        """
        self.max_sym_degree = _non_negative(max_sym_degree, "max-sym-degree")
        self.max_field_degree = _non_negative(max_field_degree, "max-field-degree")
        self.coupling_order = _non_negative(coupling_order, "coupling-order")
        self.regulator_order = _non_negative(regulator_order, "regulator-order")
        self.seed = _non_negative(seed, "seed")
        if not isinstance(subtraction, SubtractionScheme):
            try:
                subtraction = SubtractionScheme(str(subtraction))
            except ValueError:
                raise ConfigError(f"subtraction: expected minimal or file, got {subtraction!r}")
        if subtraction == SubtractionScheme.FILE and not finite_parts:
            raise ConfigError("subtraction=file requires --finite-parts")
        self.subtraction = subtraction
        self.finite_parts = finite_parts
        self.cases = _non_negative(cases, "cases")
        self.parallel = max(1, _non_negative(parallel, "parallel") or 1)
        self.timing = timing
        self.verbose = verbose
        self.environ = os.environ if environ is None else environ
        self._model_cache: Dict[str, Model] = {}

    def _env(self, name: str) -> Optional[int]:
        return _non_negative(self.environ.get(name), name)

    def truncation(self, model: Optional[Model] = None) -> Truncation:
        """Resolve (D, F) by precedence."""
        file_values = model.truncation if model is not None else {}

        def pick(flag, key, env, default):
            if flag is not None:
                return flag
            if key in file_values:
                return file_values[key]
            value = self._env(env)
            return default if value is None else value

        return Truncation(
            pick(self.max_sym_degree, 'max_sym_degree', ENV_MAX_SYM_DEGREE, DEFAULT_MAX_SYM_DEGREE),
            pick(self.max_field_degree, 'max_field_degree', ENV_MAX_FIELD_DEGREE, DEFAULT_MAX_FIELD_DEGREE),
        )

    def default_coupling_order(self) -> int:
        value = self._env(ENV_COUPLING_ORDER)
        return DEFAULT_COUPLING_ORDER if value is None else value

    def load(self, path: str) -> Model:
        """Load a model with this session's coupling and regulator orders (cached per path)."""
        if path not in self._model_cache:
            self._model_cache[path] = load_model(
                path,
                coupling_order=self.coupling_order,
                regulator_order=self.regulator_order,
                default_coupling_order=self.default_coupling_order(),
            )
        return self._model_cache[path]

    def rng(self, salt: str = "") -> random.Random:
        """Generator seeded by (seed, salt)."""
        return random.Random(f"{self.seed}:{salt}")

    def case_count(self, default: int) -> int:
        return default if self.cases is None else self.cases

    def to_dict(self, model: Optional[Model] = None) -> Dict:
        trunc = self.truncation(model)
        ring = model.ring if model is not None else None
        return {
            'max_sym_degree': trunc.max_sym_degree,
            'max_field_degree': trunc.max_field_degree,
            'coupling_order': ring.order if ring is not None else (
                self.coupling_order if self.coupling_order is not None else self.default_coupling_order()),
            'seed': self.seed,
            'subtraction': self.subtraction.value,
            'finite_parts': self.finite_parts,
            'cases': self.cases,
        }
