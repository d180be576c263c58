"""
Data Models, Enums and Errors
Shared across all modules
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

# =============================================================================
# ENUMS
# =============================================================================

class CheckResult(Enum):
    """Check result status"""
    PASS = "PASS"
    FAIL = "FAIL"
    WARN = "WARN"
    SKIP = "SKIP"

class ScalarKind(Enum):
    """Scalar layer a model evaluates in"""
    EXACT = "exact"
    COUPLING = "coupling"
    LAURENT = "laurent"

class SubtractionScheme(Enum):
    """How pole_kill fixes finite parts of counterterms"""
    MINIMAL = "minimal"
    FILE = "file"

# =============================================================================
# ERRORS
# =============================================================================

class WorkbenchError(Exception):
    """Base class for all workbench errors"""

class ModelError(WorkbenchError, ValueError):
    """Rejected input: cites the violated invariant and where it was found"""

class ConfigError(WorkbenchError, ValueError):
    """Invalid session configuration value"""

class NonNilpotentError(WorkbenchError, ValueError):
    """exp/log requested on data that is not nilpotent modulo truncation"""

class ParityError(WorkbenchError, ValueError):
    """Tensor word with an odd number of factors"""

class InvariantViolation(WorkbenchError, RuntimeError):
    """A structural fact the algorithms rely on failed on actual data"""

class InapplicableCheck(WorkbenchError):
    """A check's hypothesis does not hold; reported as SKIP, never FAIL"""

# =============================================================================
# TRUNCATION MODELS
# =============================================================================

@dataclass(frozen=True)
class Truncation:
    """Session truncation of the symmetric algebra: degree D and total field degree F"""
    max_sym_degree: int = 3
    max_field_degree: int = 8

    def admits(self, sym_degree: int, field_degree: int) -> bool:
        return sym_degree <= self.max_sym_degree and field_degree <= self.max_field_degree

    def widen(self, sym_degree: int = 0, field_degree: int = 0) -> "Truncation":
        """Truncation at least as large as both self and the given bounds."""
        return Truncation(
            max(self.max_sym_degree, sym_degree),
            max(self.max_field_degree, field_degree),
        )

# =============================================================================
# CHECK MODELS
# =============================================================================

@dataclass
class CheckCase:
    """Individual check case result"""
    name: str
    result: CheckResult
    message: str
    duration_ms: int
    metadata: Optional[Dict] = None

@dataclass
class CheckSummary:
    """Check suite summary"""
    suite: str
    seed: int
    start_time: str
    end_time: str
    duration_seconds: float
    total_checks: int
    passed: int
    failed: int
    warnings: int
    skipped: int
    results: List[Dict] = field(default_factory=list)
