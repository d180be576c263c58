"""
Shared test fixtures for the renormalization workbench.
"""

import os
import sys

import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from causal import CausalSet
from models import Truncation
from scalars import CouplingRing, Regulator
from wick import CutPropagator, feynman_measure

MODELS_DIR = os.path.join(os.path.dirname(__file__), '..', 'models')


@pytest.fixture
def models_dir():
    """Directory of the bundled model files."""
    return MODELS_DIR


@pytest.fixture
def sample_single_point():
    """One point x with one species phi."""
    return CausalSet.build(["x"])


@pytest.fixture
def sample_antichain():
    """Two spacelike points."""
    return CausalSet.build(["x", "y"])


@pytest.fixture
def sample_chain():
    """a <= b <= c, closure supplies a <= c."""
    return CausalSet.build(["a", "b", "c"], [("a", "b"), ("b", "c")])


@pytest.fixture
def sample_diamond():
    """bottom <= left, right <= top with left and right spacelike."""
    return CausalSet.build(
        ["bottom", "left", "right", "top"],
        [("bottom", "left"), ("bottom", "right"), ("left", "top"), ("right", "top")],
    )


@pytest.fixture
def sample_single_point_measure(sample_single_point):
    """Feynman measure with Delta(x, x) = 2."""
    cut = CutPropagator.build(sample_single_point, [("x", "phi", "x", "phi", 2)])
    return feynman_measure(cut)


@pytest.fixture
def sample_chain_measure():
    """Two-point chain p0 <= p1 with Delta(p0, p1) = 2 and Delta(p1, p0) = 3."""
    causal = CausalSet.build(["p0", "p1"], [("p0", "p1")])
    cut = CutPropagator.build(causal, [
        ("p0", "phi", "p0", "phi", 1),
        ("p1", "phi", "p1", "phi", 1),
        ("p0", "phi", "p1", "phi", 2),
        ("p1", "phi", "p0", "phi", 3),
    ])
    return feynman_measure(cut)


@pytest.fixture
def sample_ring():
    """One coupling lam through order 2."""
    return CouplingRing(("lam",), 2)


@pytest.fixture
def sample_regulator():
    return Regulator("eps", 4)


@pytest.fixture
def small_truncation():
    return Truncation(2, 4)


@pytest.fixture
def sample_model_data():
    """Minimal valid single-point model mapping."""
    return {
        'points': ['x'],
        'species': ['phi'],
        'propagator': [['x', 'phi', 'x', 'phi', 2]],
    }
