"""
Model Files
Loads a model description (YAML or JSON) into a validated causal set, cut
propagator and the optional extras: Feynman diagonal, couplings, regulator,
Lagrangian, cutoff, symmetries and measure twist. Also reads and writes
renormalization files.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import yaml

from anomaly import FieldSymmetry, closure
from causal import CausalSet
from expressions import ExpressionContext, parse_element, parse_scalar
from models import ModelError, Truncation
from operators import InteractingTheory
from scalars import CouplingRing, Regulator, RegulatorLaurent, Scalar, render_scalar
from uvgroup import Renormalization
from wick import CutPropagator, FeynmanMeasure, feynman_measure

logger = logging.getLogger(__name__)

KNOWN_KEYS = {
    'points', 'order', 'close_order', 'allow_preorder', 'species', 'propagator',
    'feynman_diagonal', 'require_locality', 'couplings', 'regulator', 'lagrangian',
    'cutoff', 'truncation', 'symmetries', 'twist', 'description',
}


@dataclass
class Model:
    """A validated model file; measures are built on demand per truncation"""
    causal: CausalSet
    cut: CutPropagator
    diagonal: Dict[Tuple[str, Tuple[str, str]], Scalar] = field(default_factory=dict)
    require_locality: bool = True
    ring: Optional[CouplingRing] = None
    regulator: Optional[Regulator] = None
    truncation: Dict[str, int] = field(default_factory=dict)
    lagrangian: Optional[str] = None
    cutoff: Dict[str, Scalar] = field(default_factory=dict)
    symmetries: List[Dict] = field(default_factory=list)
    twist: Optional[Mapping] = None
    description: str = ""
    source: Optional[str] = None
    _measures: Dict[Truncation, FeynmanMeasure] = field(default_factory=dict, repr=False, compare=False)

    def context(self, truncation: Truncation = Truncation()) -> ExpressionContext:
        return ExpressionContext(self.causal, self.ring, self.regulator, truncation)

    def scalar(self, value) -> Scalar:
        return _scalar(value, self.ring, self.regulator, "value")

    def measure(self, truncation: Truncation = Truncation()) -> FeynmanMeasure:
        """
        The Feynman measure of the model, twisted when the file carries one.

        Raises:
            ModelError: the cut propagator is not local or the twist is malformed
        """
        if truncation not in self._measures:
            twist = None
            if self.twist:
                twist = renormalization_from_dict(self, {'renormalization': self.twist}, truncation)
                if twist.is_identity():
                    twist = None
            self._measures[truncation] = feynman_measure(self.cut, self.diagonal, twist)
        return self._measures[truncation]

    def lagrangian_element(self, truncation: Truncation = Truncation()):
        if not self.lagrangian:
            return None
        return parse_element(self.lagrangian, self.context(truncation))

    def theory(self, truncation: Truncation = Truncation()) -> Optional[InteractingTheory]:
        """Interacting theory (measure, L, cutoff), or None without a Lagrangian."""
        lagrangian = self.lagrangian_element(truncation)
        if lagrangian is None:
            return None
        return InteractingTheory(self.measure(truncation), lagrangian, self.cutoff)

    def field_symmetries(self, truncation: Truncation = Truncation()) -> List[FieldSymmetry]:
        out = []
        for index, spec in enumerate(self.symmetries):
            name = str(spec.get('name', f"g{index + 1}"))
            twist = None
            if spec.get('twist'):
                twist = renormalization_from_dict(self, {'renormalization': spec['twist']}, truncation)
            matrices = {
                str(p): [[self.scalar(v) for v in row] for row in rows]
                for p, rows in (spec.get('matrices') or {}).items()
            }
            permutation = {str(k): str(v) for k, v in (spec.get('permutation') or {}).items()}
            out.append(FieldSymmetry(self.causal, permutation, matrices, twist, name, truncation))
        return out

    def symmetry_group(self, truncation: Truncation = Truncation(),
                       bound: int = 64) -> Tuple[List[FieldSymmetry], bool]:
        """(elements, finite): the closed group, or the generators when closure exceeds the bound."""
        generators = self.field_symmetries(truncation)
        group = closure(generators, bound)
        if group is None:
            return generators, False
        return group, True

    def to_dict(self) -> Dict:
        out = self.causal.to_dict()
        out['propagator'] = [[s[0], s[1], t[0], t[1], str(render_scalar(v))]
                             for (s, t), v in sorted(self.cut.entries.items())]
        out['require_locality'] = self.require_locality
        if self.ring is not None:
            out['couplings'] = {'names': list(self.ring.names), 'order': self.ring.order}
        if self.regulator is not None:
            out['regulator'] = {'name': self.regulator.name, 'order': self.regulator.order}
        if self.lagrangian:
            out['lagrangian'] = self.lagrangian
        return out


def _scalar(value, ring, regulator, where: str) -> Scalar:
    """Scalar from a literal, an expression string or a {exponent: text} Laurent mapping."""
    if isinstance(value, Mapping):
        reg = regulator or Regulator()
        try:
            terms = {int(e): parse_scalar(v, ring=ring, regulator=reg) for e, v in value.items()}
        except ValueError as e:
            raise ModelError(f"{where}: bad Laurent mapping {value!r}: {e}")
        return RegulatorLaurent(reg, terms)
    try:
        return parse_scalar(value, ring=ring, regulator=regulator)
    except ModelError as e:
        raise ModelError(f"{where}: {e}")


def _int_setting(section: Mapping, key: str, where: str, default=None) -> Optional[int]:
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ModelError(f"{where}.{key}: expected a non-negative integer, got {value!r}")
    return value


def parse_model(data: Mapping, source: Optional[str] = None,
                coupling_order: Optional[int] = None,
                regulator_order: Optional[int] = None,
                default_coupling_order: int = 3) -> Model:
    """
    Validate a model mapping.

    Args:
        data: Parsed model file contents
        source: File name used in messages
        coupling_order: Replaces couplings.order when given
        regulator_order: Replaces regulator.order when given
        default_coupling_order: Used when couplings.order is absent

    Returns:
        Model with a validated causal set and cut propagator

    Raises:
        ModelError: the first violated requirement, naming the section
    """
    if not isinstance(data, Mapping):
        raise ModelError("model: top level must be a mapping")
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise ModelError(f"model: unknown sections {unknown}")
    if not data.get('points'):
        raise ModelError("points: at least one point is required")

    order = []
    for pair in data.get('order') or []:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ModelError(f"order: expected pairs [x, y], got {pair!r}")
        order.append((str(pair[0]), str(pair[1])))
    species = data.get('species', ['phi'])
    if isinstance(species, Mapping):
        species = {str(p): [str(s) for s in names] for p, names in species.items()}
    else:
        species = [str(s) for s in species]
    causal = CausalSet.build(
        [str(p) for p in data['points']], order, species,
        close=bool(data.get('close_order', True)),
        allow_preorder=bool(data.get('allow_preorder', False)),
    )

    ring = None
    couplings = data.get('couplings')
    if couplings:
        names = couplings.get('names') or []
        if isinstance(names, str):
            names = [names]
        k = coupling_order if coupling_order is not None else _int_setting(couplings, 'order', 'couplings', default_coupling_order)
        ring = CouplingRing(tuple(str(n) for n in names), k)
    regulator = None
    if data.get('regulator'):
        section = data['regulator']
        reg_order = regulator_order if regulator_order is not None else _int_setting(section, 'order', 'regulator', 8)
        regulator = Regulator(str(section.get('name', 'eps')), reg_order)

    entries = []
    for index, entry in enumerate(data.get('propagator') or []):
        if not isinstance(entry, (list, tuple)) or len(entry) != 5:
            raise ModelError(f"propagator[{index}]: expected [x, species, y, species, value], got {entry!r}")
        x, a, y, b, value = entry
        entries.append((str(x), str(a), str(y), str(b),
                        _scalar(value, ring, regulator, f"propagator[{index}]")))
    cut = CutPropagator.build(causal, entries)

    require_locality = bool(data.get('require_locality', True))
    if require_locality and not cut.is_local:
        s, t = cut.locality_violations()[0]
        raise ModelError(
            f"propagator: not local, Delta{s}{t} = {cut.value(s, t)} but Delta{t}{s} = {cut.value(t, s)}"
        )

    diagonal = {}
    for index, entry in enumerate(data.get('feynman_diagonal') or []):
        if not isinstance(entry, (list, tuple)) or len(entry) != 4:
            raise ModelError(f"feynman_diagonal[{index}]: expected [x, species, species, value], got {entry!r}")
        x, a, b, value = entry
        diagonal[(str(x), tuple(sorted((str(a), str(b)))))] = _scalar(
            value, ring, regulator, f"feynman_diagonal[{index}]")

    truncation = {}
    for key in ('max_sym_degree', 'max_field_degree'):
        value = _int_setting(data.get('truncation') or {}, key, 'truncation')
        if value is not None:
            truncation[key] = value

    cutoff = {}
    for p, value in (data.get('cutoff') or {}).items():
        causal.check_point(str(p))
        cutoff[str(p)] = _scalar(value, ring, regulator, f"cutoff.{p}")

    model = Model(
        causal=causal,
        cut=cut,
        diagonal=diagonal,
        require_locality=require_locality,
        ring=ring,
        regulator=regulator,
        truncation=truncation,
        lagrangian=str(data['lagrangian']) if data.get('lagrangian') else None,
        cutoff=cutoff,
        symmetries=list(data.get('symmetries') or []),
        twist=data.get('twist'),
        description=str(data.get('description', '')),
        source=source,
    )
    if model.lagrangian:
        model.lagrangian_element()
    logger.debug("parsed model %s: %d points, %d propagator entries",
                 source or "<inline>", len(causal.points), len(cut.entries))
    return model


def load_model(path: str, coupling_order: Optional[int] = None,
               regulator_order: Optional[int] = None,
               default_coupling_order: int = 3) -> Model:
    """
    Read and validate a model file.

    Raises:
        FileNotFoundError: path does not exist
        ModelError: syntax error or invalid contents
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Model file not found: {path}")
    with open(path, 'r') as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ModelError(f"{path}: syntax error{where}: {getattr(e, 'problem', e)}")
    return parse_model(data, source=path, coupling_order=coupling_order,
                       regulator_order=regulator_order,
                       default_coupling_order=default_coupling_order)


# =============================================================================
# RENORMALIZATION FILES
# =============================================================================

def renormalization_to_dict(rho: Renormalization) -> Dict:
    entries = rho.to_entries()
    for items in entries.values():
        for item in items:
            item['value'] = render_scalar(item['value'])
    return {'renormalization': entries}


def renormalization_from_dict(model: Model, data: Mapping,
                              truncation: Truncation = Truncation()) -> Renormalization:
    if not isinstance(data, Mapping) or 'renormalization' not in data:
        raise ModelError("renormalization: expected a mapping with a 'renormalization' section")
    entries = {}
    for degree, items in (data['renormalization'] or {}).items():
        parsed = []
        for index, item in enumerate(items or []):
            where = f"renormalization.{degree}[{index}]"
            if not isinstance(item, Mapping) or not {'point', 'monomials', 'value'} <= set(item):
                raise ModelError(f"{where}: expected point, monomials and value")
            parsed.append({
                'point': str(item['point']),
                'monomials': [{str(s): int(k) for s, k in (mono or {}).items()} for mono in item['monomials']],
                'value': _scalar(item['value'], model.ring, model.regulator, where),
            })
        entries[str(degree)] = parsed
    return Renormalization.from_entries(model.causal, entries, truncation)


def load_renormalization(path: str, model: Model,
                         truncation: Truncation = Truncation()) -> Renormalization:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Renormalization file not found: {path}")
    with open(path, 'r') as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ModelError(f"{path}: syntax error: {e}")
    return renormalization_from_dict(model, data, truncation)


def dump_renormalization(rho: Renormalization, path: str) -> None:
    """Write JSON for *.json paths, YAML otherwise."""
    data = renormalization_to_dict(rho)
    with open(path, 'w') as f:
        if path.endswith('.json'):
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
        else:
            yaml.safe_dump(data, f, sort_keys=True)
    logger.info("wrote renormalization to %s", path)
