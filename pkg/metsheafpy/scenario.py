"""
scenario.py

Scenario files for the console scripts: plain ``key = value`` INI text.

- ``[scenario]``: ``sheaf`` (torus, lattice, parametric or packet),
  ``format`` and ``seed``.
- ``[sheaf]``: parameters of the selected sheaf.
- ``[resolution]``: fields of :class:`~metsheafpy.sheaf.Resolution`.
- ``[sections]``: ``name = kind; key = value; ...``.
- ``[conditions]``: ``name = condition @ location`` with an optional
  ``=> forced`` or ``=> refuted`` expectation.
- ``[chain]``: ``kind`` (shrink, grow, arcs or cones), ``depth``, ``center``.
- ``[propagator]``: ``x1``, ``x0``, ``t`` and ``tau`` lists, ``hbar``, ``m``.
- ``[delta]``: ``tau`` list and test ``function``.
- ``[gmt]``: ``count``, ``depth`` and the ``sections`` random conditions use.
"""
import configparser
import logging
import math
from dataclasses import dataclass, fields
from typing import Dict, List, Optional

from metsheafpy.logic import AtomRel, free_variables, parse_condition, walk
from metsheafpy.projective import (LatticeSheafSpec, ParametricOperatorSpec, build_lattice_sheaf,
                                   build_parametric_sheaf, read_operator)
from metsheafpy.report import FORMATS
from metsheafpy.sheaf import Resolution
from metsheafpy.topology import Arc, Cone, FilterChain, Interval
from metsheafpy.torus import integral_curve, torus_sheaf
from metsheafpy.utilis import parse_complex, parse_floats
from metsheafpy.wavepacket import PacketSheafSpec, PhysicalConstants, build_packet_sheaf, packet_section

LOGGER = logging.getLogger(__name__)

SHEAVES = ('torus', 'lattice', 'parametric', 'packet')


class ScenarioError(ValueError):
    """Invalid scenario; ``line`` is the 1-based line in the file when known."""

    def __init__(self, msg, line=None):
        super().__init__(msg)
        self.msg = msg
        self.line = line

    def __str__(self):
        if self.line is None:
            return self.msg
        return "line {}: {}".format(self.line, self.msg)


@dataclass
class ConditionItem:
    name: str
    text: str
    location: Optional[str]
    expect: Optional[str]
    line: Optional[int]


@dataclass
class Scenario:
    """A loaded scenario: the sheaf with its catalog and every run setting."""
    kind: str
    sheaf: object
    res: Resolution
    fmt: str
    seed: int
    conditions: List[ConditionItem]
    config: configparser.ConfigParser
    lines: Dict

    def line_of(self, section, key=None):
        return self.lines.get((section, key))

    def section(self, name):
        return self.config[name] if self.config.has_section(name) else {}

    def condition(self, item: ConditionItem):
        """Parse the text of ``item`` against the sheaf signature."""
        real = [n for n, s in self.sheaf.catalog.items() if s.sort == 'real']
        return parse_condition(item.text, self.sheaf.signature, real)

    def binding(self, cond):
        """Catalog sections for the free variables and real-sort atoms of ``cond``."""
        names = set(free_variables(cond.formula, self.sheaf.signature))
        for node in walk(cond.formula):
            if isinstance(node, AtomRel) and not node.args and node.name in self.sheaf.catalog:
                names.add(node.name)
        missing = sorted(n for n in names if n not in self.sheaf.catalog)
        if missing:
            raise ScenarioError("unknown section(s) {} in sheaf {}".format(', '.join(missing), self.kind))
        return {n: self.sheaf.catalog[n] for n in sorted(names)}

    def location(self, text):
        """
        Read ``point x``, ``interval a b``, ``arc start length``,
        ``cone i j ...`` or ``whole``; ``chain`` is returned as is.
        """
        tokens = text.split()
        if not tokens:
            raise ScenarioError('empty location')
        head, rest = tokens[0], tokens[1:]
        try:
            if head == 'point':
                if self.kind == 'lattice':
                    return frozenset(int(v) for v in rest)
                return float(rest[0])
            if head == 'interval':
                return Interval(float(rest[0]), float(rest[1]))
            if head == 'arc':
                return Arc(float(rest[0]), float(rest[1]))
            if head == 'cone':
                return Cone(frozenset(int(v) for v in rest), frozenset(self.sheaf.spec.universe))
            if head == 'whole':
                return self.sheaf.base.whole()
            if head == 'chain':
                return 'chain'
        except (IndexError, ValueError, AttributeError) as err:
            raise ScenarioError("cannot read location '{}': {}".format(text, err)) from None
        raise ScenarioError("unknown location kind '{}'".format(head))

    def chain(self):
        """The filter chain of the ``[chain]`` section."""
        cfg = self.section('chain')
        kind = cfg.get('kind', {'torus': 'arcs', 'lattice': 'cones'}.get(self.kind, 'shrink'))
        depth = int(cfg.get('depth', self.res.depth))
        line = self.line_of('chain', 'kind')
        if kind == 'shrink':
            return FilterChain.shrink_to_zero(depth)
        if kind == 'grow':
            return FilterChain.grow(depth)
        if kind == 'arcs':
            return FilterChain.arcs(float(cfg.get('center', 0.0)), depth)
        if kind == 'cones':
            return FilterChain.cones(self.sheaf.spec.universe, depth)
        raise ScenarioError("unknown chain kind '{}'".format(kind), line)


def _line_numbers(text):
    lines = {}
    current = None
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in '#;':
            continue
        if line.startswith('[') and line.endswith(']'):
            current = line[1:-1].strip()
            lines[(current, None)] = number
        elif current is not None and ('=' in line or ':' in line):
            key = line.split('=', 1)[0].split(':', 1)[0].strip().lower()
            lines.setdefault((current, key), number)
    return lines


def _fields(spec_text):
    parts = [p.strip() for p in spec_text.split(';')]
    kind, options = parts[0], {}
    for part in parts[1:]:
        if not part:
            continue
        if '=' not in part:
            raise ValueError("expected key = value, got '{}'".format(part))
        key, value = part.split('=', 1)
        options[key.strip()] = value.strip()
    return kind, options


def _complex_list(text):
    return [parse_complex(item) for item in text.split(',') if item.strip()]


def _resolution(config, lines, overrides):
    values = {}
    if config.has_section('resolution'):
        types = {f.name: f.type for f in fields(Resolution)}
        for key, raw in config['resolution'].items():
            if key not in types:
                raise ScenarioError("unknown resolution key '{}'".format(key), lines.get(('resolution', key)))
            try:
                values[key] = float(raw) if types[key] in (float, 'float') else int(raw)
            except ValueError:
                raise ScenarioError("cannot read {} = {}".format(key, raw),
                                    lines.get(('resolution', key))) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Resolution(**values)
    except ValueError as err:
        raise ScenarioError(str(err), lines.get(('resolution', None))) from None


def _torus(cfg, sections):
    slope = int(cfg.get('slope', 1))
    catalog = {}
    for name, (kind, opts) in sections.items():
        if kind != 'curve':
            raise ValueError("torus sections are curves, got '{}'".format(kind))
        catalog[name] = integral_curve(float(opts.get('offset', 0.0)), int(opts.get('slope', slope)),
                                       name=name)
    return torus_sheaf(slope, catalog)


def _lattice(cfg, sections, seed):
    if 'matrix' in cfg:
        spec = LatticeSheafSpec(read_operator(cfg['matrix']), seed=seed)
    else:
        spec = LatticeSheafSpec.diagonal(parse_floats(cfg.get('diagonal', '1, 2, 3')), seed=seed)
    catalog = {}
    for name, (kind, opts) in sections.items():
        if kind == 'eigen':
            catalog[name] = spec.eigen_section(int(opts['index']), name=name)
        elif kind in ('ray', 'value'):
            root = frozenset(int(v) for v in opts['root'].split())
            coeffs = _complex_list(opts['coeffs'])
            make = spec.ray_section if kind == 'ray' else spec.value_section
            catalog[name] = make(root, coeffs, name=name)
        else:
            raise ValueError("unknown lattice section kind '{}'".format(kind))
    return build_lattice_sheaf(spec, catalog)


def _parametric(cfg, sections, seed):
    interval = tuple(parse_floats(cfg.get('interval', '0, 1')))
    spec = ParametricOperatorSpec(parse_floats(cfg.get('diagonal', '1, 2')), interval=interval, seed=seed)
    catalog = {}
    for name, (kind, opts) in sections.items():
        if kind == 'eigen':
            catalog[name] = spec.eigen_section(int(opts['index']), name=name)
        elif kind == 'ray':
            catalog[name] = spec.ray_section(_complex_list(opts['coeffs']), name=name)
        elif kind == 'value':
            catalog[name] = spec.value_section(_complex_list(opts['coeffs']), name=name)
        else:
            raise ValueError("unknown parametric section kind '{}'".format(kind))
    return build_parametric_sheaf(spec, catalog)


def physical_constants(cfg):
    return PhysicalConstants(float(cfg.get('hbar', 1.0)), float(cfg.get('m', cfg.get('mass', 1.0))))


def _packet(cfg, sections):
    span = tuple(parse_floats(cfg.get('span', '-2, 2')))
    spec = PacketSheafSpec(physical_constants(cfg), float(cfg.get('evolve_time', 1.0)), span)
    catalog = {}
    for name, (kind, opts) in sections.items():
        if kind != 'packet':
            raise ValueError("packet sections are packets, got '{}'".format(kind))
        catalog[name] = packet_section(_complex_list(opts.get('coeffs', '1')), float(opts.get('center', 0.0)),
                                       float(opts.get('dual', 0.0)), parse_complex(opts.get('t', '0')),
                                       spec, name=name)
    return build_packet_sheaf(spec, catalog)


def _conditions(config, lines):
    items = []
    if not config.has_section('conditions'):
        return items
    for name, raw in config['conditions'].items():
        text, expect = raw, None
        if '=>' in text:
            text, expect = [p.strip() for p in text.rsplit('=>', 1)]
            if expect not in ('forced', 'refuted'):
                raise ScenarioError("expected outcome must be forced or refuted, got '{}'".format(expect),
                                    lines.get(('conditions', name)))
        location = None
        if '@' in text:
            text, location = [p.strip() for p in text.rsplit('@', 1)]
        items.append(ConditionItem(name, text.strip(), location, expect, lines.get(('conditions', name))))
    return items


def load_scenario(text, overrides=None) -> Scenario:
    """
    Build a :class:`Scenario` from INI text.

    Parameters
    ----------
    text : str
        Contents of the scenario file.
    overrides : dict, optional
        ``format``, ``seed``, ``tol`` and ``depth`` values taking precedence
        over the file.

    Raises
    ------
    ScenarioError
        With the offending line number when one is known.

    Example
    -------
    >>> sc = load_scenario("[scenario]\\nsheaf = torus\\n[sections]\\ns = curve; offset = 0.5\\n")
    >>> sc.kind, sorted(sc.sheaf.catalog)
    ('torus', ['s'])
    """
    overrides = dict(overrides or {})
    config = configparser.ConfigParser(interpolation=None)
    try:
        config.read_string(text)
    except configparser.DuplicateOptionError as err:
        raise ScenarioError("duplicate key '{}'".format(err.option), err.lineno) from None
    except configparser.DuplicateSectionError as err:
        raise ScenarioError("duplicate section '{}'".format(err.section), err.lineno) from None
    except configparser.ParsingError as err:
        line = err.errors[0][0] if err.errors else None
        raise ScenarioError('malformed scenario text', line) from None
    except configparser.Error as err:
        raise ScenarioError(str(err)) from None
    lines = _line_numbers(text)
    head = config['scenario'] if config.has_section('scenario') else {}
    kind = head.get('sheaf', 'torus').strip()
    if kind not in SHEAVES:
        raise ScenarioError("unknown sheaf '{}'".format(kind), lines.get(('scenario', 'sheaf')))
    fmt = overrides.pop('format', None) or head.get('format', 'csv')
    if fmt not in FORMATS:
        raise ScenarioError("unknown format '{}'".format(fmt), lines.get(('scenario', 'format')))
    seed = overrides.get('seed')
    if seed is None:
        seed = int(head.get('seed', 0))
    overrides['seed'] = seed
    res = _resolution(config, lines, overrides)

    sections = {}
    if config.has_section('sections'):
        for name, raw in config['sections'].items():
            try:
                sections[name] = _fields(raw)
            except ValueError as err:
                raise ScenarioError(str(err), lines.get(('sections', name))) from None
    cfg = config['sheaf'] if config.has_section('sheaf') else {}
    try:
        if kind == 'torus':
            sheaf = _torus(cfg, sections)
        elif kind == 'lattice':
            sheaf = _lattice(cfg, sections, seed)
        elif kind == 'parametric':
            sheaf = _parametric(cfg, sections, seed)
        else:
            sheaf = _packet(cfg, sections)
    except (KeyError, ValueError) as err:
        raise ScenarioError("cannot build the {} sheaf: {}".format(kind, err),
                            lines.get(('sections', None)) or lines.get(('sheaf', None))) from None
    LOGGER.info("loaded %s scenario with %d sections", kind, len(sheaf.catalog))
    return Scenario(kind, sheaf, res, fmt, seed, _conditions(config, lines), config, lines)


def read_scenario(path, overrides=None) -> Scenario:
    """Load a scenario file."""
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as err:
        raise ScenarioError("cannot read {}: {}".format(path, err.strerror)) from None
    return load_scenario(text, overrides)


def float_list(scenario, section, key, default):
    """Comma separated reals of ``[section] key``."""
    raw = scenario.section(section).get(key, default)
    try:
        values = parse_floats(raw)
    except ValueError:
        raise ScenarioError("cannot read {} = {}".format(key, raw), scenario.line_of(section, key)) from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ScenarioError("{} needs finite values".format(key), scenario.line_of(section, key))
    return values


if __name__ == "__main__":
    import doctest
    doctest.testmod()
