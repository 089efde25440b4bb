"""
sheaf.py

Sheaves of metric structures: a base space, a fiber structure over every
point, sections defined on open sets and the parametric section families
quantifiers search through. Also holds the resolution knobs and the
three-valued verdict shared by the forcing and generic-model code.
"""
import logging
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Iterable, NamedTuple, Optional, Sequence

from metsheafpy.logic import Fiber, Signature, ValueInterval
from metsheafpy.topology import BaseSpace, OpenSet, meet

LOGGER = logging.getLogger(__name__)


class SheafError(Exception):
    pass


class DomainError(SheafError):
    pass


class WitnessSearchError(SheafError):
    pass


class NeighborhoodError(SheafError):
    pass


@dataclass(frozen=True)
class Resolution:
    """
    Numerical knobs of the forcing search.

    Attributes
    ----------
    grid : int
        Sample points per open set; the finer level uses ``2 * grid + 1``.
    tol : float
        Slack required before universally quantified clauses are certified.
    max_refinement : int
        Depth of cover refinement and of neighbourhood shrinking.
    family_size : int
        Members requested from each section family.
    cells : int
        Pieces an open set is split into at each refinement step.
    gap : float
        Fraction of each cell left out when witnesses are glued.
    radius : float
        Starting radius of point neighbourhoods.
    depth : int
        Filter chain depth.
    seed : int
        Seed of randomised section families and condition generators.
    """
    grid: int = 9
    tol: float = 1e-3
    max_refinement: int = 4
    family_size: int = 64
    cells: int = 2
    gap: float = 0.05
    radius: float = 0.5
    depth: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.grid < 1 or self.family_size < 1 or self.cells < 1 or self.depth < 1:
            raise ValueError('Resolution counts must be positive.')
        if self.tol < 0 or self.max_refinement < 0:
            raise ValueError('Resolution tolerance and refinement must be non-negative.')
        if not 0.0 <= self.gap < 1.0:
            raise ValueError('gap must lie in [0, 1).')

    def updated(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


class Status(Enum):
    FORCED = 'forced'
    REFUTED = 'refuted'
    UNKNOWN = 'unknown'


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of a forcing question.

    ``margin`` is the signed slack of the condition: positive when it holds
    by that much, negative when it fails by that much.
    """
    status: Status
    margin: float
    certificate: Dict = field(default_factory=dict, compare=False)

    @property
    def forced(self):
        return self.status is Status.FORCED

    @property
    def refuted(self):
        return self.status is Status.REFUTED

    @property
    def known(self):
        return self.status is not Status.UNKNOWN

    def flipped(self):
        status = {Status.FORCED: Status.REFUTED,
                  Status.REFUTED: Status.FORCED,
                  Status.UNKNOWN: Status.UNKNOWN}[self.status]
        return Verdict(status, -self.margin, dict(self.certificate, negated=True))

    def summary(self):
        parts = []
        for key in sorted(self.certificate):
            value = self.certificate[key]
            if isinstance(value, (str, int, float, bool)):
                parts.append("{}={}".format(key, value))
            elif isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
                parts.append("{}={}".format(key, '|'.join(value)))
        return ';'.join(parts)


def forced(margin, **certificate):
    return Verdict(Status.FORCED, margin, certificate)


def refuted(margin, **certificate):
    return Verdict(Status.REFUTED, margin, certificate)


def unknown(margin, **certificate):
    return Verdict(Status.UNKNOWN, margin, certificate)


class Section(object):
    """
    A section of the sheaf defined on an open set.

    Parameters
    ----------
    domain : OpenSet
        Where the section is defined.
    evaluator : callable
        Maps a base point to an element of the fiber over it.
    family : str
        Name of the family the section belongs to.
    params : tuple
        Family parameters; together with ``family`` they identify the section.
    sort : str
        ``'element'`` for the quantified sort; real-sort sections return a
        value in [0, 1] and are referenced by name as nullary atoms.
    name : str, optional
        Label used in certificates.
    """

    def __init__(self, domain: OpenSet, evaluator: Callable, family='catalog', params=(),
                 sort='element', name=None):
        if domain is None:
            raise DomainError('A section needs a nonempty domain.')
        self.domain = domain
        self.evaluator = evaluator
        self.family = family
        self.params = tuple(params)
        self.sort = sort
        self.name = name

    def __call__(self, x):
        if not self.domain.contains(x):
            raise DomainError("{} is not defined at {!r}".format(self.label, x))
        return self.evaluator(x)

    @property
    def key(self):
        return (self.family, self.params)

    @property
    def label(self):
        if self.name:
            return self.name
        params = ','.join(_short(p) for p in self.params)
        return "{}({})".format(self.family, params)

    def restrict(self, V: OpenSet):
        W = meet(self.domain, V) if V is not None else None
        if W is None:
            raise DomainError("{} restricted to an empty set".format(self.label))
        return Section(W, self.evaluator, self.family, self.params, self.sort, self.name)

    def __repr__(self):
        return "Section({})".format(self.label)


def _short(value):
    if isinstance(value, float):
        return "{:.6g}".format(value)
    if isinstance(value, complex):
        return "{:.6g}{:+.6g}j".format(value.real, value.imag)
    return str(value)


class CandidateSet(NamedTuple):
    """
    Sections offered to a quantifier. At every point of the set asked about,
    each section of the sort is within ``radius`` of some candidate; a radius
    of 0 means the list is exhaustive and ``inf`` means no guarantee.
    """
    sections: tuple
    radius: float


class SectionFamily(object):
    name = 'family'
    sort = 'element'

    def candidates(self, U: OpenSet, res: Resolution, anchors: Sequence[Section] = ()) -> CandidateSet:
        raise NotImplementedError


class CatalogFamily(SectionFamily):
    """A fixed list of sections; the radius is whatever the caller can promise."""

    def __init__(self, sections, radius=math.inf, name='catalog', sort='element'):
        self.sections = tuple(sections)
        self.radius = radius
        self.name = name
        self.sort = sort

    def candidates(self, U, res, anchors=()):
        out = []
        for sec in self.sections:
            if sec.domain.includes(U):
                out.append(sec)
        return CandidateSet(tuple(out), self.radius)


class MetricSheaf(object):
    """
    A sheaf of metric structures.

    Parameters
    ----------
    base : BaseSpace
        The base space.
    fiber : callable
        Maps a base point to its Fiber. Results are cached per point.
    signature : Signature
        Shared signature with Lipschitz moduli.
    families : iterable of SectionFamily
        Families quantifiers search through.
    name : str
        Label used in reports.
    catalog : dict, optional
        Named sections a scenario can refer to.
    sort : str
        Sort quantifiers range over.
    """

    def __init__(self, base: BaseSpace, fiber: Callable, signature: Signature,
                 families: Iterable[SectionFamily] = (), name='sheaf', catalog=None,
                 sort='element'):
        self.base = base
        self._fiber = fiber
        self.signature = signature
        self.families = list(families)
        self.name = name
        self.catalog = dict(catalog or {})
        self.sort = sort
        self._fibers = {}

    def fiber(self, x) -> Fiber:
        try:
            return self._fibers[x]
        except KeyError:
            fiber = self._fiber(x)
            self._fibers[x] = fiber
            return fiber
        except TypeError:
            return self._fiber(x)

    def section(self, name):
        try:
            return self.catalog[name]
        except KeyError:
            raise SheafError("unknown section '{}' in sheaf {}".format(name, self.name)) from None

    def candidates(self, U: OpenSet, res: Resolution, anchors: Sequence[Section] = ()) -> CandidateSet:
        """
        Bound sections defined on ``U`` first, then members of every family.
        The covering radius is the best one any family promises.
        """
        sections = []
        seen = set()
        for sec in anchors:
            if sec.sort == self.sort and sec.domain.includes(U) and sec.key not in seen:
                seen.add(sec.key)
                sections.append(sec)
        radius = math.inf
        for family in self.families:
            if family.sort != self.sort:
                continue
            found = family.candidates(U, res, anchors)
            radius = min(radius, found.radius)
            for sec in found.sections:
                if sec.key not in seen:
                    seen.add(sec.key)
                    sections.append(sec)
        return CandidateSet(tuple(sections), radius)

    def moduli(self, eps):
        """Moduli of uniform continuity of every symbol at ``eps``."""
        out = {}
        for sym in list(self.signature.relations.values()) + list(self.signature.functions.values()):
            out[sym.name] = sym.modulus(eps)
        return out

    def spot_check(self, res: Optional[Resolution] = None, points=None):
        """
        Check the fiber metric on sampled triples: values in [0, 1],
        symmetry, zero on the diagonal and the triangle inequality.

        Raises
        ------
        SheafError
            On the first violated axiom.
        """
        res = res or Resolution()
        rng = random.Random(res.seed)
        points = points if points is not None else self.base.whole().sample(res.grid)
        for x in points:
            fiber = self.fiber(x)
            elements = list(fiber.sample(res.family_size).elements)
            if len(elements) < 3:
                continue
            for _ in range(res.family_size):
                a, b, c = rng.sample(elements, 3)
                dab, dbc, dac = fiber.distance(a, b), fiber.distance(b, c), fiber.distance(a, c)
                if not (0.0 <= dab <= 1.0 + 1e-12):
                    raise SheafError("distance {} outside [0, 1] at {!r}".format(dab, x))
                if abs(dab - fiber.distance(b, a)) > 1e-12 or fiber.distance(a, a) > 1e-12:
                    raise SheafError("asymmetric distance at {!r}".format(x))
                if dac > dab + dbc + 1e-9:
                    raise SheafError("triangle inequality fails at {!r}".format(x))
        return True

    def __repr__(self):
        return "MetricSheaf({}, base={!r})".format(self.name, self.base)


def values_at(binding: Dict[str, Section], x):
    return {var: sec(x) for var, sec in binding.items()}


def binding_key(binding: Dict[str, Section]):
    """Memo key of a binding. Holds the sections themselves so their identities stay unique."""
    return tuple(sorted(binding.items(), key=lambda item: item[0]))


def common_domain(sheaf: MetricSheaf, binding: Dict[str, Section]):
    sets = [sheaf.base.whole()] + [sec.domain for sec in binding.values()]
    return meet(*sets)


def compare(value: ValueInterval, comparator: str, eps: float, **certificate) -> Verdict:
    """
    Three-valued comparison of an enclosed value with a strict threshold.

    Example
    -------
    >>> compare(ValueInterval(0.2, 0.3), '<', 0.5).status
    <Status.FORCED: 'forced'>
    >>> compare(ValueInterval(0.2, 0.6), '<', 0.5).status
    <Status.UNKNOWN: 'unknown'>
    """
    if comparator == '<':
        if value.upper < eps:
            return forced(eps - value.upper, **certificate)
        if value.lower >= eps:
            return refuted(eps - value.lower, **certificate)
        return unknown(eps - value.midpoint, **certificate)
    if value.lower > eps:
        return forced(value.lower - eps, **certificate)
    if value.upper <= eps:
        return refuted(value.upper - eps, **certificate)
    return unknown(value.midpoint - eps, **certificate)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
