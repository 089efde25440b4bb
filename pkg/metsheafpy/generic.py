"""
generic.py

The section pseudometric along a filter chain, the generic model obtained as
the quotient of sections by that pseudometric, and the cross-check of the
generic model's theory against local forcing on the chain elements.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from metsheafpy.forcing import force_local, strict_form
from metsheafpy.logic import (AtomDist, AtomRel, Condition, Const, Half, Inf, Max, Min, Negation,
                              Sup, TruncSub, ValueInterval, clamped, eval_formula,
                              format_condition, lipschitz_bound)
from metsheafpy.sheaf import (MetricSheaf, Resolution, Section, SheafError, Verdict, binding_key,
                              common_domain, compare, unknown, values_at)
from metsheafpy.topology import FilterChain, FilterError, meet

LOGGER = logging.getLogger(__name__)


def _points(U, res):
    coarse = U.sample(res.grid)
    return coarse + [y for y in U.sample(2 * res.grid + 1) if y not in coarse]


def rho_profile(sheaf: MetricSheaf, chain: FilterChain, sigma: Section, mu: Section,
                res: Optional[Resolution] = None) -> List[float]:
    """
    Running minimum of ``sup_{x in U_k} d_x(sigma(x), mu(x))`` over the chain,
    one entry per chain element; nonincreasing by construction.

    Raises
    ------
    FilterError
        Some chain element misses the common domain of the two sections.
    """
    res = res or Resolution()
    best = math.inf
    out = []
    for k, U in enumerate(chain, 1):
        V = meet(U, sigma.domain, mu.domain)
        points = _points(V, res) if V is not None else []
        if not points:
            raise FilterError("chain element {} misses the domains of {} and {}".format(
                k, sigma.label, mu.label))
        sup = max(sheaf.fiber(x).distance(sigma(x), mu(x)) for x in points)
        best = min(best, sup)
        out.append(best)
    return out


def pseudometric_rho(sheaf: MetricSheaf, chain: FilterChain, sigma: Section, mu: Section,
                     res: Optional[Resolution] = None) -> float:
    """
    Chain-truncated ``rho_F(sigma, mu) = inf_U sup_{x in U} d_x(sigma(x), mu(x))``.

    Parameters
    ----------
    sheaf : MetricSheaf
        The sheaf.
    chain : FilterChain
        Generating chain of the filter; its depth is the truncation depth.
    sigma, mu : Section
        Sections whose domains meet every chain element.
    res : Resolution
        Sampling knobs.

    Returns
    -------
    float
        Value in [0, 1].
    """
    return rho_profile(sheaf, chain, sigma, mu, res)[-1]


class _UnionFind(object):
    def __init__(self, items):
        self.parent = {item: item for item in items}

    def find(self, item):
        while self.parent[item] != item:
            self.parent[item] = self.parent[self.parent[item]]
            item = self.parent[item]
        return item

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


class GenericModel(object):
    """
    Quotient of a set of sections by ``rho_F < tol`` along a filter chain.

    Atomic values of classes are the chain limit of suprema of the fiber
    values, enclosed in ``[inf over U_K, min_k sup over U_k]``. Quantifiers
    range over the listed sections and the sheaf's families on the first
    chain element, widened by the family covering radius.
    """

    def __init__(self, sheaf: MetricSheaf, chain: FilterChain, sections: Dict[str, Section],
                 res: Resolution):
        self.sheaf = sheaf
        self.chain = chain
        self.sections = dict(sections)
        self.res = res
        names = list(self.sections)
        self._rho = {}
        uf = _UnionFind(names)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if self.rho(a, b) < res.tol:
                    uf.union(a, b)
        groups = {}
        for name in names:
            groups.setdefault(uf.find(name), []).append(name)
        self.classes = list(groups.values())
        self._atoms = {}
        LOGGER.info("generic model of %s: %d sections, %d classes", sheaf.name, len(names),
                    len(self.classes))

    def __len__(self):
        return len(self.classes)

    def rho(self, a, b):
        key = (a, b) if a <= b else (b, a)
        if key not in self._rho:
            self._rho[key] = pseudometric_rho(self.sheaf, self.chain, self.sections[a],
                                              self.sections[b], self.res)
        return self._rho[key]

    def class_of(self, name):
        for index, group in enumerate(self.classes):
            if name in group:
                return index
        raise SheafError("section '{}' is not in the generic model".format(name))

    def distance(self, a, b):
        """Quotient metric between the classes of two listed sections."""
        return self.rho(a, b)

    def _resolve(self, binding):
        out = {}
        for var, sec in binding.items():
            out[var] = self.sections[sec] if isinstance(sec, str) else sec
        return out

    def atom_value(self, formula, binding) -> ValueInterval:
        key = (formula, binding_key(binding))
        if key in self._atoms:
            return self._atoms[key]
        sups = []
        inf_last = None
        for k, U in enumerate(self.chain, 1):
            V = meet(U, common_domain(self.sheaf, binding))
            points = _points(V, self.res) if V is not None else []
            if not points:
                raise FilterError("chain element {} misses the bound section domains".format(k))
            values = []
            for x in points:
                fiber = self.sheaf.fiber(x)
                values.append(eval_formula(fiber, formula, values_at(binding, x), self.res.family_size))
            sups.append(max(v.upper for v in values))
            inf_last = min(v.lower for v in values)
        upper = min(sups)
        out = ValueInterval(min(inf_last, upper), upper)
        self._atoms[key] = out
        return out

    def value(self, formula, binding=None) -> ValueInterval:
        """Enclosure of the value of ``formula`` in the generic model."""
        return self._value(formula, self._resolve(binding or {}))

    def _value(self, f, b):
        if isinstance(f, Const):
            return ValueInterval(f.value, f.value)
        if isinstance(f, (AtomDist, AtomRel)):
            return self.atom_value(f, b)
        if isinstance(f, Half):
            v = self._value(f.arg, b)
            return ValueInterval(0.5 * v.lower, 0.5 * v.upper)
        if isinstance(f, Negation):
            v = self._value(f.arg, b)
            return ValueInterval(1.0 - v.upper, 1.0 - v.lower)
        if isinstance(f, (TruncSub, Max, Min)):
            a, c = self._value(f.left, b), self._value(f.right, b)
            if isinstance(f, TruncSub):
                return clamped(a.lower - c.upper, a.upper - c.lower)
            if isinstance(f, Max):
                return ValueInterval(max(a.lower, c.lower), max(a.upper, c.upper))
            return ValueInterval(min(a.lower, c.lower), min(a.upper, c.upper))
        U = meet(self.chain.element(1), common_domain(self.sheaf, b))
        if U is None:
            return ValueInterval.unknown()
        found = self.sheaf.candidates(U, self.res, list(self.sections.values()) + list(b.values()))
        if not found.sections:
            return ValueInterval.unknown()
        values = [self._value(f.body, dict(b, **{f.var: sec})) for sec in found.sections]
        lipschitz = lipschitz_bound(f.body, f.var, self.sheaf.signature)
        slack = 0.0 if found.radius == 0 else lipschitz * found.radius
        if math.isnan(slack) or math.isinf(slack):
            slack = 1.0
        if isinstance(f, Inf):
            return clamped(min(v.lower for v in values) - slack, min(v.upper for v in values))
        return clamped(max(v.lower for v in values), max(v.upper for v in values) + slack)

    def satisfies(self, cond: Condition, binding=None) -> Verdict:
        """Three-valued ``A[F] |= cond``; non-strict conditions negate the opposite strict one."""
        comparator, negate = strict_form(cond)
        verdict = compare(self.value(cond.formula, binding), comparator, cond.threshold,
                          side='generic')
        return verdict.flipped() if negate else verdict


def build_generic_model(sheaf: MetricSheaf, chain: FilterChain, sections, res: Optional[Resolution] = None):
    """
    Build the generic model from the listed sections.

    Parameters
    ----------
    sheaf : MetricSheaf
        The sheaf.
    chain : FilterChain
        Generating chain of the filter.
    sections : dict or sequence
        Named sections, or a sequence labelled by their ``label``.
    res : Resolution
        Sampling knobs; ``tol`` decides when two sections share a class.

    Raises
    ------
    FilterError
        A section's domain does not belong to the filter.
    """
    res = res or Resolution()
    if not isinstance(sections, dict):
        sections = {sec.label: sec for sec in sections}
    for name, sec in sections.items():
        if not chain.in_filter(sec.domain):
            raise FilterError("domain of section '{}' is not in the filter".format(name))
    if not sheaf.base.regular:
        LOGGER.warning("generic model over the non-regular base of %s; completeness is not expected",
                       sheaf.name)
    return GenericModel(sheaf, chain, sections, res)


@dataclass
class CrossCheck:
    """Outcome of comparing generic-model satisfaction with forcing on the chain."""
    condition: str
    generic: Verdict
    forcing: Verdict
    outcome: str
    forced_at: Optional[int] = None
    local: List[Verdict] = field(default_factory=list)


def gmt_crosscheck(sheaf: MetricSheaf, chain: FilterChain, cond: Condition, binding=None,
                   res: Optional[Resolution] = None, model: Optional[GenericModel] = None) -> CrossCheck:
    """
    Evaluate ``A[F] |= cond`` and ``exists U_k . A ||-_{U_k} cond``
    independently and classify the pair as agree, disagree or inconclusive.

    The forcing side is FORCED when some chain element forces the condition
    and REFUTED when every chain element refutes it. UNKNOWN on either side is
    inconclusive, never a disagreement.
    """
    res = res or Resolution()
    binding = dict(binding or {})
    if model is None:
        model = build_generic_model(sheaf, chain, {v: s for v, s in binding.items()}, res)
    generic = model.satisfies(cond, binding)
    domain = common_domain(sheaf, binding)
    local = []
    forced_at = None
    for k, U in enumerate(chain, 1):
        V = meet(U, domain)
        if V is None:
            raise FilterError("chain element {} misses the bound section domains".format(k))
        v = force_local(sheaf, V, cond, binding, res)
        local.append(v)
        if v.forced:
            forced_at = k
            break
    if forced_at is not None:
        forcing = local[-1]
    elif all(v.refuted for v in local):
        forcing = local[-1]
    else:
        forcing = unknown(max(v.margin for v in local))
    if not generic.known or not forcing.known:
        outcome = 'inconclusive'
    elif generic.status is forcing.status:
        outcome = 'agree'
    else:
        outcome = 'disagree'
        LOGGER.warning("generic model and forcing disagree on '%s'", format_condition(cond))
    return CrossCheck(format_condition(cond), generic, forcing, outcome, forced_at, local)


@dataclass
class CauchyReport:
    distances: List[float]
    limit_class: int
    converged: bool


def cauchy_class_limit(model: GenericModel, names: Sequence[str], limit: Optional[str] = None) -> CauchyReport:
    """
    Check that the listed sections approach one class of the quotient.

    ``distances[n]`` is ``rho(names[n], limit)``; the family converges when
    these are nonincreasing up to ``tol`` and end below ``tol``. The limit
    defaults to the last listed section.
    """
    if not names:
        raise ValueError('A Cauchy family needs at least one section.')
    limit = limit if limit is not None else names[-1]
    distances = [model.rho(name, limit) for name in names]
    tol = model.res.tol
    monotone = all(b <= a + tol for a, b in zip(distances, distances[1:]))
    return CauchyReport(distances, model.class_of(limit), monotone and distances[-1] < tol)
