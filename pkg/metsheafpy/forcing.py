"""
forcing.py

Point forcing and local forcing of conditions over a metric sheaf, the
truth-continuity neighbourhood search and the maximum-principle witness.

Verdicts are three-valued. Atomic values come from the fibers as exact
enclosures; quantifier clauses search the sheaf's section families, and
universally quantified clauses are certified only when the smallest sampled
margin exceeds the family covering radius times the Lipschitz bound of the
body, plus ``Resolution.tol``.
"""
import logging
import math
from typing import Dict, Optional

from metsheafpy.logic import (AtomDist, AtomRel, Condition, Const, Half, Inf, Max, Min, Negation,
                              Sup, TruncSub, UnboundVariableError, eval_formula, format_condition,
                              free_variables, is_restricted, lipschitz_bound)
from metsheafpy.sheaf import (DomainError, MetricSheaf, NeighborhoodError, Resolution, Section,
                              Verdict, WitnessSearchError, binding_key, common_domain, compare, forced,
                              refuted, unknown, values_at)
from metsheafpy.topology import OpenSet, OpenUnion, meet

LOGGER = logging.getLogger(__name__)

ATOMS = (Const, AtomDist, AtomRel)


def _dual(comparator):
    return '>' if comparator == '<' else '<'


def _trivial(comparator, eps):
    if comparator == '<':
        if eps > 1.0:
            return forced(eps - 1.0, clause='trivial')
        if eps <= 0.0:
            return refuted(eps, clause='trivial')
    else:
        if eps < 0.0:
            return forced(-eps, clause='trivial')
        if eps >= 1.0:
            return refuted(1.0 - eps, clause='trivial')
    return None


def _all(thunks, clause):
    """Conjunction of lazily evaluated verdicts."""
    seen = []
    for thunk in thunks:
        v = thunk()
        if v.refuted:
            return refuted(v.margin, clause=clause)
        seen.append(v)
    margin = min(v.margin for v in seen)
    if all(v.forced for v in seen):
        return forced(margin, clause=clause)
    return unknown(margin, clause=clause)


def _any(thunks, clause):
    """Disjunction of lazily evaluated verdicts."""
    seen = []
    for thunk in thunks:
        v = thunk()
        if v.forced:
            return forced(v.margin, clause=clause)
        seen.append(v)
    margin = max(v.margin for v in seen)
    if all(v.refuted for v in seen):
        return refuted(margin, clause=clause)
    return unknown(margin, clause=clause)


def _slack(lipschitz, radius):
    if radius == 0:
        return 0.0
    if math.isinf(radius) or math.isinf(lipschitz):
        return math.inf
    return lipschitz * radius


class Forcer(object):
    """
    Evaluates point and local forcing for one sheaf, resolution and binding.

    The bound sections of the top-level call are the anchors offered first to
    every quantifier. Candidate lists and verdicts are memoised per call.
    """

    def __init__(self, sheaf: MetricSheaf, res: Resolution, binding: Dict[str, Section]):
        self.sheaf = sheaf
        self.res = res
        self.signature = sheaf.signature
        self.anchors = tuple(binding.values())
        self._candidates = {}
        self._points = {}
        self._values = {}

    # -- shared helpers -------------------------------------------------

    def value(self, formula, x, binding):
        key = (formula, x, binding_key(binding))
        try:
            return self._values[key]
        except (KeyError, TypeError):
            pass
        out = eval_formula(self.sheaf.fiber(x), formula, values_at(binding, x), self.res.family_size)
        try:
            self._values[key] = out
        except TypeError:
            pass
        return out

    def candidates_at(self, x):
        try:
            return self._candidates[x]
        except KeyError:
            pass
        U = self.sheaf.base.around(x, self.res.radius * 2.0 ** -self.res.max_refinement)
        anchors = [sec for sec in self.anchors if sec.domain.contains(x)]
        found = self.sheaf.candidates(U, self.res, anchors)
        self._candidates[x] = found
        return found

    def candidates_on(self, U):
        anchors = [sec for sec in self.anchors if sec.domain.includes(U)]
        return self.sheaf.candidates(U, self.res, anchors)

    def samples(self, U):
        coarse = U.sample(self.res.grid)
        fine = [y for y in U.sample(2 * self.res.grid + 1) if y not in coarse]
        return coarse, fine

    # -- point forcing --------------------------------------------------

    def point(self, formula, comparator, eps, x, binding) -> Verdict:
        key = (formula, comparator, eps, x, binding_key(binding))
        cached = self._points.get(key)
        if cached is not None:
            return cached
        out = self._point(formula, comparator, eps, x, binding)
        self._points[key] = out
        return out

    def _point(self, f, cmp, eps, x, b):
        trivial = _trivial(cmp, eps)
        if trivial is not None:
            return trivial
        if isinstance(f, ATOMS):
            return compare(self.value(f, x, b), cmp, eps, clause='atomic')
        if isinstance(f, Half):
            v = self.point(f.arg, cmp, 2.0 * eps, x, b)
            return Verdict(v.status, 0.5 * v.margin, {'clause': 'half'})
        if isinstance(f, Negation):
            v = self.point(f.arg, _dual(cmp), 1.0 - eps, x, b)
            return Verdict(v.status, v.margin, {'clause': 'negation'})
        if isinstance(f, (Max, Min)):
            left = lambda: self.point(f.left, cmp, eps, x, b)
            right = lambda: self.point(f.right, cmp, eps, x, b)
            conjunctive = (cmp == '<') == isinstance(f, Max)
            clause = type(f).__name__.lower()
            return _all([left, right], clause) if conjunctive else _any([left, right], clause)
        if isinstance(f, TruncSub):
            return self._point_truncsub(f, cmp, eps, x, b)
        if (cmp == '<') == isinstance(f, Inf):
            return self._point_exists(f, cmp, eps, x, b)
        return self._point_forall(f, cmp, eps, x, b)

    def _point_truncsub(self, f, cmp, eps, x, b):
        psi = self.value(f.right, x, b)
        if cmp == '>':
            v = self.point(f.left, '>', psi.upper + eps, x, b)
            if v.forced:
                return forced(v.margin, clause='truncsub', r=psi.upper)
            w = v if psi.lower == psi.upper else self.point(f.left, '>', psi.lower + eps, x, b)
            if w.refuted:
                return refuted(w.margin, clause='truncsub', r=psi.lower)
            return unknown(v.margin, clause='truncsub')
        if psi.lower >= 1.0:
            return forced(eps, clause='truncsub', case='psi=1')
        # psi = r holds for the enclosure midpoint when it is pinned within tol
        r = 0.5 * (psi.lower + psi.upper)
        if psi.upper - psi.lower > 2.0 * self.res.tol:
            r = psi.lower
        below = self.point(f.left, '<', r, x, b)
        if below.forced:
            return forced(eps, clause='truncsub', case='i', r=r)
        above = self.point(f.left, '>', r, x, b)
        if below.refuted and above.refuted:
            return forced(eps, clause='truncsub', case='ii', r=r)
        within = self.point(f.left, '<', r + eps, x, b)
        if within.forced:
            case = 'iii' if above.forced else 'i-iii'
            delta = eps - 0.5 * min(within.margin, eps)
            return forced(within.margin, clause='truncsub', case=case, r=r, delta=delta)
        upper = within if psi.upper == r else self.point(f.left, '<', psi.upper + eps, x, b)
        if upper.refuted:
            return refuted(upper.margin, clause='truncsub', r=psi.upper)
        return unknown(within.margin, clause='truncsub')

    def _point_exists(self, f, cmp, eps, x, b):
        clause = 'inf' if isinstance(f, Inf) else 'sup'
        found = self.candidates_at(x)
        margins = []
        all_refuted = True
        for sec in found.sections:
            v = self.point(f.body, cmp, eps, x, dict(b, **{f.var: sec}))
            if v.forced:
                return forced(v.margin, clause=clause, witness=sec.label)
            all_refuted = all_refuted and v.refuted
            margins.append(v.margin)
        if not margins:
            LOGGER.warning("no candidate sections at %r for '%s'", x, f.var)
            return unknown(-math.inf, clause=clause, candidates=0)
        slack = _slack(lipschitz_bound(f.body, f.var, self.signature), found.radius)
        bound = max(margins) + slack
        if all_refuted and bound <= 0:
            return refuted(bound, clause=clause, candidates=len(margins))
        return unknown(max(margins), clause=clause, candidates=len(margins))

    def _point_forall(self, f, cmp, eps, x, b):
        clause = 'inf' if isinstance(f, Inf) else 'sup'
        lipschitz = lipschitz_bound(f.body, f.var, self.signature)
        for sec in self.candidates_at(x).sections:
            v = self.point(f.body, cmp, eps, x, dict(b, **{f.var: sec}))
            if v.refuted:
                return refuted(v.margin, clause=clause, counterexample=sec.label)
        domain = common_domain(self.sheaf, b)
        worst = -math.inf
        for j in range(self.res.max_refinement + 1):
            U = meet(self.sheaf.base.around(x, self.res.radius * 2.0 ** -j), domain)
            if U is None:
                break
            worst = self._uniform_margin(f, cmp, eps, [x] + U.sample(self.res.grid), b, lipschitz)
            if worst > self.res.tol:
                return forced(worst, clause=clause, neighborhood=repr(U), delta=0.5 * worst)
            LOGGER.debug("%s clause not uniform on %r (margin %.3g)", clause, U, worst)
        return unknown(worst, clause=clause)

    def _uniform_margin(self, f, cmp, eps, points, b, lipschitz):
        worst = math.inf
        for y in points:
            found = self.candidates_at(y)
            slack = _slack(lipschitz, found.radius)
            if math.isinf(slack) or not found.sections:
                return -math.inf
            for sec in found.sections:
                v = self.point(f.body, cmp, eps, y, dict(b, **{f.var: sec}))
                if not v.forced:
                    return min(worst, v.margin - slack)
                worst = min(worst, v.margin - slack)
        return worst

    # -- local forcing --------------------------------------------------

    def local(self, f, cmp, eps, U, b, depth=0) -> Verdict:
        trivial = _trivial(cmp, eps)
        if trivial is not None:
            return trivial
        if isinstance(f, ATOMS):
            return self._local_atomic(f, cmp, eps, U, b)
        if isinstance(f, Half):
            v = self.local(f.arg, cmp, 2.0 * eps, U, b, depth)
            return Verdict(v.status, 0.5 * v.margin, {'clause': 'half'})
        if isinstance(f, Negation):
            v = self.local(f.arg, _dual(cmp), 1.0 - eps, U, b, depth)
            return Verdict(v.status, v.margin, dict(v.certificate, clause='negation'))
        if isinstance(f, (Max, Min)):
            clause = type(f).__name__.lower()
            if (cmp == '<') == isinstance(f, Max):
                return _all([lambda: self.local(f.left, cmp, eps, U, b, depth),
                             lambda: self.local(f.right, cmp, eps, U, b, depth)], clause)

            def solve(cell):
                return _any([lambda: self.local(f.left, cmp, eps, cell, b, depth + 1),
                             lambda: self.local(f.right, cmp, eps, cell, b, depth + 1)], clause)
            verdict, leaves = self._cover(U, U, solve, 0, stop_on_refuted=False)
            return Verdict(verdict.status, verdict.margin, {'clause': clause, 'cells': len(leaves)})
        if isinstance(f, TruncSub):
            return self._local_truncsub(f, cmp, eps, U, b, depth)
        if (cmp == '<') == isinstance(f, Inf):
            return self._local_exists(f, cmp, eps, U, b, depth)
        return self._local_forall(f, cmp, eps, U, b, depth)

    def _local_atomic(self, f, cmp, eps, U, b):
        coarse, fine = self.samples(U)
        if not coarse:
            return unknown(0.0, clause='atomic', samples=0)
        first = [self.value(f, y, b) for y in coarse]
        second = [self.value(f, y, b) for y in fine]
        both = first + second
        if cmp == '<':
            s1 = max(v.upper for v in first)
            s2 = max(v.upper for v in both)
            slack = abs(s2 - s1)
            low = max(v.lower for v in both)
            if low >= eps:
                return refuted(eps - low, clause='atomic')
            margin = eps - s2 - slack
        else:
            i1 = min(v.lower for v in first)
            i2 = min(v.lower for v in both)
            slack = abs(i1 - i2)
            high = min(v.upper for v in both)
            if high <= eps:
                return refuted(high - eps, clause='atomic')
            margin = i2 - slack - eps
        if margin > 0:
            return forced(margin, clause='atomic')
        return unknown(margin, clause='atomic')

    def _sampled(self, formula, U, b):
        coarse, fine = self.samples(U)
        return [self.value(formula, y, b) for y in coarse + fine]

    def _local_truncsub(self, f, cmp, eps, U, b, depth):
        phi = self._sampled(f.left, U, b)
        psi = self._sampled(f.right, U, b)
        if not phi:
            return unknown(0.0, clause='truncsub', samples=0)
        phi_hi, phi_lo = max(v.upper for v in phi), min(v.lower for v in phi)
        psi_hi, psi_lo = max(v.upper for v in psi), min(v.lower for v in psi)
        if cmp == '>':
            worst = min(a.upper - c.lower for a, c in zip(phi, psi))
            if worst <= eps:
                return refuted(worst - eps, clause='truncsub')
            if phi_lo - psi_hi > eps:
                q = 0.5 * (psi_hi + phi_lo - eps)
                v = _all([lambda: self.local(f.right, '<', q, U, b, depth),
                          lambda: self.local(f.left, '>', q + eps, U, b, depth)], 'truncsub')
                if v.forced:
                    return forced(v.margin, clause='truncsub', q=q)
            return unknown(phi_lo - psi_hi - eps, clause='truncsub')
        worst = max(a.lower - c.upper for a, c in zip(phi, psi))
        if worst >= eps:
            return refuted(eps - worst, clause='truncsub')
        if phi_hi < psi_lo:
            r = 0.5 * (phi_hi + psi_lo)
            v = _all([lambda: self.local(f.left, '<', r, U, b, depth),
                      lambda: self.local(f.right, '>', r, U, b, depth)], 'truncsub')
            if v.forced:
                return forced(eps, clause='truncsub', case='i', r=r)
        spread = max(max(abs(a.upper - c.upper), abs(a.lower - c.lower)) for a, c in zip(phi, psi))
        if abs(phi_hi - psi_hi) <= self.res.tol and spread <= self.res.tol:
            return forced(eps - spread, clause='truncsub', case='ii')
        v = self.local(f.left, '<', eps, U, b, depth)
        if v.forced:
            return forced(v.margin, clause='truncsub', case='iii')
        if phi_lo > psi_hi and phi_hi - psi_lo < eps and psi_lo > 0:
            r = 0.5 * (phi_lo + psi_hi)
            q = 0.5 * (max(phi_hi - eps, 0.0) + psi_lo)
            v = _all([lambda: self.local(f.left, '>', r, U, b, depth),
                      lambda: self.local(f.right, '<', r, U, b, depth),
                      lambda: self.local(f.left, '<', q + eps, U, b, depth),
                      lambda: self.local(f.right, '>', q, U, b, depth)], 'truncsub')
            if v.forced:
                return forced(v.margin, clause='truncsub', case='iv', r=r, q=q)
        return unknown(eps - worst, clause='truncsub')

    def _local_exists(self, f, cmp, eps, U, b, depth):
        clause = 'inf' if isinstance(f, Inf) else 'sup'

        def solve(cell):
            best = None
            for sec in self.candidates_on(cell).sections:
                v = self.local(f.body, cmp, eps, cell, dict(b, **{f.var: sec}), depth + 1)
                if v.forced:
                    return forced(v.margin, witness=sec.label, witness_section=sec)
                if best is None or v.margin > best.margin:
                    best = v
            if best is None:
                return unknown(-math.inf)
            return unknown(best.margin)
        verdict, leaves = self._cover(U, U, solve, 0, stop_on_refuted=False)
        cert = {'clause': clause, 'cells': len(leaves)}
        if verdict.forced:
            cert['witnesses'] = sorted({leaf[2].certificate['witness'] for leaf in leaves})
            cert['leaves'] = leaves
        return Verdict(verdict.status, verdict.margin, cert)

    def _local_forall(self, f, cmp, eps, U, b, depth):
        clause = 'inf' if isinstance(f, Inf) else 'sup'
        lipschitz = lipschitz_bound(f.body, f.var, self.signature)

        def solve(cell):
            found = self.candidates_on(cell)
            slack = _slack(lipschitz, found.radius)
            worst = math.inf
            for sec in found.sections:
                v = self.local(f.body, cmp, eps, cell, dict(b, **{f.var: sec}), depth + 1)
                if v.refuted:
                    return refuted(v.margin, counterexample=sec.label)
                worst = min(worst, v.margin - slack)
                if not v.forced:
                    return unknown(worst)
            if not found.sections or math.isinf(slack):
                return unknown(-math.inf)
            if worst > self.res.tol:
                return forced(worst)
            return unknown(worst)
        verdict, leaves = self._cover(U, U, solve, 0, stop_on_refuted=True)
        cert = {'clause': clause, 'cells': len(leaves)}
        if verdict.forced:
            shift = 0.5 * verdict.margin
            cert['eps_prime'] = eps - shift if cmp == '<' else eps + shift
        return Verdict(verdict.status, verdict.margin, cert)

    def _cover(self, cell, core, solve, level, stop_on_refuted):
        """
        Search a finite open cover of ``cell`` on whose members ``solve``
        forces. Returns the verdict and the leaves ``(cell, core, verdict)``;
        the cores are disjoint and their union is dense in the top cell.
        """
        v = solve(cell)
        if v.forced:
            return v, [(cell, core, v)]
        if v.refuted and stop_on_refuted:
            return v, []
        if level >= self.res.max_refinement:
            return unknown(v.margin), []
        pieces = core.partition(self.res.cells)
        if len(pieces) <= 1:
            return unknown(v.margin), []
        LOGGER.debug("refining cover at level %d into %d cells", level + 1, len(pieces))
        leaves = []
        for piece in pieces:
            child = meet(piece.expand(piece.measure() / (4.0 * self.res.cells)), cell)
            if child is None:
                continue
            cv, sub = self._cover(child, piece, solve, level + 1, stop_on_refuted)
            if not cv.forced:
                return (cv if cv.refuted else unknown(cv.margin)), []
            leaves.extend(sub)
        margin = min(leaf[2].margin for leaf in leaves)
        return forced(margin), leaves

    def refute_by_points(self, f, cmp, eps, U, b):
        for y in U.sample(self.res.grid):
            v = self.point(f, cmp, eps, y, b)
            if v.refuted:
                return refuted(v.margin, clause='point', point=repr(y))
        return None


##############################################################################
# Public operations


def _prepare(sheaf, cond, binding):
    binding = dict(binding or {})
    for var in free_variables(cond.formula, sheaf.signature):
        if var not in binding:
            raise UnboundVariableError(var)
    return binding


def strict_form(cond):
    """Strict comparator and whether the verdict must be negated."""
    if cond.comparator in ('<', '>'):
        return cond.comparator, False
    return ('>' if cond.comparator == '<=' else '<'), True


def force_point(sheaf: MetricSheaf, x, cond: Condition, binding: Optional[Dict[str, Section]] = None,
                res: Optional[Resolution] = None) -> Verdict:
    """
    Decide ``A ||-_x cond`` for the sections in ``binding``.

    Parameters
    ----------
    sheaf : MetricSheaf
        The sheaf.
    x : base point
        Where to force.
    cond : Condition
        Strict or non-strict condition; non-strict ones are the negation of
        the opposite strict condition.
    binding : dict
        Free variable to Section; every section must be defined at ``x``.
    res : Resolution
        Search knobs.

    Returns
    -------
    Verdict

    Raises
    ------
    UnboundVariableError
        A free variable has no section.
    DomainError
        ``x`` lies outside the domain of a bound section.
    """
    res = res or Resolution()
    binding = _prepare(sheaf, cond, binding)
    for sec in binding.values():
        if not sec.domain.contains(x):
            raise DomainError("{} is not defined at {!r}".format(sec.label, x))
    comparator, negate = strict_form(cond)
    forcer = Forcer(sheaf, res, binding)
    verdict = forcer.point(cond.formula, comparator, cond.threshold, x, binding)
    return verdict.flipped() if negate else verdict


def force_local(sheaf: MetricSheaf, U: OpenSet, cond: Condition,
                binding: Optional[Dict[str, Section]] = None, res: Optional[Resolution] = None) -> Verdict:
    """
    Decide ``A ||-_U cond``.

    Atomic clauses compare sampled suprema or infima over ``U`` at two grid
    levels; connective and quantifier clauses search finite covers of ``U``
    refined up to ``res.max_refinement``. A search that fails leaves the
    verdict UNKNOWN unless a sampled point of ``U`` refutes the condition.
    """
    res = res or Resolution()
    binding = _prepare(sheaf, cond, binding)
    for sec in binding.values():
        if not sec.domain.includes(U):
            raise DomainError("{} is not defined on {!r}".format(sec.label, U))
    comparator, negate = strict_form(cond)
    forcer = Forcer(sheaf, res, binding)
    verdict = forcer.local(cond.formula, comparator, cond.threshold, U, binding)
    if not verdict.known:
        fallback = forcer.refute_by_points(cond.formula, comparator, cond.threshold, U, binding)
        if fallback is not None:
            verdict = fallback
        else:
            LOGGER.warning("'%s' undecided on %r at refinement %d", format_condition(cond), U,
                           res.max_refinement)
    return verdict.flipped() if negate else verdict


def neighborhood_witness(sheaf: MetricSheaf, x, cond: Condition,
                         binding: Optional[Dict[str, Section]] = None,
                         res: Optional[Resolution] = None) -> OpenSet:
    """
    Find an open ``U`` around ``x`` on whose sampled points ``cond`` is forced.

    The common domain of the bound sections is tried first, then
    neighbourhoods of radius ``res.radius * 2**-j``.

    Raises
    ------
    NeighborhoodError
        ``cond`` is not forced at ``x``, or no neighbourhood passes at the
        maximal refinement.
    """
    res = res or Resolution()
    binding = _prepare(sheaf, cond, binding)
    if not is_restricted(cond):
        LOGGER.warning("'%s' is not in restricted form; truth continuity is not guaranteed",
                       format_condition(cond))
    if not force_point(sheaf, x, cond, binding, res).forced:
        raise NeighborhoodError("'{}' is not forced at {!r}".format(format_condition(cond), x))
    domain = common_domain(sheaf, binding)
    trials = [domain]
    for j in range(res.max_refinement + 1):
        trials.append(meet(sheaf.base.around(x, res.radius * 2.0 ** -j), domain))
    for U in trials:
        if U is None or not U.contains(x):
            continue
        if all(force_point(sheaf, y, cond, binding, res).forced for y in U.sample(res.grid)):
            return U
        LOGGER.debug("neighbourhood %r rejected", U)
    raise NeighborhoodError("no neighbourhood of {!r} forces '{}'; check the fiber continuity".format(
        x, format_condition(cond)))


class GluedSection(Section):
    """Section assembled from per-cell witnesses on disjoint open cores."""

    def __init__(self, pieces, name='glued'):
        self.pieces = list(pieces)
        domain = self.pieces[0][0] if len(self.pieces) == 1 else OpenUnion(
            tuple(core for core, _ in self.pieces))
        labels = tuple(sec.label for _, sec in self.pieces)
        super().__init__(domain, self._evaluate, family='glued', params=labels,
                         sort=self.pieces[0][1].sort, name=name)

    def _evaluate(self, x):
        for core, sec in self.pieces:
            if core.contains(x):
                return sec(x)
        raise DomainError("glued section is not defined at {!r}".format(x))


def max_principle_witness(sheaf: MetricSheaf, U: OpenSet, cond: Condition,
                          binding: Optional[Dict[str, Section]] = None,
                          res: Optional[Resolution] = None):
    """
    From ``A ||-_U inf_s phi(s) < eps`` build a section ``mu`` on a finite
    union ``W`` of cell cores and a threshold ``eps' < eps`` with
    ``A ||-_W phi(mu) < eps'``.

    Returns
    -------
    tuple
        ``(section, eps_prime)``. When one witness serves every cell that
        witness is returned as is.

    Raises
    ------
    ValueError
        ``cond`` is not an infimum compared with ``<``.
    WitnessSearchError
        The condition is not locally forced, or the glued witness fails to
        re-verify.
    """
    if not isinstance(cond.formula, Inf) or cond.comparator != '<':
        raise ValueError('The maximum principle applies to conditions inf s. phi < eps.')
    res = res or Resolution()
    binding = _prepare(sheaf, cond, binding)
    forcer = Forcer(sheaf, res, binding)
    verdict = forcer.local(cond.formula, '<', cond.threshold, U, binding)
    if not verdict.forced:
        raise WitnessSearchError("'{}' is not forced on {!r}".format(format_condition(cond), U))
    leaves = verdict.certificate['leaves']
    margin = min(leaf[2].margin for leaf in leaves)
    eps = cond.threshold
    eps_prime = eps - margin + min(2.0 * res.tol, 0.5 * margin)
    witnesses = {leaf[2].certificate['witness_section'].key for leaf in leaves}
    if len(witnesses) == 1:
        mu = leaves[0][2].certificate['witness_section']
        W = U
    else:
        pieces = [(core.shrink(res.gap), leaf_v.certificate['witness_section'])
                  for _, core, leaf_v in leaves]
        mu = GluedSection(pieces)
        W = mu.domain
    body = cond.formula.body
    check = force_local(sheaf, W, Condition(body, '<', eps_prime),
                        dict(binding, **{cond.formula.var: mu}), res)
    if not check.forced:
        raise WitnessSearchError("glued witness does not force '{}' below {:.6g}".format(
            format_condition(cond), eps_prime))
    return mu, eps_prime
