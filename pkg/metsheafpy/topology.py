"""
topology.py

Base spaces of metric sheaves and the basic open sets forcing works with:
open intervals of the line, arcs of the circle, upward cones of a lattice of
finite index sets, finite products and finite unions of those. Descending
chains of basic open sets stand in for filters.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_EPS = 1e-12


class FilterError(ValueError):
    pass


def _window(lo, hi):
    """Finite stretch of an interval used for sampling and partitioning."""
    if math.isfinite(lo) and math.isfinite(hi):
        return lo, hi
    if math.isfinite(lo):
        return lo, lo + 4.0 * max(1.0, abs(lo))
    if math.isfinite(hi):
        return hi - 4.0 * max(1.0, abs(hi)), hi
    return -4.0, 4.0


class OpenSet(object):
    """
    Common interface of basic open sets.

    ``partition`` returns disjoint open pieces whose union is dense in the
    set; ``split`` widens those pieces slightly so that they cover it.
    """

    regular = True

    def contains(self, x):
        raise NotImplementedError

    def intersect(self, other):
        raise NotImplementedError

    def includes(self, other):
        raise NotImplementedError

    def sample(self, n):
        raise NotImplementedError

    def partition(self, k):
        return [self]

    def expand(self, amount):
        return self

    def shrink(self, fraction):
        return self

    def measure(self):
        return 1.0

    def neighborhood(self, x, r):
        raise NotImplementedError

    def split(self, k):
        pieces = []
        for piece in self.partition(k):
            cell = piece.expand(piece.measure() / 4.0).intersect(self)
            pieces.append(cell if cell is not None else piece)
        return pieces


@dataclass(frozen=True)
class Interval(OpenSet):
    """
    Open interval ``(lo, hi)``; either end may be infinite.

    Example
    -------
    >>> Interval(0, 1).intersect(Interval(0.5, 2))
    Interval(lo=0.5, hi=1)
    >>> Interval(0, 1).intersect(Interval(2, 3)) is None
    True
    """
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError('An open interval needs lo < hi, got ({}, {}).'.format(self.lo, self.hi))

    def contains(self, x):
        return isinstance(x, (int, float)) and self.lo < x < self.hi

    def intersect(self, other):
        if isinstance(other, Interval):
            lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
            return Interval(lo, hi) if lo < hi else None
        return other.intersect(self)

    def includes(self, other):
        if isinstance(other, Interval):
            return self.lo <= other.lo + _EPS and other.hi <= self.hi + _EPS
        if isinstance(other, OpenUnion):
            return all(self.includes(part) for part in other.parts)
        return False

    def sample(self, n):
        a, b = _window(self.lo, self.hi)
        return [a + (b - a) * (i + 0.5) / n for i in range(n)]

    def partition(self, k):
        a, b = _window(self.lo, self.hi)
        cuts = [a + (b - a) * i / k for i in range(1, k)]
        ends = [self.lo] + cuts + [self.hi]
        return [Interval(ends[i], ends[i + 1]) for i in range(k)]

    def expand(self, amount):
        return Interval(self.lo - amount, self.hi + amount)

    def shrink(self, fraction):
        a, b = _window(self.lo, self.hi)
        cut = 0.5 * fraction * (b - a)
        hi = self.hi - cut if math.isfinite(self.hi) else self.hi
        return Interval(self.lo + cut if math.isfinite(self.lo) else self.lo, hi)

    def measure(self):
        a, b = _window(self.lo, self.hi)
        return b - a

    def neighborhood(self, x, r):
        return Interval(x - r, x + r).intersect(self)


@dataclass(frozen=True)
class Arc(OpenSet):
    """
    Open arc of the unit circle starting at angle ``start`` and sweeping
    ``length`` radians counter-clockwise; a length of 2*pi is the whole circle.

    Example
    -------
    >>> Arc(0.0, 1.0).contains(0.5)
    True
    >>> Arc(6.0, 1.0).contains(0.2)
    True
    """
    start: float
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError('An arc needs a positive length.')
        object.__setattr__(self, 'start', self.start % TWO_PI)
        object.__setattr__(self, 'length', min(self.length, TWO_PI))

    @property
    def full(self):
        return self.length >= TWO_PI - _EPS

    def contains(self, x):
        if not isinstance(x, (int, float)):
            return False
        if self.full:
            return True
        offset = (x - self.start) % TWO_PI
        return 0.0 < offset < self.length

    def intersect(self, other):
        if isinstance(other, OpenUnion):
            return other.intersect(self)
        if not isinstance(other, Arc):
            return None
        if self.full:
            return other
        if other.full:
            return self
        shift = (other.start - self.start) % TWO_PI
        parts = []
        for lo in (shift, shift - TWO_PI):
            a, b = max(0.0, lo), min(self.length, lo + other.length)
            if b - a > _EPS:
                parts.append(Arc(self.start + a, b - a))
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else OpenUnion(tuple(parts))

    def includes(self, other):
        if isinstance(other, OpenUnion):
            return all(self.includes(part) for part in other.parts)
        if not isinstance(other, Arc):
            return False
        if self.full:
            return True
        if other.full:
            return False
        shift = (other.start - self.start) % TWO_PI
        if shift > TWO_PI - _EPS:
            shift = 0.0
        return shift + other.length <= self.length + 1e-9

    def sample(self, n):
        return [(self.start + self.length * (i + 0.5) / n) % TWO_PI for i in range(n)]

    def partition(self, k):
        step = self.length / k
        return [Arc(self.start + i * step, step) for i in range(k)]

    def expand(self, amount):
        if self.full:
            return self
        return Arc(self.start - amount, self.length + 2.0 * amount)

    def shrink(self, fraction):
        cut = 0.5 * fraction * self.length
        return Arc(self.start + cut, self.length - 2.0 * cut)

    def measure(self):
        return self.length

    def neighborhood(self, x, r):
        return Arc(x - r, 2.0 * r).intersect(self)

    @property
    def center(self):
        return (self.start + 0.5 * self.length) % TWO_PI


@dataclass(frozen=True)
class Cone(OpenSet):
    """
    Upward cone ``[l_I) = {J : I is a subset of J}`` of the lattice of finite
    index sets. ``universe`` bounds the points that can be materialised.

    Example
    -------
    >>> cone = Cone(frozenset({0}), frozenset({0, 1, 2}))
    >>> cone.contains(frozenset({0, 2})), cone.contains(frozenset({1}))
    (True, False)
    >>> sorted(cone.intersect(Cone(frozenset({1}), cone.universe)).root)
    [0, 1]
    """
    root: frozenset
    universe: frozenset = frozenset()

    regular = False

    def contains(self, x):
        return isinstance(x, frozenset) and self.root <= x

    def intersect(self, other):
        if isinstance(other, Cone):
            return Cone(self.root | other.root, self.universe | other.universe)
        if isinstance(other, OpenUnion):
            return other.intersect(self)
        return None

    def includes(self, other):
        if isinstance(other, Cone):
            return self.root <= other.root
        if isinstance(other, OpenUnion):
            return all(self.includes(part) for part in other.parts)
        return False

    def sample(self, n):
        if not self.root <= self.universe:
            return []
        extra = sorted(self.universe - self.root)
        points = [self.root]
        for j in range(1, len(extra) + 1):
            points.append(self.root | frozenset(extra[:j]))
        for idx in extra:
            points.append(self.root | {idx})
        seen = []
        for point in points:
            if point not in seen:
                seen.append(point)
        return seen[:n]

    def neighborhood(self, x, r):
        return Cone(frozenset(x) | self.root, self.universe)


@dataclass(frozen=True)
class ProductSet(OpenSet):
    factors: Tuple[OpenSet, ...]

    @property
    def regular(self):
        return all(f.regular for f in self.factors)

    def contains(self, x):
        return (isinstance(x, tuple) and len(x) == len(self.factors)
                and all(f.contains(v) for f, v in zip(self.factors, x)))

    def intersect(self, other):
        if not isinstance(other, ProductSet):
            return None
        parts = [a.intersect(b) for a, b in zip(self.factors, other.factors)]
        if any(p is None for p in parts):
            return None
        return ProductSet(tuple(parts))

    def includes(self, other):
        return (isinstance(other, ProductSet)
                and all(a.includes(b) for a, b in zip(self.factors, other.factors)))

    def sample(self, n):
        per = max(1, int(math.ceil(n ** (1.0 / len(self.factors)))))
        return list(itertools.product(*[f.sample(per) for f in self.factors]))

    def partition(self, k):
        return [ProductSet(tuple(p)) for p in itertools.product(*[f.partition(k) for f in self.factors])]

    def expand(self, amount):
        return ProductSet(tuple(f.expand(amount) for f in self.factors))

    def shrink(self, fraction):
        return ProductSet(tuple(f.shrink(fraction) for f in self.factors))

    def measure(self):
        return math.prod(f.measure() for f in self.factors)

    def neighborhood(self, x, r):
        parts = [f.neighborhood(v, r) for f, v in zip(self.factors, x)]
        return ProductSet(tuple(parts))


@dataclass(frozen=True)
class OpenUnion(OpenSet):
    """Finite union of basic open sets."""
    parts: Tuple[OpenSet, ...]

    @property
    def regular(self):
        return all(p.regular for p in self.parts)

    def contains(self, x):
        return any(p.contains(x) for p in self.parts)

    def intersect(self, other):
        others = other.parts if isinstance(other, OpenUnion) else (other,)
        pieces = []
        for a in self.parts:
            for b in others:
                meet = a.intersect(b)
                if meet is None:
                    continue
                pieces.extend(meet.parts if isinstance(meet, OpenUnion) else [meet])
        if not pieces:
            return None
        return pieces[0] if len(pieces) == 1 else OpenUnion(tuple(pieces))

    def includes(self, other):
        others = other.parts if isinstance(other, OpenUnion) else (other,)
        return all(any(p.includes(o) for p in self.parts) for o in others)

    def sample(self, n):
        per = max(1, int(math.ceil(n / len(self.parts))))
        return [x for p in self.parts for x in p.sample(per)]

    def partition(self, k):
        return [piece for p in self.parts for piece in p.partition(k)]

    def expand(self, amount):
        return OpenUnion(tuple(p.expand(amount) for p in self.parts))

    def shrink(self, fraction):
        return OpenUnion(tuple(p.shrink(fraction) for p in self.parts))

    def measure(self):
        return sum(p.measure() for p in self.parts)

    def neighborhood(self, x, r):
        for p in self.parts:
            if p.contains(x):
                return p.neighborhood(x, r)
        return None


def meet(*sets) -> Optional[OpenSet]:
    """Intersection of open sets, ``None`` when it is empty."""
    out = sets[0]
    for other in sets[1:]:
        if out is None:
            return None
        out = out.intersect(other)
    return out


##############################################################################
# Base spaces


class BaseSpace(object):
    kind = 'base'
    regular = True

    def whole(self):
        raise NotImplementedError

    def around(self, x, r):
        return self.whole().neighborhood(x, r)


class RealInterval(BaseSpace):
    """The interval ``(a, b)`` with its order topology."""
    kind = 'interval'

    def __init__(self, a=-math.inf, b=math.inf):
        self.a = a
        self.b = b
        self._whole = Interval(a, b)

    def whole(self):
        return self._whole

    def __repr__(self):
        return "RealInterval({}, {})".format(self.a, self.b)


class Circle(BaseSpace):
    kind = 'circle'

    def whole(self):
        return Arc(0.0, TWO_PI)

    def __repr__(self):
        return "Circle()"


class FiniteSubsetLattice(BaseSpace):
    """
    Finite subsets of an index universe ordered by inclusion, open sets being
    the upward cones. Not a regular space.
    """
    kind = 'lattice'
    regular = False

    def __init__(self, universe):
        self.universe = frozenset(universe)

    def whole(self):
        return Cone(frozenset(), self.universe)

    def around(self, x, r=None):
        return Cone(frozenset(x), self.universe)

    def __repr__(self):
        return "FiniteSubsetLattice({})".format(sorted(self.universe))


class ProductSpace(BaseSpace):
    kind = 'product'

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.regular = all(f.regular for f in self.factors)

    def whole(self):
        return ProductSet(tuple(f.whole() for f in self.factors))

    def around(self, x, r):
        return ProductSet(tuple(f.around(v, r) for f, v in zip(self.factors, x)))


##############################################################################
# Filter chains


@dataclass(frozen=True)
class FilterChain:
    """
    Descending chain ``U_1 > U_2 > ...`` of basic open sets generating a
    filter. Indices are 1-based. Cone chains also carry a root generator so
    membership can be decided past the materialised depth.

    Example
    -------
    >>> chain = FilterChain.shrink_to_zero(3)
    >>> [U.hi for U in chain]
    [0.5, 0.25, 0.125]
    >>> chain.exclusion_index(0.3)
    2
    """
    kind: str
    sets: Tuple[OpenSet, ...]
    root: Optional[Callable] = None

    def __post_init__(self):
        if not self.sets:
            raise FilterError('A filter chain needs at least one open set.')
        for outer, inner in zip(self.sets, self.sets[1:]):
            if not outer.includes(inner):
                raise FilterError('Filter chain sets must be descending.')

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def element(self, k):
        return self.sets[k - 1]

    @property
    def depth(self):
        return len(self.sets)

    def contains(self, point, k):
        if self.root is not None:
            return frozenset(self.root(k)) <= point
        return self.sets[k - 1].contains(point)

    def exclusion_index(self, point):
        """First index whose set misses ``point``; ``None`` within the materialised depth."""
        if self.root is not None:
            k = 1
            while self.contains(point, k):
                k += 1
            return k
        for k in range(1, self.depth + 1):
            if not self.contains(point, k):
                return k
        return None

    def in_filter(self, U):
        """True when ``U`` contains some chain element."""
        return any(U.includes(V) for V in self.sets)

    @classmethod
    def shrink_to_zero(cls, depth):
        return cls('shrink', tuple(Interval(0.0, 2.0 ** -k) for k in range(1, depth + 1)))

    @classmethod
    def grow(cls, depth):
        return cls('grow', tuple(Interval(2.0 ** k, math.inf) for k in range(1, depth + 1)))

    @classmethod
    def arcs(cls, center, depth):
        sets = []
        for k in range(1, depth + 1):
            half = math.pi * 2.0 ** -k
            sets.append(Arc(center - half, 2.0 * half))
        return cls('arc', tuple(sets))

    @classmethod
    def cones(cls, universe, depth):
        universe = frozenset(universe)

        def root(k):
            return range(k + 1)
        return cls('cone', tuple(Cone(frozenset(root(k)), universe) for k in range(1, depth + 1)), root)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
