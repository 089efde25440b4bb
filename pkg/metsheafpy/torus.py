"""
torus.py

The metric sheaf of a cyclic flow on the torus ``S^1 x S^1`` projected onto
its first factor. Every fiber is a circle with the shortest-arc metric
divided by pi, sections are integral curves of the flow and the fiberwise
complex multiplication is the function symbol ``mul``.
"""
import logging
import math

from metsheafpy.logic import ElementSample, Fiber, Signature, parse_condition
from metsheafpy.sheaf import CandidateSet, MetricSheaf, Section, SectionFamily
from metsheafpy.topology import TWO_PI, Arc, Circle

LOGGER = logging.getLogger(__name__)

TORUS_SIGNATURE = Signature.build(functions={'mul': (2, 1.0)}, constants=('one',))

LEFT_CONTINUITY = "sup s. 1 -. max(d(e, m), 1 -. d(mul(e, s), mul(m, s))) < {eps}"


def arc_distance(a, b):
    """
    Shortest-arc distance between two angles, scaled to [0, 1].

    Example
    -------
    >>> arc_distance(0.0, math.pi)
    1.0
    >>> round(arc_distance(0.1, TWO_PI - 0.1), 12) == round(0.2 / math.pi, 12)
    True
    """
    gap = abs(a - b) % TWO_PI
    return min(gap, TWO_PI - gap) / math.pi


class CircleFiber(Fiber):
    """
    The circle over one base point. Elements are angles in ``[0, 2*pi)``;
    ``mul`` adds angles and the constant ``one`` is the angle 0.
    """

    signature = TORUS_SIGNATURE

    def distance(self, a, b):
        return arc_distance(a, b)

    def function(self, name, args):
        if name == 'mul':
            return (args[0] + args[1]) % TWO_PI
        return super().function(name, args)

    def constant(self, name):
        if name == 'one':
            return 0.0
        return super().constant(name)

    def sample(self, size=64):
        size = max(1, int(size))
        return ElementSample(tuple(TWO_PI * j / size for j in range(size)), 1.0 / size)


_FIBER = CircleFiber()


def integral_curve(offset, slope=1, domain=None, name=None):
    """
    The integral curve ``x -> offset + slope * x`` of the flow.

    Parameters
    ----------
    offset : float
        Angle of the curve over the base point 0.
    slope : int
        Winding number of the flow; integer slopes make every curve global.
    domain : Arc, optional
        Restrict the curve to an arc. Defaults to the whole circle.
    name : str, optional
        Label used in reports.

    Example
    -------
    >>> sigma = integral_curve(0.5, slope=1)
    >>> round(sigma(1.0), 12)
    1.5
    """
    if int(slope) != slope:
        raise ValueError('The flow slope must be an integer.')
    slope = int(slope)
    offset = offset % TWO_PI
    domain = domain if domain is not None else Arc(0.0, TWO_PI)

    def evaluate(x):
        return (offset + slope * x) % TWO_PI
    return Section(domain, evaluate, family='curve', params=(offset, slope), name=name)


def offset_of(section):
    """Offset of an integral curve section, ``None`` for other sections."""
    if section.family != 'curve':
        return None
    return section.params[0]


class IntegralCurveFamily(SectionFamily):
    """
    Global integral curves on an offset grid of ``res.family_size`` angles.

    The grid starts at the offset of the first integral-curve anchor so bound
    sections are hit exactly; every integral curve lies within ``1/N`` of a
    grid member at every point.
    """

    name = 'curve'

    def __init__(self, slope=1):
        self.slope = int(slope)

    def candidates(self, U, res, anchors=()):
        base = 0.0
        for sec in anchors:
            offset = offset_of(sec)
            if offset is not None and sec.params[1] == self.slope:
                base = offset
                break
        n = res.family_size
        sections = tuple(integral_curve(base + TWO_PI * j / n, self.slope) for j in range(n))
        return CandidateSet(sections, 1.0 / n)


def torus_sheaf(slope=1, sections=None, name='torus'):
    """
    Build the cyclic-flow sheaf.

    Parameters
    ----------
    slope : int
        Winding number of the flow field ``d/dx1 + slope * d/dx2``.
    sections : dict, optional
        Named sections registered in the sheaf catalog.
    name : str
        Label used in reports.

    Returns
    -------
    MetricSheaf

    Example
    -------
    >>> sheaf = torus_sheaf()
    >>> sheaf.fiber(0.3).distance(0.0, math.pi / 2)
    0.5
    """
    catalog = dict(sections or {})
    LOGGER.debug("torus sheaf with slope %d and %d catalog sections", slope, len(catalog))
    return MetricSheaf(Circle(), lambda x: _FIBER, TORUS_SIGNATURE,
                       families=[IntegralCurveFamily(slope)], name=name, catalog=catalog)


def parallel_curves(offsets, slope=1, domain=None):
    """Named integral curves ``c0, c1, ...`` with the given offsets."""
    return {"c{}".format(i): integral_curve(off, slope, domain, name="c{}".format(i))
            for i, off in enumerate(offsets)}


def cauchy_curves(count, slope=1, base=0.0, domain=None):
    """
    Curves at offsets ``base + pi * 2**-n`` for ``n = 1..count`` followed by
    the curve at ``base``, the class they approach.
    """
    out = {}
    for n in range(1, count + 1):
        label = "c{}".format(n)
        out[label] = integral_curve(base + math.pi * 2.0 ** -n, slope, domain, name=label)
    out['limit'] = integral_curve(base, slope, name='limit')
    return out


def left_continuity_condition(eps=0.3):
    """
    The sentence saying multiplication by any section is continuous in the
    left argument, bound to ``e`` and ``m``.

    Example
    -------
    >>> left_continuity_condition(0.3).threshold
    0.3
    """
    return parse_condition(LEFT_CONTINUITY.format(eps=eps), TORUS_SIGNATURE)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
