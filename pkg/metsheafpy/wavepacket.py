"""
wavepacket.py

Polynomial times complex-width Gaussian packets, the operations defined on
them and the metric sheaf they form over the imperfection parameter ``tau``.

A position packet with ``w = tau**2 + t`` is

    q(x - x0) * exp(-(x - x0)**2 / (2*hbar*w)) / sqrt(2*pi*hbar*w)

and a momentum packet is

    q(p - p0) * sqrt(w / (2*pi*hbar)) * exp(-w*(p - p0)**2 / (2*hbar))

Polynomials are stored as complex coefficient tuples in the offset from the
centre, lowest order first. Square roots use the principal branch; every
width has a positive real part so the roots are continuous in ``t``.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.polynomial.hermite import hermgauss
from scipy import integrate, optimize

from metsheafpy.logic import ElementSample, Fiber, Signature
from metsheafpy.sheaf import CandidateSet, MetricSheaf, Section, SectionFamily
from metsheafpy.topology import Interval, RealInterval

LOGGER = logging.getLogger(__name__)

DEGREE_CAP = 16
SEMINORM_CAP = 8


class PacketError(ValueError):
    pass


class SortMismatchError(PacketError):
    pass


class DegreeCapError(PacketError):
    pass


class UndefinedLimitError(PacketError):
    pass


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Reduced Planck constant and particle mass.

    Example
    -------
    >>> PhysicalConstants(hbar=1.0, mass=2.0).mass
    2.0
    """
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for label, value in (('hbar', self.hbar), ('mass', self.mass)):
            if not (math.isfinite(value) and value > 0):
                raise ValueError("{} must be strictly positive, got {}.".format(label, value))


class Sort(Enum):
    POSITION = 'position'
    MOMENTUM = 'momentum'


def _trim(coeffs):
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
    end = len(arr)
    while end > 1 and arr[end - 1] == 0:
        end -= 1
    if end == 0:
        return (0j,)
    return tuple(complex(c) for c in arr[:end])


def _real_poly(coeffs):
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
    if np.any(arr.imag != 0):
        raise PacketError('Phase polynomials must have real coefficients.')
    return _trim(arr.real)


@dataclass(frozen=True)
class GaussianPacket:
    """
    A polynomial times a Gaussian envelope in one representation.

    Parameters
    ----------
    sort : Sort or str
        ``position`` for the U sort and ``momentum`` for the V sort.
    coeffs : sequence of complex
        Coefficients of ``q`` in the offset ``xi - center``, lowest first.
    center : float
        ``x0`` for position packets and ``p0`` for momentum packets.
    tau : float
        Imperfection parameter, strictly positive.
    t : complex
        Width extension; ``Re(tau**2 + t)`` must be positive.
    constants : PhysicalConstants
    dual : float
        Centre in the other representation, used by the Fourier pair.
    kick : float
        Rate of a linear phase ``exp(i*kick*u)`` on position packets.
    phases : tuple
        Unevaluated phases ``exp(i*s*f(u))`` as ``(s, f)`` pairs, ``f`` of
        degree above two.
    cap : int
        Largest polynomial degree allowed.

    Example
    -------
    >>> pkt = GaussianPacket('position', (0, 1), center=2.0)
    >>> pkt.degree, pkt.width
    (1, (1+0j))
    """
    sort: Sort
    coeffs: Tuple[complex, ...] = (1.0,)
    center: float = 0.0
    tau: float = 1.0
    t: complex = 0j
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    dual: float = 0.0
    kick: float = 0.0
    phases: Tuple = ()
    cap: int = DEGREE_CAP

    def __post_init__(self):
        object.__setattr__(self, 'sort', Sort(self.sort))
        object.__setattr__(self, 'coeffs', _trim(self.coeffs))
        object.__setattr__(self, 'center', float(self.center))
        object.__setattr__(self, 'dual', float(self.dual))
        object.__setattr__(self, 'kick', float(self.kick))
        object.__setattr__(self, 'tau', float(self.tau))
        object.__setattr__(self, 't', complex(self.t))
        if not isinstance(self.constants, PhysicalConstants):
            raise TypeError('constants must be PhysicalConstants.')
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise PacketError("tau must be strictly positive, got {}.".format(self.tau))
        if not self.width.real > 0:
            raise PacketError("Non-normalizable packet: Re(tau^2 + t) = {} <= 0.".format(self.width.real))
        if self.degree > self.cap:
            raise DegreeCapError("Polynomial degree {} exceeds the cap {}.".format(self.degree, self.cap))
        if self.sort is Sort.MOMENTUM and (self.kick or self.phases):
            raise PacketError('Phases act on position packets only.')

    @property
    def hbar(self):
        return self.constants.hbar

    @property
    def width(self):
        return self.tau ** 2 + self.t

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def plain(self):
        """True when the packet carries no kick and no phase annotation."""
        return self.kick == 0 and not self.phases

    @property
    def prefactor(self):
        w = self.width
        if self.sort is Sort.POSITION:
            return 1.0 / np.sqrt(2.0 * math.pi * self.hbar * w)
        return np.sqrt(w / (2.0 * math.pi * self.hbar))

    @property
    def exponent(self):
        """Coefficients of the quadratic exponent in the offset."""
        w = self.width
        if self.sort is Sort.POSITION:
            return np.array([0j, 1j * self.kick, -1.0 / (2.0 * self.hbar * w)])
        return np.array([0j, 0j, -w / (2.0 * self.hbar)])

    @property
    def log_envelope(self):
        """Exponent including the annotated phases."""
        total = self.exponent
        for s, f in self.phases:
            total = P.polyadd(total, 1j * s * np.asarray(f))
        return total

    @property
    def sigma(self):
        """Standard deviation of the modulus of the envelope."""
        if self.sort is Sort.POSITION:
            return math.sqrt(self.hbar / (1.0 / self.width).real)
        return math.sqrt(self.hbar / self.width.real)

    def with_coeffs(self, coeffs):
        return replace(self, coeffs=_trim(coeffs))

    def isclose(self, other, rtol=1e-12):
        """
        Envelope parameters compared exactly, coefficients up to ``rtol``
        relative to the largest coefficient.
        """
        if (self.sort, self.center, self.dual, self.tau, self.t, self.constants, self.kick,
                self.phases) != (other.sort, other.center, other.dual, other.tau, other.t,
                                 other.constants, other.kick, other.phases):
            return False
        a, b = np.array(self.coeffs), np.array(other.coeffs)
        n = max(len(a), len(b))
        a, b = np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b)))
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return bool(np.max(np.abs(a - b)) <= rtol * scale)


def position_packet(coeffs=(1.0,), center=0.0, tau=1.0, t=0j, constants=None, **kwargs):
    """Shorthand for a packet of the position sort."""
    return GaussianPacket(Sort.POSITION, coeffs, center, tau, t,
                          constants or PhysicalConstants(), **kwargs)


def momentum_packet(coeffs=(1.0,), center=0.0, tau=1.0, t=0j, constants=None, **kwargs):
    """Shorthand for a packet of the momentum sort."""
    return GaussianPacket(Sort.MOMENTUM, coeffs, center, tau, t,
                          constants or PhysicalConstants(), **kwargs)


def eval_packet(pkt: GaussianPacket, xi):
    """
    Value of the packet at ``xi``; accepts scalars and arrays.

    Example
    -------
    >>> round(abs(eval_packet(position_packet(), 0.0)), 6)
    0.398942
    >>> eval_packet(position_packet((0, 1), center=3.0), 3.0)
    0j
    """
    u = np.asarray(xi, dtype=float) - pkt.center
    value = P.polyval(u, pkt.coeffs) * pkt.prefactor * np.exp(P.polyval(u, pkt.exponent))
    for s, f in pkt.phases:
        value = value * np.exp(1j * s * P.polyval(u, f))
    if np.ndim(value) == 0:
        return complex(value)
    return value


##############################################################################
# Defined operations


@dataclass(frozen=True)
class EvaluatedPacket:
    """
    A degree-zero packet held together with the point it is evaluated at;
    the result of the defined inner products.
    """
    packet: GaussianPacket
    at: float

    @property
    def value(self):
        return eval_packet(self.packet, self.at)

    def __complex__(self):
        return self.value


def _require(pkt, sort):
    if pkt.sort is not sort:
        raise SortMismatchError("Expected a {} packet, got {}.".format(sort.value, pkt.sort.value))


def _require_plain(pkt, what):
    if not pkt.plain:
        raise PacketError("{} is defined for packets without phase kick or annotation.".format(what))


def _pairing(a, b, sort):
    _require(a, sort)
    _require(b, sort)
    _require_plain(a, 'The inner product')
    _require_plain(b, 'The inner product')
    if not math.isclose(a.tau, b.tau, rel_tol=1e-12):
        raise PacketError("Inner products need equal tau, got {} and {}.".format(a.tau, b.tau))
    if a.constants != b.constants:
        raise PacketError('Inner products need equal physical constants.')
    delta = a.center - b.center
    scalar = P.polyval(delta, a.coeffs) * P.polyval(delta, b.coeffs)
    envelope = GaussianPacket(sort, (scalar,), 0.0, a.tau, a.t + b.t, a.constants, cap=a.cap)
    return EvaluatedPacket(envelope, delta)


def inner_u(a: GaussianPacket, b: GaussianPacket) -> EvaluatedPacket:
    """
    Defined inner product of two position packets.

    The polynomials are multiplied and evaluated at the separation
    ``x_a - x_b``; the envelope keeps ``tau`` and adds the extensions.

    Raises
    ------
    SortMismatchError
        Either packet is of the momentum sort.
    PacketError
        The packets have different ``tau`` or carry phases.

    Example
    -------
    >>> pkt = position_packet(tau=0.5)
    >>> round(inner_u(pkt, pkt).value.real, 12) == round(1 / math.sqrt(2 * math.pi * 0.25), 12)
    True
    """
    return _pairing(a, b, Sort.POSITION)


def inner_v(a: GaussianPacket, b: GaussianPacket) -> EvaluatedPacket:
    """Defined inner product of two momentum packets; mirrors :func:`inner_u`."""
    return _pairing(a, b, Sort.MOMENTUM)


def _derivative(pkt):
    # d/du of q*exp(E) divided by exp(E)
    slope = P.polyder(pkt.log_envelope)
    return P.polyadd(P.polyder(pkt.coeffs), P.polymul(pkt.coeffs, slope))


def apply_x(pkt: GaussianPacket) -> GaussianPacket:
    """
    Position operator: multiplication by the offset on position packets and
    ``i*hbar*d/dp`` on momentum packets.

    Example
    -------
    >>> apply_x(position_packet()).coeffs
    (0j, (1+0j))
    """
    if pkt.sort is Sort.POSITION:
        return pkt.with_coeffs(P.polymulx(pkt.coeffs))
    return pkt.with_coeffs(1j * pkt.hbar * _derivative(pkt))


def apply_p(pkt: GaussianPacket) -> GaussianPacket:
    """
    Momentum operator: ``-i*hbar*d/dx`` on position packets and
    multiplication by the offset on momentum packets.

    On a plain position packet the result is
    ``-i*hbar*q' + i*u*q/(tau**2 + t)`` over the same envelope.
    """
    if pkt.sort is Sort.POSITION:
        return pkt.with_coeffs(-1j * pkt.hbar * _derivative(pkt))
    return pkt.with_coeffs(P.polymulx(pkt.coeffs))


def commutator(pkt: GaussianPacket) -> GaussianPacket:
    """
    ``(x p - p x)`` applied to ``pkt``; equals ``i*hbar`` times the input.

    Example
    -------
    >>> out = commutator(position_packet((1, 2j, 3), t=0.5j))
    >>> out.isclose(position_packet((1j, -2, 3j), t=0.5j))
    True
    """
    xp = apply_x(apply_p(pkt)).coeffs
    px = apply_p(apply_x(pkt)).coeffs
    return pkt.with_coeffs(P.polysub(xp, px))


def fourier(pkt: GaussianPacket, p0=None) -> GaussianPacket:
    """
    Fourier transform of a position packet: same polynomial in ``p - p0``,
    momentum envelope of the same width, prefactor ``1/sqrt(tau**2 + t)``.

    Parameters
    ----------
    pkt : GaussianPacket
        Position packet without phases.
    p0 : float, optional
        Momentum centre; defaults to the packet's dual centre.

    Example
    -------
    >>> fourier(position_packet(tau=2.0)).coeffs
    ((0.5+0j),)
    """
    _require(pkt, Sort.POSITION)
    _require_plain(pkt, 'The Fourier transform')
    center = pkt.dual if p0 is None else p0
    scale = 1.0 / np.sqrt(pkt.width)
    return replace(pkt, sort=Sort.MOMENTUM, coeffs=tuple(c * scale for c in pkt.coeffs),
                   center=center, dual=pkt.center)


def inverse_fourier(pkt: GaussianPacket, x0=None) -> GaussianPacket:
    """Inverse of :func:`fourier`; multiplies by ``sqrt(tau**2 + t)``."""
    _require(pkt, Sort.MOMENTUM)
    center = pkt.dual if x0 is None else x0
    scale = np.sqrt(pkt.width)
    return replace(pkt, sort=Sort.POSITION, coeffs=tuple(c * scale for c in pkt.coeffs),
                   center=center, dual=pkt.center)


def quadratic_phase_evolution(pkt: GaussianPacket, t_phys: float) -> GaussianPacket:
    """
    Free evolution ``exp(-i t p^2 / 2 m hbar)`` for the time ``t_phys``.

    The extension moves to ``t + i*t_phys/m``. Position packets must be of
    degree zero; on momentum packets the evolution is a multiplication and
    any polynomial is allowed.

    Example
    -------
    >>> quadratic_phase_evolution(position_packet(tau=0.1), 2.0).t
    2j
    """
    if t_phys == 0:
        return pkt
    shift = 1j * t_phys / pkt.constants.mass
    if pkt.sort is Sort.POSITION:
        _require_plain(pkt, 'Free evolution')
        if pkt.degree > 0:
            raise PacketError('Free evolution of position packets is closed only for degree 0.')
        return replace(pkt, t=pkt.t + shift)
    old = pkt.width
    scale = np.sqrt(old) / np.sqrt(old + shift)
    return replace(pkt, coeffs=tuple(c * scale for c in pkt.coeffs), t=pkt.t + shift)


def phase_multiply_x(pkt: GaussianPacket, f, s: float) -> GaussianPacket:
    """
    Multiply a position packet by ``exp(i*s*f(u))`` with ``u = x - x0``.

    Constant terms rotate the polynomial, linear terms add to the kick and
    quadratic terms fold into the width. Phases of degree three or more are
    kept as annotations that only :func:`eval_packet` and the quadrature
    routines understand.

    Example
    -------
    >>> pkt = phase_multiply_x(position_packet(), (0.0, 2.0), 0.5)
    >>> pkt.kick
    1.0
    """
    _require(pkt, Sort.POSITION)
    f = _real_poly(f)
    if s == 0 or all(c == 0 for c in f):
        return pkt
    if len(f) > 3:
        return replace(pkt, phases=pkt.phases + ((float(s), f),))
    a0, a1, a2 = (list(c.real for c in f) + [0.0, 0.0])[:3]
    coeffs = np.array(pkt.coeffs) * np.exp(1j * s * a0)
    t = pkt.t
    if a2:
        w = pkt.width
        folded = 1.0 / (1.0 / w - 2j * pkt.hbar * s * a2)
        coeffs = coeffs * (np.sqrt(folded) / np.sqrt(w))
        t = folded - pkt.tau ** 2
    return replace(pkt, coeffs=_trim(coeffs), kick=pkt.kick + s * a1, t=t)


##############################################################################
# Propagators


def imperfect_propagator(x1, x0, t_phys, tau, constants=None):
    """
    Closed form ``exp(-(x1-x0)^2 / 2 hbar w) / sqrt(2 pi hbar w)`` with
    ``w = tau**2 + i*t_phys/m``.
    """
    constants = constants or PhysicalConstants()
    w = tau ** 2 + 1j * t_phys / constants.mass
    if w == 0:
        raise UndefinedLimitError('tau = 0 and t = 0 leave the propagator undefined.')
    delta = x1 - x0
    return complex(np.exp(-delta ** 2 / (2.0 * constants.hbar * w))
                   / np.sqrt(2.0 * math.pi * constants.hbar * w))


def exact_propagator(x1, x0, t_phys, constants=None):
    """
    Free-particle propagator ``sqrt(m / 2 pi i hbar t) exp(i m (x1-x0)^2 / 2 hbar t)``.

    Example
    -------
    >>> K = exact_propagator(0.0, 0.0, 1.0)
    >>> round(abs(K), 6), round(np.angle(K) / math.pi, 6)
    (0.398942, -0.25)
    """
    constants = constants or PhysicalConstants()
    if t_phys == 0:
        raise UndefinedLimitError('The exact propagator at t = 0 is a delta distribution.')
    m, hbar = constants.mass, constants.hbar
    delta = x1 - x0
    return complex(np.sqrt(m / (2j * math.pi * hbar * t_phys))
                   * np.exp(1j * m * delta ** 2 / (2.0 * hbar * t_phys)))


def propagator(x1, x0, t_phys, tau, constants=None):
    """
    Imperfect propagator ``<x1, U(t) x0>`` at the fiber over ``tau``.

    Computed through the packet operations: the packet at ``x0`` is evolved
    freely and paired with the packet at ``x1`` by :func:`inner_u`. At
    ``tau = 0`` the limit element, the exact propagator, is returned.

    Parameters
    ----------
    x1, x0 : float
        End and start positions.
    t_phys : float
        Elapsed time.
    tau : float
        Imperfection parameter, non-negative.
    constants : PhysicalConstants, optional

    Raises
    ------
    UndefinedLimitError
        When ``tau`` and ``t_phys`` are both zero.

    Example
    -------
    >>> K = propagator(0.0, 0.0, 1.0, 1e-3)
    >>> round(abs(K), 6)
    0.398942
    """
    constants = constants or PhysicalConstants()
    if tau < 0:
        raise PacketError("tau must be non-negative, got {}.".format(tau))
    if tau == 0:
        return exact_propagator(x1, x0, t_phys, constants)
    final = position_packet(center=x1, tau=tau, constants=constants)
    start = quadratic_phase_evolution(position_packet(center=x0, tau=tau, constants=constants), t_phys)
    return inner_u(final, start).value


class ClassLimitReport(NamedTuple):
    exact: complex
    distances: Tuple[float, ...]

    @property
    def converges(self):
        d = self.distances
        return all(b <= a + 1e-15 for a, b in zip(d, d[1:])) and d[-1] < d[0]


def propagator_class_limit(x1, x0, t_phys, chain, constants=None, samples=9) -> ClassLimitReport:
    """
    Sup distance between the imperfect and the exact propagator over each
    element of a chain of ``tau`` intervals shrinking to zero.

    Example
    -------
    >>> from metsheafpy.topology import FilterChain
    >>> report = propagator_class_limit(0.0, 1.0, 1.0, FilterChain.shrink_to_zero(4))
    >>> report.converges
    True
    """
    constants = constants or PhysicalConstants()
    exact = exact_propagator(x1, x0, t_phys, constants)
    distances = []
    for k, U in enumerate(chain, 1):
        taus = list(U.sample(samples)) + [U.hi]
        sup = max(abs(propagator(x1, x0, t_phys, tau, constants) - exact) for tau in taus)
        LOGGER.debug("chain element %d: sup |K_tau - K| = %.3e", k, sup)
        distances.append(sup)
    return ClassLimitReport(exact, tuple(distances))


def momentum_width(tau, t=0j, constants=None):
    """
    Variance ``hbar / Re(tau**2 + t)`` of the momentum envelope.

    Example
    -------
    >>> momentum_width(2.0)
    0.25
    """
    constants = constants or PhysicalConstants()
    w = tau ** 2 + complex(t)
    if not w.real > 0:
        raise PacketError('Non-normalizable width.')
    return constants.hbar / w.real


##############################################################################
# Norms


def _shifted_quadratic(e, center):
    # e0 + e1 (x - c) + e2 (x - c)^2 written in powers of x
    e0, e1, e2 = (list(e) + [0j, 0j, 0j])[:3]
    return np.array([e0 - e1 * center + e2 * center ** 2, e1 - 2.0 * e2 * center, e2])


def support_window(*packets, tail=1e-12):
    """
    Interval outside of which every packet's modulus is a Gaussian tail of
    mass below ``tail`` relative to its peak, polynomial factors included.
    """
    lo, hi = math.inf, -math.inf
    reach = math.sqrt(2.0 * math.log(1.0 / tail))
    for pkt in packets:
        half = pkt.sigma * (reach + math.sqrt(2.0 * pkt.degree) + 1.0)
        lo, hi = min(lo, pkt.center - half), max(hi, pkt.center + half)
    return lo, hi


def _quad_complex(func, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500):
    re, re_err = integrate.quad(lambda x: func(x).real, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
    im, im_err = integrate.quad(lambda x: func(x).imag, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
    return complex(re, im), math.hypot(re_err, im_err)


def l2_inner(a: GaussianPacket, b: GaussianPacket) -> complex:
    """
    Hermitian product ``integral conj(a) b``.

    Exact for packets without phase annotations: the square is completed
    and the polynomial part integrated with Gauss-Hermite nodes. Annotated
    packets fall back to adaptive quadrature.
    """
    if a.sort is not b.sort:
        raise SortMismatchError('Cannot pair packets of different sorts.')
    if a.phases or b.phases:
        lo, hi = support_window(a, b)
        value, _ = _quad_complex(lambda x: np.conj(eval_packet(a, x)) * eval_packet(b, x), lo, hi)
        return value
    c0, c1, c2 = np.conj(_shifted_quadratic(a.exponent, a.center)) + _shifted_quadratic(b.exponent, b.center)
    A = -c2
    shift = c1 / (2.0 * A)
    root = np.sqrt(A)
    nodes, weights = hermgauss((a.degree + b.degree) // 2 + 1)
    x = nodes / root + shift
    poly = P.polyval(x - a.center, np.conj(a.coeffs)) * P.polyval(x - b.center, b.coeffs)
    scale = np.conj(a.prefactor) * b.prefactor * np.exp(c0 + c1 ** 2 / (4.0 * A)) / root
    return complex(scale * np.dot(weights, poly))


def l2_norm(pkt: GaussianPacket) -> float:
    """
    L2 norm of a packet.

    Example
    -------
    >>> round(l2_norm(position_packet()) ** 2, 12) == round(0.5 / math.sqrt(math.pi), 12)
    True
    """
    return math.sqrt(max(0.0, l2_inner(pkt, pkt).real))


def l2_distance(a: GaussianPacket, b: GaussianPacket) -> float:
    square = l2_inner(a, a).real + l2_inner(b, b).real - 2.0 * l2_inner(a, b).real
    return math.sqrt(max(0.0, square))


def schwartz_seminorm(pkt: GaussianPacket, alpha=0, beta=0, points=2001) -> float:
    """
    Seminorm ``sup |x^alpha D^beta f(x)|`` of the packet.

    The derivative is taken symbolically, the supremum located on a grid
    covering the Gaussian support and polished with a bounded scalar
    minimisation.

    Example
    -------
    >>> round(schwartz_seminorm(position_packet()), 6)
    0.398942
    >>> round(schwartz_seminorm(position_packet((0, 1))), 6)
    0.241971
    """
    alpha, beta = int(alpha), int(beta)
    if not (0 <= alpha <= SEMINORM_CAP and 0 <= beta <= SEMINORM_CAP):
        raise ValueError("Seminorm orders must lie in [0, {}].".format(SEMINORM_CAP))
    if alpha == 0 and beta == 0 and pkt.degree == 0:
        return float(abs(pkt.coeffs[0] * pkt.prefactor))
    q = np.array(pkt.coeffs)
    slope = P.polyder(pkt.log_envelope)
    for _ in range(beta):
        q = P.polyadd(P.polyder(q), P.polymul(q, slope))
    q = P.polymul(q, P.polypow([pkt.center, 1.0], alpha))
    envelope = pkt.log_envelope

    def modulus(u):
        return np.abs(P.polyval(u, q) * pkt.prefactor * np.exp(P.polyval(u, envelope)))

    reach = pkt.sigma * (9.0 + 2.0 * math.sqrt(alpha + beta + len(q))) + abs(pkt.center)
    grid = np.linspace(-reach, reach, points)
    values = modulus(grid)
    k = int(np.argmax(values))
    step = grid[1] - grid[0]
    polished = optimize.minimize_scalar(lambda u: -float(modulus(u)), method='bounded',
                                        bounds=(grid[k] - step, grid[k] + step),
                                        options={'xatol': 1e-12})
    return float(max(values[k], -polished.fun))


##############################################################################
# The packet sheaf


class PacketPair(NamedTuple):
    """Element of a packet fiber: a position and a momentum packet."""
    position: GaussianPacket
    momentum: GaussianPacket


def packet_pair(tau, coeffs=(1.0,), x0=0.0, p0=0.0, t=0j, constants=None, cap=DEGREE_CAP):
    """
    The paired packets ``(q(x-x0) phi_(tau,t), q(p-p0) phi_1/(tau,t))``.

    Example
    -------
    >>> pair = packet_pair(1.0)
    >>> round(abs(eval_packet(pair.momentum, 0.0)), 6)
    0.398942
    """
    constants = constants or PhysicalConstants()
    return PacketPair(GaussianPacket(Sort.POSITION, coeffs, x0, tau, t, constants, dual=p0, cap=cap),
                      GaussianPacket(Sort.MOMENTUM, coeffs, p0, tau, t, constants, dual=x0, cap=cap))


PACKET_SIGNATURE = Signature.build(
    relations={'nrm': (1, math.inf), 'amp': (2, math.inf)},
    functions={'xop': (1, math.inf), 'pop': (1, math.inf), 'ft': (1, math.inf), 'evolve': (1, 1.0)})


@dataclass(frozen=True)
class PacketSheafSpec:
    """
    Parameters of the packet sheaf.

    Attributes
    ----------
    constants : PhysicalConstants
    evolve_time : float
        Time the ``evolve`` function symbol advances by.
    span : tuple
        Range of position centres offered to quantifiers.
    cap : int
        Degree cap of the packets.
    """
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    evolve_time: float = 1.0
    span: Tuple[float, float] = (-2.0, 2.0)
    cap: int = DEGREE_CAP

    def __post_init__(self):
        if not self.span[0] <= self.span[1]:
            raise ValueError('span must be an ordered pair.')


class PacketFiber(Fiber):
    """
    Packet pairs over one value of ``tau``.

    The distance is the larger of the two capped L2 distances; ``nrm`` is
    the capped sup norm of the position packet and ``amp`` the capped
    modulus of the defined position inner product.
    """

    signature = PACKET_SIGNATURE

    def __init__(self, tau, spec: PacketSheafSpec):
        self.tau = tau
        self.spec = spec

    def distance(self, a, b):
        return max(min(1.0, l2_distance(a.position, b.position)),
                   min(1.0, l2_distance(a.momentum, b.momentum)))

    def relation(self, name, args):
        if name == 'nrm':
            return min(1.0, schwartz_seminorm(args[0].position))
        if name == 'amp':
            return min(1.0, abs(inner_u(args[0].position, args[1].position).value))
        return super().relation(name, args)

    def function(self, name, args):
        s = args[0]
        if name == 'xop':
            return PacketPair(apply_x(s.position), apply_x(s.momentum))
        if name == 'pop':
            return PacketPair(apply_p(s.position), apply_p(s.momentum))
        if name == 'ft':
            return PacketPair(inverse_fourier(s.momentum), fourier(s.position))
        if name == 'evolve':
            T = self.spec.evolve_time
            return PacketPair(quadratic_phase_evolution(s.position, T),
                              quadratic_phase_evolution(s.momentum, T))
        return super().function(name, args)

    def sample(self, size=64):
        lo, hi = self.spec.span
        centers = np.linspace(lo, hi, max(1, int(size)))
        return ElementSample(tuple(packet_pair(self.tau, x0=c, constants=self.spec.constants,
                                               cap=self.spec.cap) for c in centers), math.inf)


def packet_section(coeffs=(1.0,), x0=0.0, p0=0.0, t=0j, spec=None, name=None):
    """
    The section ``tau -> packet_pair(tau, coeffs, x0, p0, t)``, defined
    wherever the width stays normalizable.

    Example
    -------
    >>> sigma = packet_section()
    >>> sigma(1.0).position.width
    (1+0j)
    """
    spec = spec or PacketSheafSpec()
    t = complex(t)
    coeffs = _trim(coeffs)
    domain = Interval(math.sqrt(max(0.0, -t.real)), math.inf)

    def evaluate(tau):
        return packet_pair(tau, coeffs, x0, p0, t, spec.constants, spec.cap)
    return Section(domain, evaluate, family='packet', params=(coeffs, x0, p0, t), name=name)


class PacketFamily(SectionFamily):
    """Degree-zero sections with centres spread over the configured span."""

    name = 'packet'

    def __init__(self, spec: PacketSheafSpec):
        self.spec = spec

    def candidates(self, U, res, anchors=()):
        lo, hi = self.spec.span
        centers = np.linspace(lo, hi, res.family_size)
        return CandidateSet(tuple(packet_section(x0=float(c), spec=self.spec) for c in centers), math.inf)


def build_packet_sheaf(spec=None, sections=None, name='packet'):
    """
    The sheaf of packet pairs over ``(0, inf)``.

    The catalog holds the standard section ``sigma`` plus ``sections``.

    Example
    -------
    >>> sheaf = build_packet_sheaf()
    >>> pair = sheaf.section('sigma')(1.0)
    >>> sheaf.fiber(1.0).distance(pair, pair)
    0.0
    """
    spec = spec or PacketSheafSpec()
    catalog = {'sigma': packet_section(spec=spec, name='sigma')}
    catalog.update(sections or {})
    LOGGER.debug("packet sheaf with %d catalog sections", len(catalog))
    return MetricSheaf(RealInterval(0.0, math.inf), lambda tau: PacketFiber(tau, spec),
                       PACKET_SIGNATURE, families=[PacketFamily(spec)], name=name, catalog=catalog)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
