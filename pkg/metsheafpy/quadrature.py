"""
quadrature.py

Adaptive numerical integrals used as an oracle against the defined packet
operations: the literal inner product integral, the Fourier integral and
the pairing of a narrow packet with a test function.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from metsheafpy.wavepacket import (PhysicalConstants, Sort, eval_packet, fourier, inner_u,
                                   position_packet, support_window)

LOGGER = logging.getLogger(__name__)

KINDS = ('inner', 'fourier', 'delta')


class QuadratureError(RuntimeError):
    """Refinement stopped short of the requested accuracy."""

    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Accuracy settings of the oracle.

    Attributes
    ----------
    tail : float
        Bound on the integrand mass left outside the truncated domain.
    epsabs, epsrel : float
        Absolute and relative targets handed to ``scipy.integrate.quad``.
    accept : float
        Largest error estimate accepted before :class:`QuadratureError`.
    limit : int
        Subinterval limit of the adaptive refinement.
    """
    tail: float = 1e-13
    epsabs: float = 1e-14
    epsrel: float = 1e-12
    accept: float = 1e-9
    limit: int = 500

    def __post_init__(self):
        if not (0 < self.tail < 1 and self.epsabs > 0 and self.epsrel > 0 and self.accept > 0):
            raise ValueError('Quadrature tolerances must be positive.')


class QuadratureResult(NamedTuple):
    value: complex
    error: float
    tail: float


def gaussian_tail(reach):
    """
    Mass of a normalised Gaussian beyond ``reach`` standard deviations.

    Example
    -------
    >>> gaussian_tail(8.0) < 1e-12
    True
    """
    return float(special.erfc(reach / math.sqrt(2.0)))


def integrate_complex(func, lo, hi, spec=None, tail=0.0) -> QuadratureResult:
    """
    Integrate a complex function over ``[lo, hi]`` part by part.

    Raises
    ------
    QuadratureError
        When the error estimate exceeds ``spec.accept``.
    """
    spec = spec or QuadratureSpec()
    parts = []
    for part in (np.real, np.imag):
        value, err = integrate.quad(lambda x: float(part(func(x))), lo, hi, epsabs=spec.epsabs,
                                    epsrel=spec.epsrel, limit=spec.limit)
        parts.append((value, err))
    (re, re_err), (im, im_err) = parts
    error = math.hypot(re_err, im_err)
    if error > spec.accept:
        raise QuadratureError("quadrature reached only {:.3e}".format(error), achieved=error)
    return QuadratureResult(complex(re, im), error, tail)


def _inner(a, b, spec):
    lo, hi = support_window(a, b, tail=spec.tail)
    peak = abs(a.prefactor * b.prefactor) * max(a.sigma, b.sigma) * math.sqrt(2.0 * math.pi)
    return integrate_complex(lambda x: eval_packet(a, x) * eval_packet(b, x), lo, hi, spec,
                             peak * spec.tail)


def _fourier(pkt, p, spec):
    if pkt.sort is not Sort.POSITION:
        raise ValueError('The Fourier oracle takes a position packet.')
    hbar = pkt.hbar
    lo, hi = support_window(pkt, tail=spec.tail)

    def integrand(x):
        return np.exp(-1j * (x - pkt.center) * (p - pkt.dual) / hbar) * eval_packet(pkt, x)
    result = integrate_complex(integrand, lo, hi, spec)
    scale = 1.0 / math.sqrt(2.0 * math.pi * hbar)
    return QuadratureResult(result.value * scale, result.error * scale, spec.tail * scale)


def _delta(tau, g, constants, spec):
    pkt = position_packet(tau=tau, constants=constants)
    reach = math.sqrt(2.0) * float(special.erfcinv(spec.tail))
    half = reach * pkt.sigma
    return integrate_complex(lambda x: eval_packet(pkt, x) * g(x), -half, half, spec, gaussian_tail(reach))


def quadrature_oracle(kind, operands, spec=None, full_output=False):
    """
    Numerical counterpart of a defined packet operation.

    Parameters
    ----------
    kind : str
        ``inner``: operands ``(a, b)``, the literal bilinear integral
        ``integral a(x) b(x) dx`` of two position packets.
        ``fourier``: operands ``(pkt, p)``, the transform
        ``(2 pi hbar)^-1/2 integral exp(-i (x-x0)(p-p0)/hbar) pkt(x) dx``.
        ``delta``: operands ``(tau, g)`` or ``(tau, g, constants)``, the
        pairing of the packet ``phi_(tau,0)(., 0)`` with the test function
        ``g``.
    operands : tuple
    spec : QuadratureSpec, optional
    full_output : bool
        Return a :class:`QuadratureResult` instead of the bare value.

    Example
    -------
    >>> pkt = position_packet()
    >>> value = quadrature_oracle('fourier', (pkt, 0.5))
    >>> abs(value - eval_packet(fourier(pkt), 0.5)) < 1e-8
    True
    """
    spec = spec or QuadratureSpec()
    if kind == 'inner':
        result = _inner(*operands, spec)
    elif kind == 'fourier':
        result = _fourier(*operands, spec)
    elif kind == 'delta':
        tau, g = operands[:2]
        constants = operands[2] if len(operands) > 2 else PhysicalConstants()
        result = _delta(tau, g, constants, spec)
    else:
        raise ValueError("Unknown oracle kind '{}'; expected one of {}.".format(kind, ', '.join(KINDS)))
    LOGGER.debug("%s oracle: %r (error %.1e, tail %.1e)", kind, result.value, result.error, result.tail)
    return result if full_output else result.value


def delta_error(tau, g, constants=None, spec=None):
    """
    ``|integral phi_(tau,0)(x, 0) g(x) dx - g(0)|``.

    Example
    -------
    >>> g = lambda x: np.exp(-x ** 2) * np.cos(x)
    >>> 3.5 < delta_error(0.1, g) / delta_error(0.05, g) < 4.5
    True
    """
    constants = constants or PhysicalConstants()
    value = quadrature_oracle('delta', (tau, g, constants), spec)
    return abs(value - g(0.0))


def inner_parameter_gap(a, b, spec=None):
    """
    Gap between the literal inner product integral and :func:`inner_u`,
    measured in the envelope parameter.

    Both packets must be degree zero and share their centre. The literal
    value ``I`` is inverted into ``w = 1/(2 pi hbar I^2)`` and compared with
    the defined parameter ``tau**2 + t_a + t_b``.

    Example
    -------
    >>> a = position_packet(tau=0.1)
    >>> round(inner_parameter_gap(a, a), 9)
    0.01
    """
    if a.degree or b.degree or a.center != b.center:
        raise ValueError('The parameter gap is defined for degree-zero packets with a common centre.')
    defined = inner_u(a, b)
    scale = a.coeffs[0] * b.coeffs[0]
    literal = quadrature_oracle('inner', (a, b), spec) / scale
    w_literal = 1.0 / (2.0 * math.pi * a.hbar * literal ** 2)
    return abs(w_literal - defined.packet.width)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
