"""
test_wavepacket.py

Unit tests for Gaussian wave packets, their defined operations, the
imperfect propagator, the packet sheaf and the quadrature oracle.

Tests are arranged into classes based on the aspect of the module being tested
"""

import cmath
import math
from timeit import default_timer as timer

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from metsheafpy.forcing import NeighborhoodError, force_point, neighborhood_witness
from metsheafpy.logic import parse_condition
from metsheafpy.quadrature import *
from metsheafpy.sheaf import Resolution
from metsheafpy.topology import FilterChain
from metsheafpy.wavepacket import *

##############################################################################

"""
Trial packets, sheaves and strategies to be used in subsequent testing
"""

standard = position_packet()
narrow = position_packet(tau=0.5)
kicked = position_packet((1.0, 0.5j, -0.2), center=0.3, tau=0.7, t=0.1 + 0.4j, kick=0.8)
partner = position_packet((0.2, 1.0), center=-0.5, tau=0.7, t=0.2j)

sheaf = build_packet_sheaf()
res = Resolution(grid=5, family_size=33, max_refinement=2)

parts = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
polynomials = st.lists(st.tuples(parts, parts), min_size=1, max_size=9).map(
    lambda pairs: [complex(a, b) for a, b in pairs])
taus = st.floats(min_value=0.5, max_value=2.0)
extensions = st.builds(complex, st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=-2.0, max_value=2.0))
hbars = st.floats(min_value=0.5, max_value=2.0)


def padded(*coeff_lists):
    n = max(len(c) for c in coeff_lists)
    return [np.pad(np.array(c, dtype=complex), (0, n - len(c))) for c in coeff_lists]


def amp_condition(threshold):
    return parse_condition('amp(s, s) > {}'.format(threshold), PACKET_SIGNATURE)

##############################################################################


class TestPackets:
    """
    Construction, validation and evaluation of packets.
    """

    def test_standard_peak(self):
        assert abs(eval_packet(standard, 0.0)) == pytest.approx(0.398942, abs=1e-6)
        assert abs(eval_packet(standard, 1.0)) == pytest.approx(0.241971, abs=1e-6)

    def test_vectorised_evaluation(self):
        xs = np.linspace(-3.0, 3.0, 7)
        values = eval_packet(kicked, xs)
        assert values.shape == (7,)
        assert values[2] == pytest.approx(eval_packet(kicked, xs[2]), abs=1e-15)

    def test_trailing_zeros_trimmed(self):
        assert position_packet((1.0, 2.0, 0.0, 0.0)).degree == 1

    def test_non_normalizable(self):
        with pytest.raises(PacketError):
            position_packet(tau=1.0, t=-1.0)
        with pytest.raises(PacketError):
            position_packet(tau=0.0)

    def test_degree_cap(self):
        with pytest.raises(DegreeCapError):
            position_packet(np.ones(DEGREE_CAP + 2))
        edge = position_packet(np.ones(DEGREE_CAP + 1))
        with pytest.raises(DegreeCapError):
            apply_x(edge)

    def test_momentum_phases_rejected(self):
        with pytest.raises(PacketError):
            momentum_packet(kick=1.0)

    def test_constants_validated(self):
        with pytest.raises(ValueError):
            PhysicalConstants(hbar=0.0)
        with pytest.raises(TypeError):
            GaussianPacket('position', constants=1.0)

    def test_sigma(self):
        assert standard.sigma == pytest.approx(1.0)
        assert momentum_packet(tau=2.0).sigma == pytest.approx(0.5)


class TestOperators:
    """
    Position and momentum operators and the canonical commutator.
    """

    @settings(max_examples=100, deadline=None)
    @given(polynomials, taus, extensions, hbars)
    def test_commutator_identity(self, coeffs, tau, t, hbar):
        pkt = position_packet(coeffs, center=0.3, tau=tau, t=t, constants=PhysicalConstants(hbar=hbar))
        got, expected = padded(commutator(pkt).coeffs, 1j * hbar * np.array(pkt.coeffs))
        assert np.max(np.abs(got - expected)) <= 1e-12 * max(1.0, np.max(np.abs(expected)))

    @settings(max_examples=30, deadline=None)
    @given(polynomials, taus)
    def test_commutator_momentum_sort(self, coeffs, tau):
        pkt = momentum_packet(coeffs, center=-0.4, tau=tau)
        got, expected = padded(commutator(pkt).coeffs, 1j * np.array(pkt.coeffs))
        assert np.max(np.abs(got - expected)) <= 1e-12 * max(1.0, np.max(np.abs(expected)))

    def test_position_multiplies(self):
        assert apply_x(position_packet((1.0, 1.0))).coeffs == (0j, 1 + 0j, 1 + 0j)

    def test_momentum_on_gaussian(self):
        # -i d/dx of the envelope is i u / w times the envelope
        out = apply_p(position_packet(tau=1.0, t=0.5j))
        assert out.isclose(position_packet((0.0, 1j / (1.0 + 0.5j)), t=0.5j))

    def test_momentum_matches_finite_difference(self):
        h = 1e-5
        x = 0.7
        numeric = -1j * (eval_packet(kicked, x + h) - eval_packet(kicked, x - h)) / (2 * h)
        assert eval_packet(apply_p(kicked), x) == pytest.approx(numeric, abs=1e-8)


class TestInnerProducts:
    """
    Defined inner products and their literal integrals.
    """

    def test_self_pairing(self):
        value = inner_u(narrow, narrow).value
        assert value.real == pytest.approx(1.0 / math.sqrt(2.0 * math.pi * 0.25), rel=1e-12)

    def test_envelope_adds_extensions(self):
        a = position_packet(center=0.2, tau=0.5, t=0.1j)
        b = position_packet(center=-0.3, tau=0.5, t=0.3j)
        pairing = inner_u(a, b)
        assert pairing.at == pytest.approx(0.5)
        assert pairing.packet.t == pytest.approx(0.4j)

    def test_literal_convolution(self):
        a = position_packet(center=0.2, tau=0.5, t=0.1j)
        b = position_packet(center=-0.3, tau=0.5, t=0.3j)
        literal = quadrature_oracle('inner', (a, b))
        expected = eval_packet(position_packet(tau=0.5, t=0.25 + 0.4j), 0.5)
        assert abs(literal - expected) < 1e-9

    def test_parameter_gap(self):
        # the defined pairing keeps tau**2 where the literal integral has 2*tau**2
        small = inner_parameter_gap(position_packet(tau=0.1), position_packet(tau=0.1))
        smaller = inner_parameter_gap(position_packet(tau=0.01), position_packet(tau=0.01))
        assert small == pytest.approx(0.01, rel=1e-6)
        assert 75.0 <= small / smaller <= 125.0

    def test_sort_mismatch(self):
        with pytest.raises(SortMismatchError):
            inner_u(standard, momentum_packet())
        with pytest.raises(SortMismatchError):
            inner_v(standard, standard)

    def test_tau_mismatch(self):
        with pytest.raises(PacketError):
            inner_u(standard, narrow)

    def test_phases_rejected(self):
        with pytest.raises(PacketError):
            inner_u(kicked, kicked)


class TestFourier:
    """
    The defined Fourier pair against the oracle.
    """

    def test_round_trip(self):
        pkt = position_packet((1.0, 0.5j, -0.25), center=0.3, tau=0.8, t=0.2j, dual=-0.4)
        back = inverse_fourier(fourier(pkt))
        assert back.isclose(pkt)

    def test_centres_swap(self):
        pkt = position_packet(center=1.5, dual=-0.5)
        ft = fourier(pkt)
        assert (ft.sort, ft.center, ft.dual) == (Sort.MOMENTUM, -0.5, 1.5)
        assert fourier(pkt, p0=2.0).center == 2.0

    def test_against_oracle(self):
        pkt = position_packet(center=0.5, tau=1.0, t=0.3j, dual=-0.2)
        ft = fourier(pkt)
        for p in np.linspace(-3.0, 3.0, 20):
            assert abs(quadrature_oracle('fourier', (pkt, p)) - eval_packet(ft, p)) <= 1e-8

    def test_kicked_rejected(self):
        with pytest.raises(PacketError):
            fourier(kicked)
        with pytest.raises(SortMismatchError):
            inverse_fourier(standard)


class TestEvolution:
    """
    Free evolution and phase multiplication.
    """

    def test_position_extension(self):
        pkt = quadratic_phase_evolution(position_packet(tau=0.1), 2.0)
        assert pkt.t == 2j
        heavy = quadratic_phase_evolution(position_packet(constants=PhysicalConstants(mass=4.0)), 2.0)
        assert heavy.t == 0.5j

    def test_position_degree_restricted(self):
        with pytest.raises(PacketError):
            quadratic_phase_evolution(position_packet((1.0, 1.0)), 1.0)

    def test_momentum_evolution_is_multiplication(self):
        pkt = momentum_packet((1.0, 0.5, 0.25j), center=0.4, tau=0.9)
        evolved = quadratic_phase_evolution(pkt, 0.7)
        ps = np.linspace(-2.0, 2.0, 9)
        phase = np.exp(-1j * 0.7 * (ps - 0.4) ** 2 / 2.0)
        assert np.allclose(eval_packet(evolved, ps), eval_packet(pkt, ps) * phase, atol=1e-12, rtol=0)

    def test_evolution_commutes_with_fourier(self):
        pkt = position_packet(tau=0.8, dual=0.3)
        left = fourier(quadratic_phase_evolution(pkt, 1.2))
        right = quadratic_phase_evolution(fourier(pkt), 1.2)
        ps = np.linspace(-2.0, 2.0, 9)
        assert np.allclose(eval_packet(left, ps), eval_packet(right, ps), atol=1e-12, rtol=0)

    def test_linear_phase(self):
        pkt = position_packet((1.0, 0.5j), center=0.4, tau=0.8, t=0.2j)
        xs = np.linspace(-3.0, 3.0, 13)
        out = phase_multiply_x(pkt, (0.0, 1.5), 0.7)
        expected = eval_packet(pkt, xs) * np.exp(1j * 0.7 * 1.5 * (xs - 0.4))
        assert out.kick == pytest.approx(1.05)
        assert np.allclose(eval_packet(out, xs), expected, atol=1e-12, rtol=0)

    def test_quadratic_phase_folds_into_width(self):
        pkt = position_packet((1.0, 0.5j), center=0.4, tau=0.8, t=0.2j)
        xs = np.linspace(-3.0, 3.0, 13)
        out = phase_multiply_x(pkt, (0.3, 0.0, 2.0), 0.25)
        expected = eval_packet(pkt, xs) * np.exp(1j * 0.25 * (0.3 + 2.0 * (xs - 0.4) ** 2))
        assert out.plain
        assert np.allclose(eval_packet(out, xs), expected, atol=1e-10, rtol=0)

    def test_cubic_phase_annotated(self):
        pkt = position_packet(center=0.4)
        xs = np.linspace(-3.0, 3.0, 13)
        out = phase_multiply_x(pkt, (0.0, 0.0, 0.0, 1.0), 0.5)
        assert len(out.phases) == 1
        expected = eval_packet(pkt, xs) * np.exp(0.5j * (xs - 0.4) ** 3)
        assert np.allclose(eval_packet(out, xs), expected, atol=1e-12, rtol=0)

    def test_zero_phase_is_identity(self):
        assert phase_multiply_x(standard, (0.0, 0.0), 1.0) is standard
        assert phase_multiply_x(standard, (1.0, 2.0), 0.0) is standard


class TestPropagator:
    """
    The imperfect propagator, its limit and the class limit along a chain.
    """

    @pytest.mark.parametrize('t', [0.5, 1.0, 2.0])
    @pytest.mark.parametrize('dx', [0.0, 1.0, 2.0])
    def test_limit_grid(self, t, dx):
        K = propagator(dx, 0.0, t, 1e-3)
        exact = exact_propagator(dx, 0.0, t)
        assert abs(K - exact) / abs(exact) <= 1e-4
        direct = imperfect_propagator(dx, 0.0, t, 1e-3)
        assert abs(K - direct) <= 1e-12 * abs(direct)

    def test_grid_runtime(self):
        tic = timer()
        for t in (0.5, 1.0, 2.0):
            for dx in (0.0, 1.0, 2.0):
                propagator(dx, 0.0, t, 1e-3)
        assert timer() - tic < 1.0

    def test_exact_values(self):
        K = exact_propagator(0.0, 0.0, 1.0)
        assert abs(K) == pytest.approx(0.398942, abs=1e-6)
        assert cmath.phase(K) == pytest.approx(-math.pi / 4, abs=1e-12)

    def test_second_order_convergence(self):
        exact = exact_propagator(1.0, 0.0, 1.0)
        coarse = abs(propagator(1.0, 0.0, 1.0, 1e-2) - exact)
        fine = abs(propagator(1.0, 0.0, 1.0, 5e-3) - exact)
        assert 3.5 <= coarse / fine <= 4.5

    def test_tau_zero_is_exact(self):
        assert propagator(1.0, 0.0, 1.0, 0.0) == exact_propagator(1.0, 0.0, 1.0)

    def test_time_zero_is_delta_approximant(self):
        K = propagator(0.0, 0.0, 0.0, 0.1)
        assert K.real == pytest.approx(1.0 / math.sqrt(2.0 * math.pi * 0.01))
        with pytest.raises(UndefinedLimitError):
            exact_propagator(0.0, 0.0, 0.0)

    def test_undefined_limit(self):
        with pytest.raises(UndefinedLimitError):
            propagator(0.0, 0.0, 0.0, 0.0)
        with pytest.raises(PacketError):
            propagator(0.0, 0.0, 1.0, -0.1)

    def test_class_limit(self):
        report = propagator_class_limit(0.0, 1.0, 1.0, FilterChain.shrink_to_zero(4))
        assert report.converges
        assert report.exact == exact_propagator(0.0, 1.0, 1.0)
        assert len(report.distances) == 4

    def test_momentum_width(self):
        assert momentum_width(2.0) == 0.25
        assert momentum_width(1.0, 1.0) == 0.5
        with pytest.raises(PacketError):
            momentum_width(1.0, -2.0)


class TestNorms:
    """
    L2 norms, distances and Schwartz seminorms.
    """

    def test_standard_norm(self):
        assert l2_norm(standard) ** 2 == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-12)
        assert l2_norm(momentum_packet(tau=2.0)) ** 2 == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)

    def test_evolution_preserves_norm(self):
        evolved = quadratic_phase_evolution(standard, 1.0)
        assert l2_norm(evolved) == pytest.approx(l2_norm(standard), rel=1e-12)

    def test_hermite_matches_quadrature(self):
        lo, hi = support_window(kicked, partner)
        literal = integrate_complex(lambda x: np.conj(eval_packet(kicked, x)) * eval_packet(partner, x), lo, hi)
        assert abs(l2_inner(kicked, partner) - literal.value) < 1e-9

    def test_annotated_norm(self):
        annotated = phase_multiply_x(standard, (0.0, 0.0, 0.0, 1.0), 0.5)
        assert l2_norm(annotated) == pytest.approx(l2_norm(standard), abs=1e-9)

    def test_distance(self):
        assert l2_distance(standard, standard) == 0.0
        far = position_packet(center=10.0)
        assert l2_distance(standard, far) == pytest.approx(math.sqrt(1.0 / math.sqrt(math.pi)), abs=1e-9)
        with pytest.raises(SortMismatchError):
            l2_distance(standard, momentum_packet())

    def test_seminorm_values(self):
        assert schwartz_seminorm(standard) == pytest.approx(0.398942, abs=1e-6)
        assert schwartz_seminorm(standard, alpha=1) == pytest.approx(0.241971, abs=1e-6)
        assert schwartz_seminorm(standard, beta=1) == pytest.approx(0.241971, abs=1e-6)

    def test_seminorm_grid_finite(self):
        pkt = position_packet((1.0, 0.5j, -0.2), center=0.3, tau=0.8, t=0.3 + 0.5j)
        for alpha in range(5):
            for beta in range(5):
                value = schwartz_seminorm(pkt, alpha, beta)
                assert math.isfinite(value) and value > 0

    def test_seminorm_orders_bounded(self):
        with pytest.raises(ValueError):
            schwartz_seminorm(standard, alpha=SEMINORM_CAP + 1)


class TestQuadrature:
    """
    The oracle itself: kinds, tails and failure reporting.
    """

    def test_delta_convergence(self):
        g = lambda x: np.exp(-x ** 2) * np.cos(x)
        ratio = delta_error(0.1, g) / delta_error(0.05, g)
        assert 3.0 <= ratio <= 5.0

    def test_delta_tail(self):
        g = lambda x: np.exp(-x ** 2)
        result = quadrature_oracle('delta', (0.1, g), full_output=True)
        assert result.tail < 1e-12
        assert result.value.real == pytest.approx(1.0 / math.sqrt(1.02), abs=1e-6)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            quadrature_oracle('laplace', (standard,))

    def test_momentum_fourier_rejected(self):
        with pytest.raises(ValueError):
            quadrature_oracle('fourier', (momentum_packet(), 0.0))

    def test_accuracy_failure(self):
        spec = QuadratureSpec(limit=1, accept=1e-12)
        with pytest.raises(QuadratureError) as info:
            integrate_complex(lambda x: complex(math.sqrt(abs(x))), -1.0, 1.3, spec)
        assert info.value.achieved > 1e-12

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(tail=0.0)

    def test_gaussian_tail(self):
        assert gaussian_tail(0.0) == pytest.approx(1.0)
        assert gaussian_tail(8.0) < 1e-12


class TestPacketSheaf:
    """
    The sheaf of packet pairs over the imperfection parameter.
    """

    def test_standard_section(self):
        pair = sheaf.section('sigma')(1.0)
        assert pair.position.isclose(position_packet())
        assert pair.momentum.sort is Sort.MOMENTUM

    def test_section_domain(self):
        sec = packet_section(t=-0.25)
        assert not sec.domain.contains(0.4)
        assert sec.domain.contains(0.6)

    def test_fiber_distance(self):
        fiber = sheaf.fiber(1.0)
        a, b = packet_pair(1.0), packet_pair(1.0, x0=10.0)
        assert fiber.distance(a, b) == pytest.approx(math.sqrt(1.0 / math.sqrt(math.pi)), abs=1e-9)
        assert fiber.distance(a, b) == pytest.approx(fiber.distance(b, a), abs=1e-12)

    def test_relations(self):
        fiber = sheaf.fiber(1.0)
        pair = packet_pair(1.0)
        assert fiber.relation('amp', [pair, pair]) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))
        assert fiber.relation('nrm', [pair]) == pytest.approx(0.398942, abs=1e-6)
        assert fiber.relation('amp', [packet_pair(0.1)] * 2) == 1.0

    def test_functions(self):
        fiber = sheaf.fiber(1.0)
        pair = packet_pair(1.0, x0=0.5, p0=-0.5)
        twice = fiber.function('ft', [fiber.function('ft', [pair])])
        assert twice.position.isclose(pair.position)
        assert fiber.function('evolve', [pair]).position.t == 1j
        assert fiber.function('xop', [pair]).position.degree == 1

    def test_spot_check(self):
        assert sheaf.spot_check(Resolution(grid=3, family_size=8)) is not False

    def test_amplitude_forced(self):
        binding = {'s': sheaf.section('sigma')}
        assert force_point(sheaf, 1.0, amp_condition(0.1), binding, res).forced
        assert force_point(sheaf, 5.0, amp_condition(0.1), binding, res).refuted

    def test_fourier_twice_forced(self):
        cond = parse_condition('d(ft(ft(s)), s) < 0.01', PACKET_SIGNATURE)
        assert force_point(sheaf, 1.0, cond, {'s': sheaf.section('sigma')}, res).forced

    def test_quantified_witness(self):
        cond = parse_condition('inf u. d(u, s) < 0.01', PACKET_SIGNATURE)
        assert force_point(sheaf, 1.0, cond, {'s': sheaf.section('sigma')}, res).forced

    def test_neighborhood_witness(self):
        binding = {'s': sheaf.section('sigma')}
        U = neighborhood_witness(sheaf, 1.0, amp_condition(0.1), binding, res)
        assert U.contains(1.0)
        tight = neighborhood_witness(sheaf, 1.0, amp_condition(0.3), binding, res)
        assert tight.contains(1.0) and not tight.contains(2.0)
        with pytest.raises(NeighborhoodError):
            neighborhood_witness(sheaf, 5.0, amp_condition(0.1), binding, res)
