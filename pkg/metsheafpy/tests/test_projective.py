"""
test_projective.py

Unit tests for rays, the Fubini-Study metric, operator contexts and the
lattice and parametric projective sheaves.

Tests are arranged into classes based on the aspect of the module being tested
"""

import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from scipy.stats import unitary_group

from metsheafpy.forcing import force_local, force_point, max_principle_witness
from metsheafpy.logic import format_formula
from metsheafpy.projective import *
from metsheafpy.sheaf import Resolution
from metsheafpy.topology import Cone, Interval

##############################################################################

"""
Trial operators and sheaves to be used in subsequent testing
"""

e1, e2 = [1.0, 0.0], [0.0, 1.0]
diagonal = OperatorContext(np.diag([1.0, 3.0]))

lattice = build_lattice_sheaf(LatticeSheafSpec.diagonal([1.0, 2.0, 3.0]))
wide = build_lattice_sheaf(LatticeSheafSpec.diagonal(np.arange(1.0, 11.0)))

plane = build_parametric_sheaf(ParametricOperatorSpec([1.0, 2.0]))
line = build_parametric_sheaf(ParametricOperatorSpec([1.0]))
space = build_parametric_sheaf(ParametricOperatorSpec([0.5, 1.0, 2.0]))

res = Resolution(grid=5, family_size=32, max_refinement=2)

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
vectors = arrays(np.float64, 6, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3)


def complex_ray(v):
    return Ray(v[:3] + 1j * v[3:])


@st.composite
def ray_tuples(draw, count=3):
    """Rays of one random dimension between 2 and 8."""
    dim = draw(st.integers(min_value=2, max_value=8))
    parts = arrays(np.float64, 2 * dim, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3)
    return [Ray(v[:dim] + 1j * v[dim:]) for v in (draw(parts) for _ in range(count))]

##############################################################################


class TestRays:
    """
    Ray canonicalisation, the Fubini-Study distance and the projection.
    """

    def test_projective_equality(self):
        assert Ray([1.0, 1.0j]) == Ray([2.0 - 1.0j, 1.0 + 2.0j])
        assert Ray(e1) != Ray(e2)
        assert np.linalg.norm(Ray([3.0, 4.0]).vector) == pytest.approx(1.0, abs=1e-12)

    def test_zero_vector(self):
        with pytest.raises(ProjectiveError):
            Ray([0.0, 0.0])

    def test_distance_examples(self):
        assert fubini_study(e1, e1) == 0.0
        assert fubini_study(e1, e2) == pytest.approx(1.0)
        assert fubini_study(e1, [1.0, 1.0]) == pytest.approx(0.5)
        assert fubini_study(e1, e2, raw=True) == pytest.approx(0.5 * math.pi)

    def test_projection_examples(self):
        assert projection_p([1.0, 2.0j], [1.0, 2.0j]) == pytest.approx(1.0)
        assert projection_p(e1, e2) == pytest.approx(0.0, abs=1e-15)
        assert projection_p(e1, [1.0, 1.0]) == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ProjectiveError):
            fubini_study(e1, [1.0, 0.0, 0.0])

    @settings(max_examples=500)
    @given(ray_tuples(count=2))
    def test_distance_matches_projection(self, rays):
        x, y = rays
        d = fubini_study(x, y)
        assert projection_p(x, y) == pytest.approx(math.cos(0.5 * math.pi * d) ** 2, abs=1e-12)
        assert projection_p(x, y) == projection_p(y, x)
        assert projection_p(x, x) == 1.0

    @settings(max_examples=500)
    @given(ray_tuples())
    def test_metric_axioms(self, rays):
        x, y, z = rays
        assert 0.0 <= fubini_study(x, y) <= 1.0
        assert fubini_study(x, x) == 0.0
        assert fubini_study(x, y) == fubini_study(y, x)
        assert fubini_study(x, z) <= fubini_study(x, y) + fubini_study(y, z) + 1e-9

    @settings(max_examples=500)
    @given(ray_tuples(count=2), st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_unitary_invariance(self, rays, seed):
        x, y = rays
        U = unitary_group.rvs(x.dim, random_state=seed)
        moved = fubini_study(Ray(U @ x.vector), Ray(U @ y.vector))
        assert moved == pytest.approx(fubini_study(x, y), abs=1e-10)


class TestOperators:
    """
    Operator contexts, expected values and moduli.
    """

    def test_rejects_non_hermitian(self):
        with pytest.raises(ProjectiveError):
            OperatorContext([[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(ProjectiveError):
            OperatorContext(np.ones((2, 3)))

    def test_eigen_order_with_ties(self):
        ctx = OperatorContext(np.diag([2.0, 1.0, 2.0]))
        assert ctx.eigenvalues.tolist() == pytest.approx([1.0, 2.0, 2.0])
        assert ctx.eigenray(1) == Ray([1.0, 0.0, 0.0])
        assert ctx.eigenray(2) == Ray([0.0, 0.0, 1.0])
        assert ctx.numerical_range == pytest.approx((1.0, 2.0))

    def test_eigenvectors_orthonormal(self):
        U = unitary_group.rvs(4, random_state=3)
        ctx = OperatorContext(U @ np.diag([-1.0, 0.5, 2.0, 4.0]) @ U.conj().T)
        gram = ctx.eigenvectors.conj().T @ ctx.eigenvectors
        assert np.max(np.abs(gram - np.eye(4))) < 1e-10
        assert ctx.norm == pytest.approx(4.0)

    def test_expected_value_examples(self):
        assert expected_value(diagonal, e1) == pytest.approx(1.0)
        assert expected_value(diagonal, [1.0, 1.0]) == pytest.approx(2.0)
        v = np.array([0.3, 0.8j])
        assert expected_value(diagonal, (2 + 1j) * v) == pytest.approx(expected_value(diagonal, v), abs=1e-12)

    @given(vectors)
    def test_expected_value_in_numerical_range(self, a):
        ctx = OperatorContext(np.diag([-2.0, 0.5, 3.0]))
        value = expected_value(ctx, complex_ray(a))
        assert -2.0 - 1e-12 <= value <= 3.0 + 1e-12

    def test_apply_operator_examples(self):
        assert apply_operator(diagonal, e2) == Ray(e2)
        assert apply_operator(diagonal, [1.0, 1.0]) == Ray([1.0, 3.0])
        with pytest.raises(ZeroImageError):
            apply_operator(OperatorContext(np.diag([0.0, 1.0])), e1)

    def test_uniform_moduli(self):
        delta, big_delta = uniform_moduli(OperatorContext(np.eye(2)), 3.0)
        assert delta == pytest.approx(1.0)
        assert big_delta == pytest.approx(math.pi / 3)
        small = uniform_moduli(OperatorContext(np.eye(2)), 1e-10)
        assert small[0] < 1e-9 and small[1] < 1e-9
        with pytest.raises(ProjectiveError):
            uniform_moduli(OperatorContext(np.zeros((2, 2))), 1.0)

    @pytest.mark.parametrize('scale', [0.5, 1.0, 7.0])
    def test_uniform_moduli_monotone(self, scale):
        ctx = OperatorContext(scale * np.eye(2))
        grid = [uniform_moduli(ctx, eps) for eps in np.logspace(-10, 3, 80)]
        deltas = [g[0] for g in grid]
        big_deltas = [g[1] for g in grid]
        assert all(b >= a for a, b in zip(deltas, deltas[1:]))
        assert all(b >= a for a, b in zip(big_deltas, big_deltas[1:]))
        assert big_deltas[-1] == pytest.approx(math.pi)

    def test_auxiliary_kernel_check(self):
        ctx = OperatorContext(np.eye(2), aux={'K': [[2.0, 0.0], [0.0, 1.0]]})
        assert ctx.aux['K'][2] == pytest.approx(2.0)
        with pytest.raises(ProjectiveError):
            OperatorContext(np.eye(2), aux={'K': [[1.0, 1.0], [1.0, 1.0]]})

    def test_read_operator(self, tmp_path):
        path = tmp_path / 'op.txt'
        path.write_text("2\n1 0  0 1\n0 -1  3 0\n")
        M = read_operator(str(path))
        assert M[0, 1] == 1j and M[1, 1] == 3.0
        path.write_text("2\n1 0 0 1\n")
        with pytest.raises(ProjectiveError):
            read_operator(str(path))


class TestLatticeSheaf:
    """
    The sheaf over the lattice of finite index sets.
    """

    def test_fiber_dimension_and_range(self):
        fiber = lattice.fiber(frozenset({0, 1}))
        assert fiber.dim == 2
        assert fiber.numerical_range == pytest.approx((1.0, 2.0))

    def test_eigen_section_constant(self):
        sigma = lattice.section('x0')
        for J in Cone(frozenset({0}), lattice.spec.universe).sample(10):
            assert sigma(J) == Ray([1.0, 0.0, 0.0])

    def test_value_section(self):
        mu = lattice.spec.value_section(frozenset({0, 1}), [1.0, 1.0])
        assert lattice.spec.raw_value(mu(frozenset({0, 1, 2}))) == pytest.approx(1.5)
        assert mu.sort == 'real'

    def test_restriction_coherence(self):
        spec = lattice.spec
        small, big = spec.fiber(frozenset({0, 1})), spec.fiber(frozenset({0, 1, 2}))
        for ray in small.sample(20).elements:
            assert big.relation('Ea', [ray]) == small.relation('Ea', [ray])
        assert spec.restriction({0, 2}).eigenvalues.tolist() == pytest.approx([1.0, 3.0])

    def test_outside_universe(self):
        with pytest.raises(InsufficientUniverseError):
            lattice.fiber(frozenset({0, 5}))

    def test_inconsistent_blocks(self):
        with pytest.raises(InconsistentRestrictionError):
            LatticeSheafSpec.diagonal([1.0, 2.0], blocks={frozenset({0}): [[1.5]]})
        with pytest.raises(InconsistentRestrictionError):
            LatticeSheafSpec.diagonal([1.0, 2.0], blocks={frozenset({0, 1}): [[1.0, 0.5], [0.5, 2.0]]})
        LatticeSheafSpec.diagonal([1.0, 2.0], blocks={frozenset({0}): [[1.0]],
                                                      frozenset({0, 1}): np.diag([1.0, 2.0])})

    def test_family_by_dimension(self):
        family = LatticeRayFamily(lattice.spec)
        one = family.candidates(Cone(frozenset({1}), lattice.spec.universe), res)
        two = family.candidates(Cone(frozenset({0, 1}), lattice.spec.universe), res)
        three = family.candidates(Cone(frozenset({0, 1, 2}), lattice.spec.universe), res)
        assert len(one.sections) == 1 and one.radius == 0.0
        assert 0 < two.radius < 1
        assert math.isinf(three.radius)
        assert [s(frozenset({0, 1, 2})) for s in three.sections[:3]] == \
            [Ray(v) for v in np.eye(3)]

    @settings(max_examples=50)
    @given(vectors)
    def test_plane_grid_covering(self, a):
        grid, radius = coefficient_rays(2, 64)
        target = Ray(a[:2] + 1j * a[3:5]) if np.linalg.norm(a[:2] + 1j * a[3:5]) > 1e-3 else Ray(e1)
        assert min(fubini_study(target, g) for g in grid) <= radius + 1e-12

    @pytest.mark.parametrize('eps', [1e-6, 0.1])
    def test_orthogonality_small(self, eps):
        assert orthogonality_forcing(lattice, 2, eps, res).forced

    def test_orthogonality_many(self):
        sheaf = build_lattice_sheaf(LatticeSheafSpec.diagonal(np.arange(1.0, 18.0)))
        assert orthogonality_forcing(sheaf, 16, 1e-9, res).forced
        with pytest.raises(InsufficientUniverseError):
            orthogonality_forcing(lattice, 3, 0.1, res)

    def test_dimension_sentence_text(self):
        assert format_formula(dimension_sentence(1)) == \
            'inf s1. inf s2. max(not(d(s1, s2)), P(s1, s2))'
        assert 'sup t. not(P(s1, t)) -. P(s2, t)' in format_formula(exact_dimension_sentence(2))

    def test_dimension_sentence_on_cones(self):
        root = Cone(frozenset({0, 1}), lattice.spec.universe)
        assert dimension_sentence_forcing(lattice, 1, 0.1, root, res=res).forced
        assert dimension_sentence_forcing(lattice, 1, 0.1, frozenset({2}), res=res).refuted

    def test_lemma_premise(self):
        report = lemma_premise(wide, 8, res)
        assert len(report.verdicts) == 8
        assert all(v.forced for v in report.verdicts)
        assert report.empty_meet and report.holds
        with pytest.raises(InsufficientUniverseError):
            lemma_premise(lattice, 5, res)

    def test_growth_and_count(self):
        assert eigenvalue_count(wide, 4, res) == [(1, 2), (2, 3), (3, 4), (4, 5)]
        norms = [n for _, n in operator_growth(wide, 9)]
        assert norms == sorted(norms) and norms[-1] == pytest.approx(10.0)

    def test_repeated_eigenvalues_counted_once(self):
        sheaf = build_lattice_sheaf(LatticeSheafSpec.diagonal([1.0, 1.0, 2.0]))
        assert eigenvalue_count(sheaf, 2, res) == [(1, 1), (2, 2)]

    def test_operator_continuity(self):
        report = operator_continuity(lattice, frozenset({0, 1, 2}), res)
        assert report.pairs > 0
        assert report.bound == pytest.approx(3.0)
        assert report.holds


class TestParametricSheaf:
    """
    The sheaf of a continuously varying operator over an interval.
    """

    def test_phase_alignment(self):
        spec = space.spec
        ref = spec.basis(spec.reference)
        for R in (0.1, 0.3, 0.9):
            overlaps = np.einsum('ij,ij->j', ref.conj(), spec.basis(R))
            assert np.all(overlaps.real > 0)
            assert np.max(np.abs(overlaps.imag)) < 1e-10

    def test_eigen_sections_continuous(self):
        x0 = space.section('x0')
        assert fubini_study(x0(0.5), x0(0.501)) < 1e-2

    @pytest.mark.parametrize('eps', [1e-6, 1e-3, 0.2])
    def test_eigenvector_condition(self, eps):
        binding = {'s': space.section('x1')}
        assert force_point(space, 0.37, eigenvector_condition(eps), binding, res).forced
        assert force_local(space, Interval(0.2, 0.8), eigenvector_condition(eps), binding, res).forced

    @pytest.mark.parametrize('i', [0, 1, 2])
    def test_eigenvalue_condition(self, i):
        binding = {'s': space.section("x{}".format(i)), 'mu': space.section("mu{}".format(i))}
        assert force_local(space, Interval(0.1, 0.9), eigenvalue_condition(1e-6), binding, res).forced

    def test_eigenvalue_condition_wrong_pair(self):
        binding = {'s': space.section('x0'), 'mu': space.section('mu2')}
        assert force_point(space, 0.5, eigenvalue_condition(0.1), binding, res).refuted

    @pytest.mark.parametrize('eps', [1e-9, 0.01, 0.5])
    def test_norm_sentence(self, eps):
        assert force_point(space, 0.25, norm_sentence(eps), res=res).forced

    def test_max_principle_returns_eigenvector(self):
        mu, eps_prime = max_principle_witness(space, Interval(0.2, 0.8), eigenvalue_sentence(1, 0.1),
                                              res=res)
        assert mu.key == space.section('x0').key
        assert eps_prime < 0.1

    def test_exact_dimension_two(self):
        fine = Resolution(grid=3, family_size=2048, max_refinement=1)
        assert dimension_sentence_forcing(plane, 2, 0.1, 0.5, exact=True, res=fine).forced

    def test_exact_dimension_one(self):
        assert dimension_sentence_forcing(line, 2, 0.1, 0.5, exact=True, res=res).refuted

    def test_dimension_above(self):
        assert dimension_sentence_forcing(space, 2, 0.05, 0.4, res=res).forced
        assert dimension_sentence_forcing(line, 1, 0.05, 0.4, res=res).refuted

    def test_signature_moduli(self):
        moduli = space.moduli(0.1)
        assert moduli['P'] == pytest.approx(0.2 / math.pi)
        assert moduli['A'] == pytest.approx(0.1 / 4.0)
        assert math.isinf(moduli['nrm'])

    def test_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            ParametricOperatorSpec([1.0, 2.0], interval=(0.0, math.inf))
