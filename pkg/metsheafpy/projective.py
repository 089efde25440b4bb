"""
projective.py

Metric sheaves whose fibers are projective spaces of finite-dimensional
complex vector spaces equipped with a Hermitian operator.

Two constructions are provided:

* the lattice sheaf over the finite subsets ``I`` of an eigenbasis universe,
  whose fiber over ``I`` is the projectivisation of ``V_I = span{x_i : i in I}``;
* the parametric sheaf over an interval ``X`` whose fiber over ``R`` is the
  projective space of ``C^n`` carrying the operator ``A_R``.

Fibers are two-sorted. Rays carry the Fubini-Study metric rescaled by
``2/pi`` so the diameter is 1; values of the numerical range are affinely
rescaled to [0, 1] by ``v -> (v + N) / (2N)``, ``N`` being the largest
operator norm over the sheaf.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from metsheafpy.forcing import force_local, force_point
from metsheafpy.logic import (AtomDist, AtomRel, Condition, ElementSample, Fiber, Inf, Max,
                              Negation, Signature, Sup, TruncSub, Var,
                              parse_condition)
from metsheafpy.sheaf import (CandidateSet, MetricSheaf, Resolution, Section, SectionFamily,
                              Verdict)
from metsheafpy.topology import Cone, FiniteSubsetLattice, FilterChain, Interval, RealInterval
from metsheafpy.utilis import read_matrix

LOGGER = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
KERNEL_TOL = 1e-12


class ProjectiveError(ValueError):
    pass


class ZeroImageError(ProjectiveError):
    pass


class InsufficientUniverseError(ProjectiveError):
    pass


class InconsistentRestrictionError(ProjectiveError):
    pass


##############################################################################
# Rays and the Fubini-Study metric


def _canonical(vector, tol=1e-9):
    """Unit vector whose first entry above ``tol`` in modulus is real positive."""
    v = np.asarray(vector, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if v.size == 0 or norm < KERNEL_TOL:
        raise ProjectiveError('A ray needs a nonzero vector.')
    v = v / norm
    big = np.flatnonzero(np.abs(v) > tol)
    k = int(big[0]) if big.size else int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


class Ray(object):
    """
    The equivalence class ``[x]`` of a nonzero vector under ``y = c x``.

    The stored representative has unit norm and its first non-negligible
    entry is real and positive.

    Example
    -------
    >>> Ray([0, 2j]) == Ray([0, 1])
    True
    >>> Ray([1, 0]).dim
    2
    """

    __slots__ = ('vector',)

    def __init__(self, vector):
        self.vector = _canonical(vector)

    @property
    def dim(self):
        return self.vector.size

    def __eq__(self, other):
        if not isinstance(other, Ray) or other.dim != self.dim:
            return NotImplemented
        return abs(abs(np.vdot(self.vector, other.vector)) - 1.0) <= 1e-12

    __hash__ = None

    def __repr__(self):
        return "Ray({})".format(np.array2string(self.vector, precision=4, suppress_small=True))


def _as_ray(r):
    return r if isinstance(r, Ray) else Ray(r)


def _angle(r1, r2):
    x, y = _as_ray(r1).vector, _as_ray(r2).vector
    if x.size != y.size:
        raise ProjectiveError("rays of dimension {} and {} cannot be compared".format(x.size, y.size))
    if np.array_equal(x, y):
        return 0.0
    # fixed operand order, so the angle is symmetric to the last bit
    if x.tobytes() > y.tobytes():
        x, y = y, x
    inner = np.vdot(x, y)
    perp = np.linalg.norm(y - inner * x)
    return math.atan2(perp, abs(inner))


def fubini_study(r1, r2, raw=False):
    """
    Fubini-Study distance between two rays.

    Parameters
    ----------
    r1, r2 : Ray or array_like
        Rays, or nonzero vectors standing for their rays.
    raw : bool
        Return the geodesic angle in ``[0, pi/2]`` instead of the rescaled
        distance in [0, 1].

    Example
    -------
    >>> fubini_study([1, 0], [0, 1])
    1.0
    >>> round(fubini_study([1, 0], [1, 1]), 12)
    0.5
    """
    theta = _angle(r1, r2)
    if raw:
        return theta
    return min(1.0, max(0.0, 2.0 * theta / math.pi))


def projection_p(r1, r2):
    """
    Squared projection ``|<x, y>|^2`` of unit representatives.

    Computed from the same angle as :func:`fubini_study`, so that
    ``d = (2/pi) * arccos(sqrt(P))`` holds by construction.

    Example
    -------
    >>> round(projection_p([1, 0], [1, 1]), 12)
    0.5
    """
    return min(1.0, max(0.0, math.cos(_angle(r1, r2)) ** 2))


def scaled(value, bound):
    """Affine map of ``[-bound, bound]`` onto [0, 1]."""
    return min(1.0, max(0.0, (value + bound) / (2.0 * bound)))


##############################################################################
# Operators


class OperatorContext(object):
    """
    A Hermitian operator with its ordered eigendecomposition.

    Eigenvalues are ascending. Equal eigenvalues are ordered lexicographically
    on the components of their canonical eigenvectors, so ``e1`` comes before
    ``e2``.

    Parameters
    ----------
    matrix : array_like
        Square Hermitian matrix.
    aux : dict, optional
        Named auxiliary operators ``K_alpha``; each must have trivial kernel.

    Raises
    ------
    ProjectiveError
        The matrix is not square or not Hermitian within 1e-12, or an
        auxiliary operator is singular or of the wrong shape.

    Example
    -------
    >>> ctx = OperatorContext(np.diag([3.0, 1.0]))
    >>> ctx.eigenvalues.tolist(), ctx.norm
    ([1.0, 3.0], 3.0)
    """

    def __init__(self, matrix, aux=None):
        A = np.asarray(matrix, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ProjectiveError("operator must be a nonempty square matrix, got shape {}".format(A.shape))
        scale = max(1.0, float(np.max(np.abs(A))))
        if np.max(np.abs(A - A.conj().T)) > HERMITIAN_TOL * scale:
            raise ProjectiveError('operator is not Hermitian')
        values, vectors = scipy.linalg.eigh(A)
        columns = [_canonical(vectors[:, i]) for i in range(A.shape[0])]

        def order(i):
            flat = []
            for c in columns[i]:
                flat.extend((-round(c.real, 10), -round(c.imag, 10)))
            return (round(float(values[i]), 10), tuple(flat))
        idx = sorted(range(A.shape[0]), key=order)
        self.matrix = A
        self.eigenvalues = np.array([float(values[i]) for i in idx])
        self.eigenvectors = np.column_stack([columns[i] for i in idx])
        self.norm = float(np.max(np.abs(self.eigenvalues)))
        self.numerical_range = (float(self.eigenvalues[0]), float(self.eigenvalues[-1]))
        smallest = float(np.min(np.abs(self.eigenvalues)))
        self.condition = self.norm / smallest if smallest > KERNEL_TOL * max(self.norm, 1.0) else math.inf
        self.aux = {}
        for name, K in (aux or {}).items():
            K = np.asarray(K, dtype=complex)
            if K.shape != A.shape:
                raise ProjectiveError("auxiliary operator '{}' has shape {}".format(name, K.shape))
            sv = scipy.linalg.svdvals(K)
            if sv[-1] <= KERNEL_TOL * max(sv[0], 1.0):
                raise ProjectiveError("auxiliary operator '{}' has a nontrivial kernel".format(name))
            self.aux[name] = (K, float(sv[0]), float(sv[0] / sv[-1]))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def eigenray(self, i):
        return Ray(self.eigenvectors[:, i])


def _check_dim(ctx, r):
    if r.dim != ctx.dim:
        raise ProjectiveError("ray of dimension {} for an operator on C^{}".format(r.dim, ctx.dim))


def expected_value(ctx: OperatorContext, r) -> float:
    """
    Expected value ``<A x, x> / <x, x>``; lies in the numerical range.

    Example
    -------
    >>> ctx = OperatorContext(np.diag([1.0, 3.0]))
    >>> round(expected_value(ctx, [1, 1]), 12)
    2.0
    """
    r = _as_ray(r)
    _check_dim(ctx, r)
    return float(np.vdot(r.vector, ctx.matrix @ r.vector).real)


def apply_operator(ctx: OperatorContext, r, name=None) -> Ray:
    """
    The ray ``[A x]``, or ``[K x]`` for the auxiliary operator ``name``.

    Raises
    ------
    ZeroImageError
        ``x`` lies in the kernel of the operator.
    """
    r = _as_ray(r)
    _check_dim(ctx, r)
    M = ctx.matrix if name is None else ctx.aux[name][0]
    image = M @ r.vector
    if np.linalg.norm(image) <= KERNEL_TOL * max(ctx.norm, 1.0):
        raise ZeroImageError("{} maps {!r} to the zero vector".format(name or 'A', r))
    return Ray(image)


def uniform_moduli(ctx: OperatorContext, eps: float):
    """
    Moduli ``delta(eps) = sqrt(1 + eps/|A|) - 1`` of the operator and
    ``arccos(1 - delta**2 / 2)`` of the expected value.

    Example
    -------
    >>> delta, big_delta = uniform_moduli(OperatorContext(np.eye(2)), 3.0)
    >>> round(delta, 12), round(big_delta, 12) == round(math.pi / 3, 12)
    (1.0, True)
    """
    if eps <= 0:
        raise ValueError('eps must be positive.')
    if ctx.norm == 0:
        raise ProjectiveError('moduli are undefined for the zero operator')
    delta = math.sqrt(1.0 + eps / ctx.norm) - 1.0
    return delta, math.acos(max(-1.0, 1.0 - 0.5 * delta ** 2))


def read_operator(path):
    """
    Read a dense complex matrix: ``n`` on the first line, then ``n*n``
    whitespace-separated ``re im`` pairs in row-major order.
    """
    try:
        return read_matrix(path)
    except ValueError as err:
        raise ProjectiveError("{}: {}".format(path, err)) from None


##############################################################################
# Fibers


def coefficient_rays(dim, size, rng=None):
    """
    Unit coefficient vectors offered for a ``dim``-dimensional fiber.

    Returns
    -------
    list, float
        The vectors, basis vectors first, and the rescaled covering radius:
        0 for dimension 1, the grid radius for dimension 2 and ``inf`` for
        the random rays used from dimension 3 on.

    Example
    -------
    >>> rays, radius = coefficient_rays(1, 10)
    >>> len(rays), radius
    (1, 0.0)
    """
    if dim <= 0:
        return [], math.inf
    units = [np.eye(dim, dtype=complex)[i] for i in range(dim)]
    if dim == 1:
        return units, 0.0
    if dim == 2:
        step = math.sqrt(math.pi / max(size, 4))
        na = max(3, int(math.ceil(0.5 * math.pi / step)) + 1)
        da = 0.5 * math.pi / (na - 1)
        grid = list(units)
        for k in range(1, na - 1):
            a = k * da
            # azimuth spacing scales with sin(2a) so each row covers a band of width da
            nb = max(1, int(math.ceil(math.pi * math.sin(2.0 * a) / da)))
            for j in range(nb):
                grid.append(np.array([math.cos(a), np.exp(2j * math.pi * j / nb) * math.sin(a)]))
        return grid, 2.0 * da / math.pi
    rng = rng if rng is not None else np.random.default_rng(0)
    extra = rng.normal(size=(size, dim)) + 1j * rng.normal(size=(size, dim))
    return units + [v / np.linalg.norm(v) for v in extra], math.inf


def _coeff_key(coeffs):
    return tuple(complex(round(c.real, 12), round(c.imag, 12)) for c in np.asarray(coeffs, dtype=complex))


def projective_signature(dim, condition=math.inf, aux=None):
    """
    Signature shared by the projective fibers.

    ``P`` and ``Ea`` move at most ``pi/2`` per unit of rescaled distance,
    ``A`` at most by its condition number; ``nrm`` and ``lam1..lam<dim>`` are
    nullary.
    """
    relations = {'P': (2, 0.5 * math.pi), 'Ea': (1, 0.5 * math.pi), 'nrm': (0, 0.0)}
    for i in range(1, dim + 1):
        relations["lam{}".format(i)] = (0, 0.0)
    functions = {'A': (1, condition)}
    for name, (_, _, kappa) in (aux or {}).items():
        relations['E' + name] = (1, math.pi)
        functions[name] = (1, kappa)
    return Signature.build(relations=relations, functions=functions)


class ProjectiveFiber(Fiber):
    """
    Projective space of the span of ``basis`` with the operator of ``ctx``.

    Parameters
    ----------
    ctx : OperatorContext
        Operator acting on the ambient space of the rays.
    basis : ndarray
        Orthonormal eigenvector columns spanning the fiber.
    eigenvalues : sequence of float
        Eigenvalues of the columns, ascending.
    bound : float
        Largest operator norm over the sheaf; scale of the real sort.
    signature : Signature
    seed : int
        Seed of the random rays offered from dimension 3 on.
    """

    def __init__(self, ctx, basis, eigenvalues, bound, signature, seed=0):
        self.ctx = ctx
        self.basis = np.asarray(basis, dtype=complex).reshape(ctx.dim, -1)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.bound = bound
        self.signature = signature
        self.seed = seed

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def numerical_range(self):
        return float(self.eigenvalues[0]), float(self.eigenvalues[-1])

    @property
    def norm(self):
        return float(np.max(np.abs(self.eigenvalues))) if self.dim else 0.0

    def ray(self, coeffs):
        return Ray(self.basis @ np.asarray(coeffs, dtype=complex))

    def distance(self, a, b):
        return fubini_study(a, b)

    def relation(self, name, args):
        if name == 'P':
            return projection_p(*args)
        if name == 'Ea':
            return scaled(expected_value(self.ctx, args[0]), self.bound)
        if name == 'nrm':
            return scaled(self.norm, self.bound)
        if name.startswith('lam') and name[3:].isdigit():
            i = int(name[3:])
            if 1 <= i <= self.dim:
                return scaled(float(self.eigenvalues[i - 1]), self.bound)
        if name.startswith('E') and name[1:] in self.ctx.aux:
            K, norm, _ = self.ctx.aux[name[1:]]
            x = args[0].vector
            return min(1.0, abs(np.vdot(x, K @ x)) / norm)
        return super().relation(name, args)

    def function(self, name, args):
        if name == 'A':
            return apply_operator(self.ctx, args[0])
        if name in self.ctx.aux:
            return apply_operator(self.ctx, args[0], name)
        return super().function(name, args)

    def sample(self, size=64):
        coeffs, radius = coefficient_rays(self.dim, size, np.random.default_rng(self.seed))
        return ElementSample(tuple(self.ray(c) for c in coeffs), radius)


##############################################################################
# The lattice sheaf


@dataclass(eq=False)
class LatticeSheafSpec:
    """
    A diagonalisable operator on ``C^n`` whose eigenbasis indexes the lattice.

    Index ``i`` of the universe ``{0..n-1}`` is the ``i``-th eigenvector in
    ascending order, so ``V_I = span{x_i : i in I}`` and ``A_I`` is ``A``
    restricted to ``V_I``.

    Attributes
    ----------
    matrix : array_like
        Hermitian operator on the whole universe.
    blocks : dict, optional
        Explicit operators ``A_I`` in the eigenbasis of ``I`` (sorted order);
        checked against each other and against ``matrix``.
    aux : dict
        Auxiliary trivial-kernel operators.
    seed : int
        Seed of the random rays of large fibers.
    """
    matrix: np.ndarray
    blocks: Optional[Dict[frozenset, np.ndarray]] = None
    aux: Dict[str, np.ndarray] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.ctx = OperatorContext(self.matrix, self.aux)
        self.universe = frozenset(range(self.ctx.dim))
        self.bound = self.ctx.norm if self.ctx.norm > 0 else 1.0
        self.signature = projective_signature(self.ctx.dim, self.ctx.condition, self.ctx.aux)
        self._check_blocks()

    @classmethod
    def diagonal(cls, values, **kwargs):
        return cls(np.diag(np.asarray(values, dtype=float)), **kwargs)

    def _check_blocks(self):
        blocks = {frozenset(I): np.asarray(B, dtype=complex) for I, B in (self.blocks or {}).items()}
        for I, B in blocks.items():
            idx = sorted(I)
            if not I <= self.universe or B.shape != (len(idx), len(idx)):
                raise InconsistentRestrictionError("block over {} does not fit the universe".format(idx))
            expected = np.diag(self.ctx.eigenvalues[idx])
            if np.max(np.abs(B - expected), initial=0.0) > 1e-10 * self.bound:
                raise InconsistentRestrictionError(
                    "A over {} is not the restriction of the operator".format(idx))
        for I, B in blocks.items():
            for J, C in blocks.items():
                if I < J:
                    pos = [sorted(J).index(i) for i in sorted(I)]
                    rest = [p for p in range(len(J)) if p not in pos]
                    if (np.max(np.abs(C[np.ix_(pos, pos)] - B), initial=0.0) > 1e-10 * self.bound or
                            np.max(np.abs(C[np.ix_(rest, pos)]), initial=0.0) > 1e-10 * self.bound):
                        raise InconsistentRestrictionError(
                            "A over {} does not extend A over {}".format(sorted(J), sorted(I)))

    def eigenvalues_of(self, I):
        return self.ctx.eigenvalues[sorted(I)]

    def restriction(self, I) -> OperatorContext:
        """``A_I`` as an operator on ``C^|I|`` in the eigenbasis of ``I``."""
        I = self._within(I)
        return OperatorContext(np.diag(self.eigenvalues_of(I)))

    def _within(self, I):
        I = frozenset(I)
        if not I <= self.universe:
            raise InsufficientUniverseError("indices {} lie outside the universe of size {}".format(
                sorted(I - self.universe), len(self.universe)))
        return I

    def fiber(self, J):
        J = self._within(J)
        idx = sorted(J)
        return ProjectiveFiber(self.ctx, self.ctx.eigenvectors[:, idx], self.ctx.eigenvalues[idx],
                               self.bound, self.signature, self.seed)

    def _coefficients(self, root, coeffs):
        idx = sorted(root)
        if isinstance(coeffs, dict):
            coeffs = [coeffs.get(i, 0.0) for i in idx]
        coeffs = np.asarray(coeffs, dtype=complex).ravel()
        if coeffs.size != len(idx):
            raise ProjectiveError("{} coefficients for a cone root of size {}".format(coeffs.size, len(idx)))
        if np.linalg.norm(coeffs) < KERNEL_TOL:
            raise ProjectiveError('section coefficients must not all vanish')
        return idx, coeffs

    def ray_section(self, root, coeffs, name=None) -> Section:
        """
        The constant section ``sigma_x`` on the cone over ``root`` with
        ``x = sum_i c_i x_i``; ``coeffs`` follows the sorted root or maps
        indices to coefficients.
        """
        root = self._within(root)
        idx, coeffs = self._coefficients(root, coeffs)
        ray = Ray(self.ctx.eigenvectors[:, idx] @ coeffs)
        return Section(Cone(root, self.universe), lambda J: ray, family='ray',
                       params=(tuple(idx), _coeff_key(coeffs / np.linalg.norm(coeffs))), name=name)

    def eigen_section(self, i, name=None) -> Section:
        return self.ray_section(frozenset({i}), [1.0], name=name or "x{}".format(i))

    def value_section(self, root, coeffs, name=None) -> Section:
        """
        The real-sort section ``mu_c`` on the cone over ``root``: the
        weighted eigenvalue mean ``sum |c_i|^2 lam_i / sum |c_i|^2`` of the
        root, rescaled to [0, 1].
        """
        root = self._within(root)
        idx, coeffs = self._coefficients(root, coeffs)
        weights = np.abs(coeffs) ** 2
        value = float(np.dot(weights, self.ctx.eigenvalues[idx]) / np.sum(weights))
        level = scaled(value, self.bound)
        return Section(Cone(root, self.universe), lambda J: level, family='value',
                       params=(tuple(idx), _coeff_key(weights)), sort='real', name=name)

    def raw_value(self, level):
        """Undo the real-sort rescaling."""
        return (2.0 * level - 1.0) * self.bound


class LatticeRayFamily(SectionFamily):
    """Ray sections on a cone built from coefficients over its root."""

    name = 'ray'
    sort = 'ray'

    def __init__(self, spec: LatticeSheafSpec):
        self.spec = spec

    def candidates(self, U, res, anchors=()):
        if not isinstance(U, Cone) or not U.root <= self.spec.universe:
            return CandidateSet((), math.inf)
        coeffs, radius = coefficient_rays(len(U.root), res.family_size,
                                          np.random.default_rng(res.seed))
        return CandidateSet(tuple(self.spec.ray_section(U.root, c) for c in coeffs), radius)


class LatticeSheaf(MetricSheaf):
    """The lattice sheaf of a :class:`LatticeSheafSpec`."""

    def __init__(self, spec: LatticeSheafSpec, sections=None, name='lattice'):
        super().__init__(FiniteSubsetLattice(spec.universe), spec.fiber, spec.signature,
                         families=[LatticeRayFamily(spec)], name=name, catalog=sections, sort='ray')
        self.spec = spec


def build_lattice_sheaf(spec: LatticeSheafSpec, sections=None, name='lattice') -> LatticeSheaf:
    """
    Build the sheaf over the lattice of finite subsets of the eigenbasis.

    The catalog holds the eigenvector sections ``x<i>`` on the cones over
    ``{i}`` together with any sections given.

    Example
    -------
    >>> sheaf = build_lattice_sheaf(LatticeSheafSpec.diagonal([1.0, 2.0, 3.0]))
    >>> fiber = sheaf.fiber(frozenset({0, 1}))
    >>> fiber.dim, fiber.numerical_range
    (2, (1.0, 2.0))
    """
    catalog = {"x{}".format(i): spec.eigen_section(i) for i in sorted(spec.universe)}
    catalog.update(sections or {})
    LOGGER.debug("lattice sheaf over a universe of %d indices", len(spec.universe))
    return LatticeSheaf(spec, catalog, name)


##############################################################################
# The parametric sheaf


@dataclass(eq=False)
class ParametricOperatorSpec:
    """
    The family ``A_R = U(R) diag(d) U(R)^*`` with ``U(R) = exp(-i R G)`` over
    the interval ``(a, b)``.

    Attributes
    ----------
    diagonal : sequence of float
        Eigenvalues of every ``A_R``; distinct values keep the eigenvector
        sections continuous.
    generator : array_like, optional
        Hermitian generator ``G``; a seeded random one by default.
    interval : tuple
        Finite base interval.
    aux : dict
        Auxiliary trivial-kernel operators, fixed in ``R``.
    seed : int
    """
    diagonal: Sequence[float]
    generator: Optional[np.ndarray] = None
    interval: tuple = (0.0, 1.0)
    aux: Dict[str, np.ndarray] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.diagonal = np.asarray(self.diagonal, dtype=float)
        n = self.diagonal.size
        if n < 1:
            raise ProjectiveError('the parametric operator needs at least one eigenvalue')
        a, b = self.interval
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError('the parametric base must be a finite interval')
        if len(set(np.round(self.diagonal, 12))) < n:
            LOGGER.warning('repeated eigenvalues; eigenvector sections may jump')
        if self.generator is None:
            rng = np.random.default_rng(self.seed)
            G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            G = 0.5 * (G + G.conj().T)
            self.generator = G / max(np.linalg.norm(G, 2), 1.0)
        G = np.asarray(self.generator, dtype=complex)
        if G.shape != (n, n) or np.max(np.abs(G - G.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(G))):
            raise ProjectiveError('the generator must be a Hermitian matrix of matching size')
        self.generator = G
        self.reference = 0.5 * (a + b)
        self.bound = float(np.max(np.abs(self.diagonal))) or 1.0
        probe = OperatorContext(np.diag(self.diagonal), self.aux)
        self.signature = projective_signature(n, probe.condition, probe.aux)
        self._contexts = {}
        self._reference_vectors = self.context(self.reference).eigenvectors

    @property
    def dim(self):
        return self.diagonal.size

    def matrix(self, R):
        U = scipy.linalg.expm(-1j * R * self.generator)
        return U @ np.diag(self.diagonal) @ U.conj().T

    def context(self, R) -> OperatorContext:
        try:
            return self._contexts[R]
        except KeyError:
            ctx = OperatorContext(self.matrix(R), self.aux)
            self._contexts[R] = ctx
            return ctx

    def basis(self, R):
        """Eigenvectors of ``A_R`` with phases aligned to the middle of the base."""
        vectors = self.context(R).eigenvectors
        if R == self.reference:
            return vectors
        overlaps = np.einsum('ij,ij->j', self._reference_vectors.conj(), vectors)
        phases = np.where(np.abs(overlaps) > 1e-12, overlaps.conj() / np.maximum(np.abs(overlaps), 1e-300), 1.0)
        return vectors * phases

    def fiber(self, R):
        ctx = self.context(R)
        return ProjectiveFiber(ctx, self.basis(R), ctx.eigenvalues, self.bound, self.signature, self.seed)

    def _coefficients(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex).ravel()
        if coeffs.size != self.dim or np.linalg.norm(coeffs) < KERNEL_TOL:
            raise ProjectiveError("need {} coefficients, not all zero".format(self.dim))
        return coeffs

    def ray_section(self, coeffs, domain=None, name=None) -> Section:
        """``sigma_c(R) = [sum_i c_i x_i^R]``."""
        coeffs = self._coefficients(coeffs)
        domain = domain if domain is not None else Interval(*self.interval)

        def evaluate(R):
            return Ray(self.basis(R) @ coeffs)
        return Section(domain, evaluate, family='ray',
                       params=(_coeff_key(coeffs / np.linalg.norm(coeffs)),), name=name)

    def eigen_section(self, i, name=None) -> Section:
        coeffs = np.zeros(self.dim)
        coeffs[i] = 1.0
        return self.ray_section(coeffs, name=name or "x{}".format(i))

    def value_section(self, coeffs, domain=None, name=None) -> Section:
        """Real-sort ``mu_c(R)``, the weighted eigenvalue mean rescaled to [0, 1]."""
        coeffs = self._coefficients(coeffs)
        weights = np.abs(coeffs) ** 2
        level = scaled(float(np.dot(weights, self.diagonal[np.argsort(self.diagonal)]) / np.sum(weights)),
                       self.bound)
        domain = domain if domain is not None else Interval(*self.interval)
        return Section(domain, lambda R: level, family='value', params=(_coeff_key(weights),),
                       sort='real', name=name)


class ParametricRayFamily(SectionFamily):
    """Global sections ``sigma_c`` for the coefficient rays of the fiber dimension."""

    name = 'ray'
    sort = 'ray'

    def __init__(self, spec: ParametricOperatorSpec):
        self.spec = spec

    def candidates(self, U, res, anchors=()):
        coeffs, radius = coefficient_rays(self.spec.dim, res.family_size,
                                          np.random.default_rng(res.seed))
        return CandidateSet(tuple(self.spec.ray_section(c) for c in coeffs), radius)


class ParametricSheaf(MetricSheaf):
    """The parametric-operator sheaf of a :class:`ParametricOperatorSpec`."""

    def __init__(self, spec: ParametricOperatorSpec, sections=None, name='parametric'):
        super().__init__(RealInterval(*spec.interval), spec.fiber, spec.signature,
                         families=[ParametricRayFamily(spec)], name=name, catalog=sections,
                         sort='ray')
        self.spec = spec


def build_parametric_sheaf(spec: ParametricOperatorSpec, sections=None,
                           name='parametric') -> ParametricSheaf:
    """
    Build the sheaf of ``A_R`` over the base interval; the catalog holds the
    eigenvector sections ``x<i>`` and eigenvalue sections ``mu<i>``.
    """
    catalog = {}
    for i in range(spec.dim):
        catalog["x{}".format(i)] = spec.eigen_section(i)
        unit = np.zeros(spec.dim)
        unit[i] = 1.0
        catalog["mu{}".format(i)] = spec.value_section(unit, name="mu{}".format(i))
    catalog.update(sections or {})
    return ParametricSheaf(spec, catalog, name)


##############################################################################
# Sentences


def _names(count, stem='s'):
    return ["{}{}".format(stem, i) for i in range(1, count + 1)]


def _max_all(formulas):
    out = formulas[0]
    for f in formulas[1:]:
        out = Max(out, f)
    return out


def _apart(a, b):
    return [Negation(AtomDist(Var(a), Var(b))), AtomRel('P', (Var(a), Var(b)))]


def _orthogonal_prefix(names, inner=None):
    """
    ``inf s1 ... inf sn`` over the pairwise orthogonality terms, each pair
    term placed as soon as both of its variables are bound.
    """
    body = inner
    for m in range(len(names) - 1, -1, -1):
        terms = []
        for prev in names[:m]:
            terms.extend(_apart(prev, names[m]))
        if body is not None:
            terms.append(body)
        body = Inf(names[m], _max_all(terms) if terms else AtomDist(Var(names[m]), Var(names[m])))
    return body


def dimension_sentence(k):
    """
    ``phi_{dim>k}``: ``k + 1`` mutually orthogonal rays exist. Its value is 0
    exactly on fibers of dimension above ``k``.

    Example
    -------
    >>> from metsheafpy.logic import format_formula
    >>> format_formula(dimension_sentence(1))
    'inf s1. inf s2. max(not(d(s1, s2)), P(s1, s2))'
    """
    if k < 0:
        raise ValueError('k must be non-negative.')
    return _orthogonal_prefix(_names(k + 1))


def exact_dimension_sentence(k):
    """
    ``k`` orthogonal rays exist and every ray lies in their span; the inner
    clause ``sup t. 1 -. P(s1, t) -. ... -. P(sk, t)`` is 0 exactly on the span.
    """
    if k < 1:
        raise ValueError('k must be positive.')
    names = _names(k)
    span = Negation(AtomRel('P', (Var(names[0]), Var('t'))))
    for name in names[1:]:
        span = TruncSub(span, AtomRel('P', (Var(name), Var('t'))))
    return _orthogonal_prefix(names, Sup('t', span))


def norm_sentence(eps):
    """``inf s. |Ea(s) -. nrm| < eps``, forced when ``A`` is positive semidefinite."""
    return parse_condition("inf s. |Ea(s) -. nrm| < {}".format(eps))


def eigenvector_condition(eps):
    """``d(A(s), s) < eps``: ``s`` is an eigenvector of ``A`` up to ``eps``."""
    return parse_condition("d(A(s), s) < {}".format(eps))


def eigenvalue_condition(eps, name='mu'):
    """``|Ea(s) -. mu| < eps`` for a real-sort section bound to ``name``."""
    return parse_condition("|Ea(s) -. {0}| < {1}".format(name, eps), names=[name])


def eigenvalue_sentence(i, eps):
    """``inf s. |Ea(s) -. lam<i>| < eps``; the witness is the ``i``-th eigenvector."""
    return parse_condition("inf s. |Ea(s) -. lam{}| < {}".format(i, eps))


##############################################################################
# Forcing statements


def orthogonality_forcing(sheaf: LatticeSheaf, n: int, eps: float,
                          res: Optional[Resolution] = None) -> Verdict:
    """
    Force ``max(P(s_i, s_j) | i < j <= n) < eps`` for the eigenvector
    sections ``x0 .. x<n-1>`` on the cone over ``{0..n}``.

    Raises
    ------
    InsufficientUniverseError
        The universe has fewer than ``n + 1`` indices.
    """
    spec = sheaf.spec
    if n < 1:
        raise ValueError('n must be positive.')
    if n + 1 > len(spec.universe):
        raise InsufficientUniverseError("{} orthogonal sections need {} indices, the universe has {}".format(
            n, n + 1, len(spec.universe)))
    names = _names(n)
    binding = {name: spec.eigen_section(i) for i, name in enumerate(names)}
    terms = [AtomRel('P', (Var(a), Var(b))) for j, b in enumerate(names) for a in names[:j]]
    formula = _max_all(terms) if terms else AtomDist(Var(names[0]), Var(names[0]))
    U = Cone(frozenset(range(n + 1)), spec.universe)
    verdict = force_local(sheaf, U, Condition(formula, '<', eps), binding, res)
    LOGGER.debug("orthogonality of %d sections below %g: %s", n, eps, verdict.status.value)
    return verdict


def dimension_sentence_forcing(sheaf: MetricSheaf, k: int, eps: float, where=None,
                               exact=False, res: Optional[Resolution] = None) -> Verdict:
    """
    Force ``phi_{dim>k} < eps``, or the exact-dimension sentence when
    ``exact`` is set, at a base point or on an open set.

    Parameters
    ----------
    where : base point or OpenSet, optional
        A Cone or Interval forces locally; anything else is a point. Defaults
        to the whole base.
    """
    formula = exact_dimension_sentence(k) if exact else dimension_sentence(k)
    cond = Condition(formula, '<', eps)
    where = where if where is not None else sheaf.base.whole()
    if isinstance(where, (Cone, Interval)):
        return force_local(sheaf, where, cond, {}, res)
    return force_point(sheaf, where, cond, {}, res)


class LemmaReport(NamedTuple):
    verdicts: List[Verdict]
    chain: FilterChain
    empty_meet: bool

    @property
    def holds(self):
        return self.empty_meet and all(v.forced for v in self.verdicts)


def lemma_premise(sheaf: LatticeSheaf, kmax: int, res: Optional[Resolution] = None) -> LemmaReport:
    """
    Along the cone chain ``U_k = [l_{0..k})`` check that each ``U_k`` forces
    ``phi_{dim>k} < 2**-k`` and that no finite index set lies in every
    ``U_k``.
    """
    spec = sheaf.spec
    if kmax + 1 > len(spec.universe):
        raise InsufficientUniverseError("a chain of depth {} needs {} indices".format(kmax, kmax + 1))
    chain = FilterChain.cones(spec.universe, kmax)
    verdicts = []
    for k in range(1, kmax + 1):
        LOGGER.debug("chain element %d", k)
        verdicts.append(dimension_sentence_forcing(sheaf, k, 2.0 ** -k, chain.element(k), res=res))
    probes = [frozenset(range(j)) for j in range(len(spec.universe) + 1)]
    empty = all(chain.exclusion_index(J) is not None for J in probes)
    return LemmaReport(verdicts, chain, empty)


def eigenvalue_count(sheaf: LatticeSheaf, kmax: int, res: Optional[Resolution] = None):
    """
    Per cone ``[l_{0..k})``: the number of distinct eigenvalues, counting
    neighbouring eigenvector sections whose expected values are forced apart.

    Returns
    -------
    list of (k, count)
    """
    spec = sheaf.spec
    res = res or Resolution()
    cond = parse_condition("|Ea(s) -. Ea(t)| > {}".format(res.tol))
    out = []
    for k in range(1, min(kmax, len(spec.universe) - 1) + 1):
        U = Cone(frozenset(range(k + 1)), spec.universe)
        count = 1
        for i in range(k):
            binding = {'s': spec.eigen_section(i), 't': spec.eigen_section(i + 1)}
            if force_local(sheaf, U, cond, binding, res).forced:
                count += 1
        out.append((k, count))
    return out


def operator_growth(sheaf: LatticeSheaf, kmax: int):
    """Norms ``|A_I|`` along the cone chain, as ``(k, norm)`` pairs."""
    spec = sheaf.spec
    return [(k, float(np.max(np.abs(spec.eigenvalues_of(range(k + 1))))))
            for k in range(1, min(kmax, len(spec.universe) - 1) + 1)]


class ContinuityReport(NamedTuple):
    max_ratio: float
    bound: float
    pairs: int

    @property
    def holds(self):
        return self.max_ratio <= self.bound + 1e-9


def operator_continuity(sheaf: MetricSheaf, x, res: Optional[Resolution] = None) -> ContinuityReport:
    """
    Largest sampled ratio ``d(A r1, A r2) / d(r1, r2)`` in the fiber over
    ``x`` against the Lipschitz constant of ``A`` in the signature.
    """
    res = res or Resolution()
    fiber = sheaf.fiber(x)
    rays = fiber.sample(res.family_size).elements
    worst, pairs = 0.0, 0
    for i, r1 in enumerate(rays):
        for r2 in rays[i + 1:]:
            d = fiber.distance(r1, r2)
            if d < 1e-9:
                continue
            image = fiber.distance(fiber.function('A', [r1]), fiber.function('A', [r2]))
            worst = max(worst, image / d)
            pairs += 1
    return ContinuityReport(worst, sheaf.signature.functions['A'].lipschitz, pairs)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
