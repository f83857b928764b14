'''
Contains the oscillation-eliminating (OE) filter.

The filter is the exact solution operator of a damping equation in which the
hierarchical component of level k (polynomials of degree max(a, b) = k) decays
at rate s * sum_{m <= k} delta_m. Damping rates come from face jumps of the
solution and its physical derivatives; only elements whose zero-order jump
indicator exceeds a threshold are touched.
'''

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_legendre

from configs import (
	OE_SCALE, INDICATOR_THRESHOLD, OE_MODE, OE_MODES, FLAT_TOLERANCE
)
from dgsem import FieldState
from mesh import Mesh
from physics import admissible, sound_speed
from utils.errors import AdmissibilityError, ConfigurationError, GeometryError



def legendre_modes(N: int) -> list[tuple[int, int]]:
	'''
	Tensor Legendre mode indices (a, b) ordered by level max(a, b).
	'''
	modes = [(a, b) for a in range(N + 1) for b in range(N + 1)]
	return sorted(modes, key=lambda mode: (max(mode), mode))


def legendre_vandermonde(nodes: np.ndarray) -> np.ndarray:
	'''
	V[p, a] = P_a(x_p).
	'''
	N = len(nodes) - 1
	return np.stack([eval_legendre(a, nodes) for a in range(N + 1)], axis=-1)



class ProjectionHierarchy:
	'''
	Orthonormal hierarchical bases of Q_N on every element under the
	J-weighted LGL inner product.

	Columns of `basis[e]` are ordered by level; the first (m+1)^2 of them
	span Q_m(element e), so projections onto Q_m are truncations.

	## Parameters
	`mesh`: Mesh whose elements get a basis
	'''

	def __init__(self, mesh: Mesh) -> None:

		N = mesh.degree
		n = N + 1
		self.degree = N
		self.modes = legendre_modes(N)
		self.levels = np.array([max(mode) for mode in self.modes])

		V = legendre_vandermonde(mesh.refops.nodes)
		tensor = np.stack([
			np.outer(V[:, a], V[:, b]).ravel() for a, b in self.modes
		], axis=-1)

		self.weights = mesh.mass.reshape(-1, n * n)
		gram = np.einsum('pa,ep,pb->eab', tensor, self.weights, tensor)
		try:
			factor = np.linalg.cholesky(gram)
		except np.linalg.LinAlgError:
			for e in range(len(gram)):
				try:
					np.linalg.cholesky(gram[e])
				except np.linalg.LinAlgError:
					raise GeometryError(
						'singular projection Gram matrix', element=e
					) from None
			raise

		# basis = tensor L^-T
		whitened = np.linalg.solve(
			factor, np.broadcast_to(tensor.T, gram.shape)
		)
		self.basis = np.swapaxes(whitened, 1, 2)

	def coefficients(
		self,
		values: np.ndarray,
		elems: np.ndarray
	) -> np.ndarray:
		'''
		Hierarchical coefficients (k, n^2, ...) of nodal values (k, n, n, ...).
		'''
		flat = values.reshape(values.shape[0], -1, *values.shape[3:])
		return np.einsum(
			'epa,ep,ep...->ea...', self.basis[elems], self.weights[elems], flat
		)

	def synthesize(
		self,
		coefficients: np.ndarray,
		elems: np.ndarray
	) -> np.ndarray:

		n = self.degree + 1
		flat = np.einsum('epa,ea...->ep...', self.basis[elems], coefficients)
		return flat.reshape(flat.shape[0], n, n, *flat.shape[2:])

	def project(
		self,
		u: np.ndarray,
		elem: int,
		m: int
	) -> np.ndarray:
		'''
		L2 projection P^m of a scalar nodal field onto Q_m (P^-1 := P^0).
		'''
		elems = np.array([elem])
		coeffs = self.coefficients(u[None], elems)
		coeffs[:, self.levels > max(m, 0)] = 0
		return self.synthesize(coeffs, elems)[0]



def projection_decompose(
	u: np.ndarray,
	hierarchy: ProjectionHierarchy,
	elem: int
) -> tuple[float, list[np.ndarray]]:
	'''
	Telescoping split u = u0 + sum_k Delta_k with Delta_k = P^k u - P^{k-1} u.

	:param u: Scalar nodal field (N+1, N+1) on element `elem`
	:returns: The mean u0 and the nodal increments Delta_1..Delta_N
	'''
	elems = np.array([elem])
	coeffs = hierarchy.coefficients(np.asarray(u, dtype=float)[None], elems)[0]
	n = hierarchy.degree + 1
	basis = hierarchy.basis[elem]

	u0 = float((basis[:, 0] * coeffs[0]).mean())
	deltas = []
	for k in range(1, hierarchy.degree + 1):
		level = hierarchy.levels == k
		deltas.append((basis[:, level] @ coeffs[level]).reshape(n, n))
	return u0, deltas



class DampingPath(ABC):
	'''
	Base class for the exact damping operators.
	'''

	def __init__(self, degree: int) -> None:
		self.degree = degree
		self.levels = np.maximum.outer(np.arange(degree + 1), np.arange(degree + 1))

	@abstractmethod
	def __call__(
		self,
		U: np.ndarray,
		elems: np.ndarray,
		factors: np.ndarray
	) -> np.ndarray:
		'''
		Damps elements `elems`.

		:param U: Nodal states (k, n, n, 4) of the listed elements
		:param elems: Element indices
		:param factors: Per-level multipliers (k, N+1), factors[:, 0] = 1
		:returns: Damped nodal states
		'''
		pass



class ModalPath(DampingPath):
	'''
	Tensor Legendre modal damping, exact on affine rectangular elements.
	'''

	def __init__(self, nodes: np.ndarray) -> None:
		super().__init__(len(nodes) - 1)
		self.vandermonde = legendre_vandermonde(nodes)
		self.inverse = np.linalg.inv(self.vandermonde)

	def __call__(
		self,
		U: np.ndarray,
		elems: np.ndarray,
		factors: np.ndarray
	) -> np.ndarray:

		V, Vinv = self.vandermonde, self.inverse
		modal = np.einsum('ap,bq,epqk->eabk', Vinv, Vinv, U)
		modal *= factors[:, self.levels][..., None]
		return np.einsum('pa,qb,eabk->epqk', V, V, modal)



class ProjectionPath(DampingPath):
	'''
	Damping of the increments Delta_k of the J-weighted projection hierarchy.
	'''

	def __init__(self, hierarchy: ProjectionHierarchy) -> None:
		super().__init__(hierarchy.degree)
		self.hierarchy = hierarchy

	def __call__(
		self,
		U: np.ndarray,
		elems: np.ndarray,
		factors: np.ndarray
	) -> np.ndarray:

		hierarchy = self.hierarchy
		coeffs = hierarchy.coefficients(U, elems)
		coeffs *= factors[:, hierarchy.levels][..., None]
		return hierarchy.synthesize(coeffs, elems)



@dataclass
class DampingData:
	'''
	Damping quantities of one element.

	## Parameters
	`sigmas`: (4, N+1) face measures sigma_m per side and level
	`deltas`: (N+1,) damping rates delta_m
	`indicator`: Sum over sides of sigma_0
	`beta`: Wave speed |u_avg| + c_avg
	`h`: Element length scale
	'''
	sigmas: np.ndarray
	deltas: np.ndarray
	indicator: float
	beta: float
	h: float



def resolve_mode(
	mode: str,
	mesh: Mesh
) -> str:
	'''
	Maps 'auto' to 'cartesian' on axis-aligned rectangular meshes and to
	'curvilinear' otherwise.
	'''
	if mode not in OE_MODES:
		raise ConfigurationError(f'oe mode must be one of {OE_MODES}, got {mode!r}')
	if mode == 'auto':
		return 'cartesian' if mesh.is_cartesian() else 'curvilinear'
	return mode


def derivative_multi_indices(
	m: int,
	mode: str
) -> list[tuple[int, int]]:
	'''
	Multi-indices summed at level m: all |alpha| <= m on curvilinear meshes,
	pure x and y derivatives up to order m on Cartesian ones.
	'''
	if mode == 'cartesian':
		return [(0, 0)] + [(n, 0) for n in range(1, m + 1)] \
			+ [(0, n) for n in range(1, m + 1)]
	return [(a, b) for a in range(m + 1) for b in range(m + 1 - a)]


def _face_jump_means(
	values: np.ndarray,
	mesh: Mesh,
	local: np.ndarray,
	elems: np.ndarray
) -> np.ndarray:
	'''
	(1/|f|) int_f |jump| dS for every side of every element in `elems`,
	shape (k, 4, ...). Boundary sides have zero jump.

	`values` holds nodal data for a subset of elements, `local` maps global
	element ids into it.
	'''
	k = len(elems)
	owner = np.repeat(elems, 4)
	side = np.tile(np.arange(4), k)
	neighbor = mesh.neighbor[owner, side]
	boundary = neighbor < 0
	neighbor = np.where(boundary, owner, neighbor)
	neighbor_side = np.where(boundary, side, mesh.neighbor_side[owner, side])
	flipped = mesh.neighbor_reversed[owner, side] & ~boundary

	own = mesh.traces(values, local[owner], side)
	other = mesh.traces(values, local[neighbor], neighbor_side, flipped)
	weight = mesh.refops.weights[None, :] * mesh.measure[owner, side]
	weight = weight.reshape(weight.shape + (1,) * (own.ndim - 2))
	means = (weight * np.abs(own - other)).sum(axis=1) / weight.sum(axis=1)
	means[boundary] = 0
	return means.reshape(k, 4, *means.shape[1:])


def _physical_derivatives(
	U: np.ndarray,
	metrics: tuple[np.ndarray, ...],
	D: np.ndarray,
	alphas: list[tuple[int, int]]
) -> dict[tuple[int, int], np.ndarray]:
	'''
	Nodal d^(a+b) U / dx^a dy^b of the Q_N interpolant by the chain rule,
	applied recursively (y derivatives first).
	'''
	x_xi, x_eta, y_xi, y_eta, jacobian = (metric[..., None] for metric in metrics)

	def reference(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
		return (
			np.einsum('ia,eajk->eijk', D, u),
			np.einsum('ja,eiak->eijk', D, u)
		)

	def d_dx(u: np.ndarray) -> np.ndarray:
		u_xi, u_eta = reference(u)
		return (y_eta * u_xi - y_xi * u_eta) / jacobian

	def d_dy(u: np.ndarray) -> np.ndarray:
		u_xi, u_eta = reference(u)
		return (-x_eta * u_xi + x_xi * u_eta) / jacobian

	derivatives = {(0, 0): U}
	for b in range(1, max(b for _, b in alphas) + 1):
		derivatives[(0, b)] = d_dy(derivatives[(0, b - 1)])
	for a, b in sorted(alphas):
		for order in range(1, a + 1):
			if (order, b) not in derivatives:
				derivatives[(order, b)] = d_dx(derivatives[(order - 1, b)])
	return derivatives



class OEFilter:
	'''
	Selective oscillation-eliminating filter.

	:param mesh: Mesh the field lives on
	:param scale: OE scale factor s in (0, 1]
	:param threshold: Indicator threshold C >= 0
	:param mode: 'auto', 'cartesian', 'curvilinear' or 'off'
	:param factorize: Build the damping operator (False when only the
	indicator and damping rates are needed)

	With mode 'off' the filter is the identity, but the indicator can still be
	evaluated with the formula 'auto' would pick.
	'''

	def __init__(
		self,
		mesh: Mesh,
		scale: float = OE_SCALE,
		threshold: float = INDICATOR_THRESHOLD,
		mode: str = OE_MODE,
		factorize: bool = True
	) -> None:

		if not 0 < scale <= 1:
			raise ConfigurationError(f'oe scale must lie in (0, 1], got {scale}')
		if threshold < 0:
			raise ConfigurationError(
				f'indicator threshold must be non-negative, got {threshold}'
			)
		self.mesh = mesh
		self.scale = scale
		self.threshold = threshold
		self.mode = resolve_mode(mode, mesh)
		self.formula = resolve_mode('auto', mesh) if self.mode == 'off' else self.mode
		self.path = None
		self.hierarchy = None
		if factorize and self.mode == 'cartesian':
			self.path = ModalPath(mesh.refops.nodes)
		elif factorize and self.mode == 'curvilinear':
			self.hierarchy = ProjectionHierarchy(mesh)
			self.path = ProjectionPath(self.hierarchy)

		N = mesh.degree
		self.level_alphas = [
			derivative_multi_indices(m, self.formula) for m in range(N + 1)
		]
		self.level_weights = np.array([
			(2 * m + 1) / (2 * (2 * N - 1) * math.factorial(m))
			for m in range(N + 1)
		])
		self.flagged = np.zeros(mesh.num_elements, dtype=bool)

	@property
	def enabled(self) -> bool:
		return self.path is not None

	def _normalizers(
		self,
		U: np.ndarray,
		means: np.ndarray
	) -> tuple[np.ndarray, np.ndarray]:
		'''
		L-infinity normalizers (E, 4) and the mask of element components with
		U = mean on the element.

		The Cartesian formula normalizes by the deviation from the domain mean
		over the whole mesh, the curvilinear one by the deviation from each
		cell average over its element.
		'''
		deviation = np.abs(U - means[:, None, None, :]).max(axis=(1, 2))
		size = np.abs(U).max(axis=(1, 2))
		flat = deviation <= FLAT_TOLERANCE * np.maximum(1., size)
		if self.formula == 'cartesian':
			volume = self.mesh.mass.sum(axis=(1, 2))
			domain_mean = volume @ means / volume.sum()
			deviation = np.broadcast_to(
				np.abs(U - domain_mean).max(axis=(0, 1, 2)), means.shape
			)
		return np.where(flat, 1., deviation), flat

	def indicator(
		self,
		field: FieldState,
		means: np.ndarray | None = None
	) -> np.ndarray:
		'''
		Sum over sides of the zero-order jump measure, for every element.
		'''
		U = field.U
		mesh = self.mesh
		if means is None:
			means = mesh.cell_average(U)
		norm, flat = self._normalizers(U, means)
		all_elems = np.arange(mesh.num_elements)
		jumps = _face_jump_means(U, mesh, all_elems, all_elems)
		sigma0 = self.level_weights[0] * jumps / norm[:, None, :]
		sigma0 = np.where(flat[:, None, :], 0., sigma0)
		return sigma0.max(axis=-1).sum(axis=-1)

	def damping(
		self,
		field: FieldState,
		elems: np.ndarray,
		means: np.ndarray | None = None
	) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
		'''
		Face measures sigma (k, 4, N+1), rates delta (k, N+1) and wave speeds
		beta (k,) for elements `elems`.
		'''
		U = field.U
		mesh = self.mesh
		N = mesh.degree
		if means is None:
			means = mesh.cell_average(U)
		norm, flat = self._normalizers(U, means)

		# Derivatives are needed on the elements and on their neighbors
		neighbors = mesh.neighbor[elems].ravel()
		subset = np.union1d(elems, neighbors[neighbors >= 0])
		local = np.full(mesh.num_elements, -1)
		local[subset] = np.arange(len(subset))
		metrics = tuple(
			metric[subset] for metric in
			(mesh.x_xi, mesh.x_eta, mesh.y_xi, mesh.y_eta, mesh.jacobian)
		)
		alphas = self.level_alphas[N]
		derivatives = _physical_derivatives(
			U[subset], metrics, mesh.refops.diff_matrix, alphas
		)
		jumps = {
			alpha: _face_jump_means(derivatives[alpha], mesh, local, elems)
			for alpha in alphas
		}

		h = mesh.h[elems]
		sigmas = np.empty((len(elems), 4, N + 1))
		for m in range(N + 1):
			total = sum(jumps[alpha] for alpha in self.level_alphas[m])
			sigma = self.level_weights[m] * h[:, None, None] ** m * total \
				/ norm[elems][:, None, :]
			sigma = np.where(flat[elems][:, None, :], 0., sigma)
			sigmas[:, :, m] = sigma.max(axis=-1)

		element_mean = means[elems]
		bad = ~admissible(element_mean)
		if bad.any():
			raise AdmissibilityError(
				'inadmissible cell average', element=int(elems[np.argmax(bad)]),
				time=field.t
			)
		speed = np.hypot(element_mean[:, 1], element_mean[:, 2]) / element_mean[:, 0]
		beta = speed + sound_speed(element_mean)
		deltas = (beta / h)[:, None] * sigmas.sum(axis=1)
		return sigmas, deltas, beta

	def __call__(
		self,
		field: FieldState,
		dt: float
	) -> FieldState:
		'''
		Applies the filter over a step of size `dt`. Unflagged elements are
		returned bitwise unchanged; `self.flagged` records the flagged set.
		'''
		if not self.enabled:
			self.flagged = np.zeros(self.mesh.num_elements, dtype=bool)
			return field
		assert dt > 0, 'OE step size must be positive'

		means = self.mesh.cell_average(field.U)
		self.flagged = self.indicator(field, means) > self.threshold
		elems = np.flatnonzero(self.flagged)
		if not len(elems):
			return field

		_, deltas, _ = self.damping(field, elems, means)
		return FieldState(
			self.damp(field.U, elems, deltas, dt), field.t
		)

	def damp(
		self,
		U: np.ndarray,
		elems: np.ndarray,
		deltas: np.ndarray,
		dt: float
	) -> np.ndarray:
		'''
		Multiplies level k of each listed element by exp(-s dt sum_{m<=k} delta_m)
		and restores the exact cell averages.
		'''
		exponents = self.scale * dt * np.cumsum(deltas, axis=1)
		factors = np.exp(-exponents)
		factors[:, 0] = 1.

		damped = self.path(U[elems], elems, factors)
		# Restore cell averages to round-off
		before = self.mesh.cell_average(U[elems], elems)
		after = self.mesh.cell_average(damped, elems)
		damped += (before - after)[:, None, None, :]

		U = U.copy()
		U[elems] = damped
		return U



def damping_sigmas(
	field: FieldState,
	mesh: Mesh,
	elem: int,
	mode: str = 'curvilinear'
) -> DampingData:
	'''
	Damping quantities of a single element under the given mode's formula.
	'''
	if mode == 'off':
		raise ConfigurationError('damping coefficients need an active oe mode')
	oe = OEFilter(mesh, mode=mode, factorize=False)
	sigmas, deltas, beta = oe.damping(field, np.array([elem]))
	return DampingData(
		sigmas=sigmas[0],
		deltas=deltas[0],
		indicator=float(sigmas[0, :, 0].sum()),
		beta=float(beta[0]),
		h=float(mesh.h[elem])
	)


def shock_indicator(
	field: FieldState,
	mesh: Mesh,
	elem: int | None = None,
	mode: str = 'auto'
) -> float | np.ndarray:
	'''
	Zero-order jump indicator of element `elem`, or of every element.
	'''
	values = OEFilter(mesh, mode=mode, factorize=False).indicator(field)
	return values if elem is None else float(values[elem])


def apply_oe(
	field: FieldState,
	mesh: Mesh,
	dt: float,
	scale: float = OE_SCALE,
	threshold: float = INDICATOR_THRESHOLD,
	mode: str = OE_MODE
) -> FieldState:
	'''
	One-shot filter application. Runs keep an `OEFilter` so the projection
	hierarchy is factorized once.
	'''
	return OEFilter(mesh, scale, threshold, mode)(field, dt)
