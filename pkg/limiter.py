'''
Contains the positivity-preserving scaling limiter.

Nodal states are contracted toward the J-weighted cell average, first in
density alone and then as full state vectors, until every node has
density and pressure above the floors. Cell averages are unchanged.
'''

from dataclasses import dataclass

import numpy as np

from configs import DENSITY_FLOOR, PRESSURE_FLOOR, LIMITER_BISECTIONS
from dgsem import FieldState
from mesh import ElementGeometry, Mesh
from physics import admissible, pressure
from utils.errors import AdmissibilityError, ConfigurationError



@dataclass(frozen=True)
class LimiterParams:
	eps_rho: float = DENSITY_FLOOR
	eps_p: float = PRESSURE_FLOOR
	bisections: int = LIMITER_BISECTIONS

	def __post_init__(self) -> None:
		if not (self.eps_rho > 0 and self.eps_p > 0):
			raise ConfigurationError('limiter floors must be positive')
		if self.bisections < 1:
			raise ConfigurationError('limiter needs at least one bisection')



def _limit(
	U: np.ndarray,
	mass: np.ndarray,
	params: LimiterParams,
	elements: np.ndarray,
	time: float | None = None,
	stage: int | None = None
) -> np.ndarray:
	'''
	Limits nodal states U (k, n, n, 4) with quadrature weights `mass`
	(k, n, n). `elements` holds the global ids used in error messages.
	'''
	eps_rho, eps_p = params.eps_rho, params.eps_p
	means = np.einsum('eij,eijk->ek', mass, U) / mass.sum(axis=(1, 2))[:, None]
	bad = ~admissible(means, eps_rho, eps_p)
	if bad.any():
		e = int(np.argmax(bad))
		raise AdmissibilityError(
			f'cell average rho = {means[e, 0]:.6g}, '
			f'p = {pressure(means[e]):.6g} below the floors',
			element=int(elements[e]), time=time, stage=stage
		)

	rho = U[..., 0]
	rho_min = rho.min(axis=(1, 2))
	density = np.flatnonzero(rho_min < eps_rho)
	if len(density):
		U = U.copy()
		mean_rho = means[density, 0]
		theta = (mean_rho - eps_rho) / (mean_rho - rho_min[density])
		U[density, ..., 0] = mean_rho[:, None, None] \
			+ theta[:, None, None] * (rho[density] - mean_rho[:, None, None])

	p = pressure(U)
	needs = np.flatnonzero(p.min(axis=(1, 2)) < eps_p)
	if not len(needs):
		return U
	if not len(density):
		U = U.copy()

	mean = means[needs][:, None, None, :]
	diff = U[needs] - mean
	low = np.zeros(diff.shape[:-1])
	high = np.ones(diff.shape[:-1])
	for _ in range(params.bisections):
		mid = .5 * (low + high)
		feasible = pressure(mean + mid[..., None] * diff) >= eps_p
		low = np.where(feasible, mid, low)
		high = np.where(feasible, high, mid)

	theta = np.where(p[needs] < eps_p, low, 1.).min(axis=(1, 2))
	U[needs] = mean + theta[:, None, None, None] * diff
	return U


def limit_element(
	elem: np.ndarray,
	geom: ElementGeometry,
	params: LimiterParams = LimiterParams(),
	element: int = 0,
	time: float | None = None
) -> np.ndarray:
	'''
	Limits the nodal states (N+1, N+1, 4) of one element.
	'''
	return _limit(
		np.asarray(elem, dtype=float)[None], geom.mass[None], params,
		np.array([element]), time
	)[0]


def limit_field(
	field: FieldState,
	mesh: Mesh,
	params: LimiterParams = LimiterParams(),
	stage: int | None = None
) -> FieldState:
	'''
	Limits every element; the returned field shares no memory with the input
	unless no element needed limiting.
	'''
	elements = np.arange(mesh.num_elements)
	U = _limit(field.U, mesh.mass, params, elements, field.t, stage)
	if U is field.U:
		return field
	return FieldState(U, field.t)
