'''
Contains the semidiscrete residual of the DG spectral element method.

Volume terms are returned unweighted and undivided by the Jacobian; surface
terms carry the face quadrature weight. `residual` combines them into the
physical time derivative

	dU/dt = -(volume + surface / (w_i w_j)) / J

at every node.
'''

from typing import Callable
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from configs import FLUX, FLUX_CHOICES, ELEMENT_CHUNK
from mesh import ElementGeometry, Mesh, side_nodes
from physics import (
	FluxPair, TwoPointState, check_admissible, ec_flux_two_point, llf_flux,
	ec_normal_flux, normal_flux, physical_flux, two_point_state
)
from utils.errors import ConfigurationError

# ghost(tag, interior, unit_normals, coords, t) -> exterior states
BoundaryFunction = Callable[
	[str, np.ndarray, np.ndarray, np.ndarray, float], np.ndarray
]
VOLUME_CHOICES = ('es', 'standard')



@dataclass
class FieldState:
	'''
	Nodal solution `U` of shape (E, N+1, N+1, 4) at time `t`.
	'''
	U: np.ndarray
	t: float = 0.

	@property
	def num_elements(self) -> int:
		return self.U.shape[0]

	def copy(self) -> 'FieldState':
		return FieldState(self.U.copy(), self.t)



@dataclass(frozen=True)
class Discretization:
	'''
	Choices of the spatial operator.

	## Parameters
	`flux`: Interface flux, 'llf' or 'ec'
	`volume`: Volume term, 'es' (split form) or 'standard' (collocation)
	`boundary`: Ghost-state function for tagged boundary faces
	`element_chunk`: Elements per vectorized volume kernel call
	'''
	flux: str = FLUX
	volume: str = 'es'
	boundary: BoundaryFunction | None = dataclass_field(default=None, compare=False)
	element_chunk: int = ELEMENT_CHUNK

	def __post_init__(self) -> None:
		if self.flux not in FLUX_CHOICES:
			raise ConfigurationError(
				f'flux must be one of {FLUX_CHOICES}, got {self.flux!r}'
			)
		if self.volume not in VOLUME_CHOICES:
			raise ConfigurationError(
				f'volume must be one of {VOLUME_CHOICES}, got {self.volume!r}'
			)
		if self.element_chunk < 1:
			raise ConfigurationError('element_chunk must be positive')



def _metrics(
	geom: Mesh | ElementGeometry,
	batched: bool
) -> tuple[np.ndarray, ...]:

	metrics = geom.x_xi, geom.x_eta, geom.y_xi, geom.y_eta
	if batched:
		return metrics
	return tuple(metric[None] for metric in metrics)


def contravariant_flux(
	geom: ElementGeometry,
	node: tuple[int, int],
	flux: FluxPair
) -> tuple[np.ndarray, np.ndarray]:
	'''
	(f~, g~) = (y_eta f - x_eta g, -y_xi f + x_xi g) at one node.
	'''
	i, j = node
	f, g = np.asarray(flux.f), np.asarray(flux.g)
	ftilde = geom.y_eta[i, j] * f - geom.x_eta[i, j] * g
	gtilde = -geom.y_xi[i, j] * f + geom.x_xi[i, j] * g
	return ftilde, gtilde


def _take(
	state: TwoPointState,
	index: tuple
) -> TwoPointState:
	return TwoPointState(*(array[index] for array in state))


def _split_form_chunk(
	U: np.ndarray,
	metrics: tuple[np.ndarray, ...],
	D: np.ndarray
) -> np.ndarray:
	'''
	Flux-differencing volume term on a chunk of elements.

	The averaged-metric two-point fluxes are symmetric in the node pair, so
	only pairs a <= b are evaluated and mirrored.
	'''
	x_xi, x_eta, y_xi, y_eta = metrics
	n = U.shape[1]
	a, b = np.triu_indices(n)
	state = two_point_state(U)
	volume = np.zeros_like(U)

	# xi lines: pairs (a, j), (b, j)
	f, g = ec_flux_two_point(
		_take(state, (slice(None), a)),
		_take(state, (slice(None), b))
	)
	avg_y_eta = .5 * (y_eta[:, a] + y_eta[:, b])[..., None]
	avg_x_eta = .5 * (x_eta[:, a] + x_eta[:, b])[..., None]
	pairs = np.empty((U.shape[0], n, n, n, 4))
	pairs[:, a, b] = pairs[:, b, a] = avg_y_eta * f - avg_x_eta * g
	volume += 2 * np.einsum('ab,eabjk->eajk', D, pairs)

	# eta lines: pairs (i, a), (i, b)
	f, g = ec_flux_two_point(
		_take(state, (slice(None), slice(None), a)),
		_take(state, (slice(None), slice(None), b))
	)
	avg_y_xi = .5 * (y_xi[:, :, a] + y_xi[:, :, b])[..., None]
	avg_x_xi = .5 * (x_xi[:, :, a] + x_xi[:, :, b])[..., None]
	pairs[:, :, a, b] = pairs[:, :, b, a] = -avg_y_xi * f + avg_x_xi * g
	volume += 2 * np.einsum('ab,eiabk->eiak', D, pairs)

	return volume


def volume_residual_es(
	U: np.ndarray,
	geom: Mesh | ElementGeometry,
	refops,
	element_chunk: int = ELEMENT_CHUNK,
	check: bool = True
) -> np.ndarray:
	'''
	Entropy-stable split-form volume term

		2 sum_i D[p, i] f~#(p, i) + 2 sum_j D[q, j] g~#(q, j)

	with two-point fluxes contracted against arithmetic-mean metrics.

	`U` is a single element (N+1, N+1, 4) with an ElementGeometry, or a whole
	field (E, N+1, N+1, 4) with the Mesh. The result has the shape of `U`.
	'''
	batched = U.ndim == 4
	if check:
		check_admissible(U)
	metrics = _metrics(geom, batched)
	U = U if batched else U[None]

	D = refops.diff_matrix
	volume = np.empty_like(U)
	for start in range(0, U.shape[0], element_chunk):
		chunk = slice(start, start + element_chunk)
		volume[chunk] = _split_form_chunk(
			U[chunk], tuple(metric[chunk] for metric in metrics), D
		)
	return volume if batched else volume[0]


def volume_residual_standard(
	U: np.ndarray,
	geom: Mesh | ElementGeometry,
	refops,
	check: bool = True
) -> np.ndarray:
	'''
	Collocation volume term sum_i D[p, i] f~_i + sum_j D[q, j] g~_j with
	pointwise metrics. Same shape conventions as `volume_residual_es`.
	'''
	batched = U.ndim == 4
	if check:
		check_admissible(U)
	x_xi, x_eta, y_xi, y_eta = _metrics(geom, batched)
	U = U if batched else U[None]

	f, g = physical_flux(U)
	ftilde = y_eta[..., None] * f - x_eta[..., None] * g
	gtilde = -y_xi[..., None] * f + x_xi[..., None] * g
	D = refops.diff_matrix
	volume = np.einsum('ia,eajk->eijk', D, ftilde) \
		+ np.einsum('ja,eiak->eijk', D, gtilde)
	return volume if batched else volume[0]


def interface_fluxes(
	field: FieldState,
	mesh: Mesh,
	discretization: Discretization
) -> np.ndarray:
	'''
	Scaled outward numerical fluxes |S| F*(U_in, U_out, n) on every element
	side, shape (E, 4, N+1, 4), in the element's own trace order.

	Each interior face is evaluated once; the neighbor receives the negated
	value.
	'''
	U, t = field.U, field.t
	N = mesh.degree
	numerical_flux = llf_flux if discretization.flux == 'llf' else ec_normal_flux
	fluxes = np.zeros((mesh.num_elements, 4, N + 1, 4))

	if len(mesh.interior_left):
		left, left_side = mesh.interior_left, mesh.interior_left_side
		right, right_side = mesh.interior_right, mesh.interior_right_side
		flipped = mesh.interior_reversed
		UL = mesh.traces(U, left, left_side)
		UR = mesh.traces(U, right, right_side, flipped)
		measure = mesh.measure[left, left_side]
		unit = mesh.normals[left, left_side] / measure[..., None]
		scaled = measure[..., None] * numerical_flux(UL, UR, unit)
		fluxes[left, left_side] = scaled
		fluxes[right, right_side] = np.where(
			flipped[:, None, None], -scaled[:, ::-1], -scaled
		)

	if len(mesh.boundary_elem):
		if discretization.boundary is None:
			raise ConfigurationError(
				f'mesh has boundary tags {sorted(mesh.tags)} but no boundary '
				f'conditions were given'
			)
		elem, side = mesh.boundary_elem, mesh.boundary_side
		interior = mesh.traces(U, elem, side)
		coords = mesh.traces(mesh.coords, elem, side)
		measure = mesh.measure[elem, side]
		unit = mesh.normals[elem, side] / measure[..., None]
		for tag in sorted(mesh.tags):
			mask = mesh.boundary_tags == tag
			ghost = discretization.boundary(
				tag, interior[mask], unit[mask], coords[mask], t
			)
			fluxes[elem[mask], side[mask]] = measure[mask][..., None] \
				* numerical_flux(interior[mask], ghost, unit[mask])

	return fluxes


def surface_residual(
	field: FieldState,
	mesh: Mesh,
	discretization: Discretization,
	fluxes: np.ndarray | None = None
) -> np.ndarray:
	'''
	Surface term w_q (|S| F* - S.F(U_in)) deposited on the side nodes of
	every element; corner nodes accumulate both of their sides.
	'''
	U = field.U
	N = mesh.degree
	if fluxes is None:
		fluxes = interface_fluxes(field, mesh, discretization)

	E = mesh.num_elements
	I, J = side_nodes(N)
	elems = np.arange(E)[:, None, None]
	traces = U[elems, I[None], J[None]]
	inner = normal_flux(traces, mesh.normals)
	contribution = mesh.refops.weights[None, None, :, None] * (fluxes - inner)

	surface = np.zeros_like(U)
	np.add.at(surface, (elems, I[None], J[None]), contribution)
	return surface


def residual(
	field: FieldState,
	mesh: Mesh,
	discretization: Discretization = Discretization(),
	stage: int | None = None
) -> np.ndarray:
	'''
	Physical time derivative dU/dt of shape (E, N+1, N+1, 4).
	'''
	U = field.U
	if U.shape[0] != mesh.num_elements:
		raise ConfigurationError(
			f'field has {U.shape[0]} elements, mesh has {mesh.num_elements}'
		)
	check_admissible(U, time=field.t, stage=stage)
	refops = mesh.refops

	if discretization.volume == 'es':
		volume = volume_residual_es(
			U, mesh, refops, discretization.element_chunk, check=False
		)
	else:
		volume = volume_residual_standard(U, mesh, refops, check=False)
	surface = surface_residual(field, mesh, discretization)

	weights = refops.weights_2d[None, :, :, None]
	return -(volume + surface / weights) / mesh.jacobian[..., None]
