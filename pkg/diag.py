'''
Contains diagnostics computed with the LGL quadrature of the scheme: the
entropy integral, conservation totals, L2 errors, observed convergence
orders and the per-element entropy balance.
'''

from typing import Callable, Sequence

import numpy as np

from dgsem import Discretization, FieldState, interface_fluxes, residual
from mesh import Mesh, side_nodes
from physics import entropy_pair, entropy_variables

# exact(x, y, t) -> conservative states shaped like x with a trailing axis 4
ExactSolution = Callable[[np.ndarray, np.ndarray, float], np.ndarray]



def total_entropy(
	field: FieldState,
	mesh: Mesh
) -> float:
	'''
	I_eta = sum_e sum_ij w_i w_j J eta(U).
	'''
	eta, _, _ = entropy_pair(field.U)
	return float(np.sum(mesh.mass * eta))


def conservation_totals(
	field: FieldState,
	mesh: Mesh
) -> np.ndarray:
	'''
	Quadrature integrals of the four conserved variables.
	'''
	return np.einsum('eij,eijk->k', mesh.mass, field.U)


def l2_error(
	field: FieldState,
	exact: ExactSolution,
	mesh: Mesh
) -> np.ndarray:
	'''
	Per-component L2 error against `exact` evaluated at the field time.
	'''
	x, y = mesh.coords[..., 0], mesh.coords[..., 1]
	error = field.U - exact(x, y, field.t)
	return np.sqrt(np.einsum('eij,eijk->k', mesh.mass, error ** 2))


def observed_orders(
	errors: Sequence,
	hs: Sequence[float]
) -> np.ndarray:
	'''
	log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive resolutions.

	`errors` may hold scalars or per-component arrays; the result has one
	row fewer than the inputs.
	'''
	errors = np.asarray(errors, dtype=float)
	hs = np.asarray(hs, dtype=float)
	assert len(errors) == len(hs), 'Need one mesh size per error'
	ratios = np.log(hs[:-1] / hs[1:])
	ratios = ratios.reshape((-1,) + (1,) * (errors.ndim - 1))
	return np.log(errors[:-1] / errors[1:]) / ratios


def entropy_rates(
	field: FieldState,
	mesh: Mesh,
	discretization: Discretization = Discretization()
) -> np.ndarray:
	'''
	Semidiscrete entropy rate sum_ij w_i w_j J V . dU/dt of every element.
	'''
	V = entropy_variables(field.U)
	dU = residual(field, mesh, discretization)
	return np.einsum('eij,eijk,eijk->e', mesh.mass, V, dU)


def entropy_balance_residual(
	field: FieldState,
	mesh: Mesh,
	discretization: Discretization = Discretization(),
	elem: int | None = None
) -> float | np.ndarray:
	'''
	|LHS - RHS| of the element entropy balance

		sum w w J V . dU/dt = -sum_sides sum_q w_q (V . F* - S . psi)

	where F* are the scaled interface fluxes, S the scaled outward normals
	and psi = (rho u, rho v) the entropy potential. With an entropy
	conservative volume term this holds to round-off for any interface flux.

	Returns the value for element `elem`, or for every element.
	'''
	U = field.U
	E, N = mesh.num_elements, mesh.degree
	lhs = entropy_rates(field, mesh, discretization)

	fluxes = interface_fluxes(field, mesh, discretization)
	I, J = side_nodes(N)
	elems = np.arange(E)[:, None, None]
	V = entropy_variables(U)[elems, I[None], J[None]]
	traces = U[elems, I[None], J[None]]
	psi = mesh.normals[..., 0] * traces[..., 1] + mesh.normals[..., 1] * traces[..., 2]

	w = mesh.refops.weights
	rhs = -np.einsum('q,esqk,esqk->e', w, V, fluxes) \
		+ np.einsum('q,esq->e', w, psi)
	balance = np.abs(lhs - rhs)
	return balance if elem is None else float(balance[elem])


def max_overshoot(
	field: FieldState,
	reference_max: float
) -> float:
	'''
	max(rho) - `reference_max`; positive values measure density overshoot.
	'''
	return float(field.U[..., 0].max() - reference_max)
