'''
Contains the state algebra of the 2D compressible Euler equations.

States are numpy arrays whose last axis holds the conservative variables
(rho, rho u, rho v, E); every function here is vectorized over the leading
axes. The gas is ideal with ratio of specific heats `GAMMA`.
'''

from typing import NamedTuple

import numpy as np

from configs import GAMMA
from utils.errors import AdmissibilityError, GeometryError



class FluxPair(NamedTuple):
	'''
	Physical or two-point flux in the x (`f`) and y (`g`) directions.
	'''
	f: np.ndarray
	g: np.ndarray



class TwoPointState(NamedTuple):
	'''
	Nodal quantities reused by every two-point flux evaluation.
	'''
	rho: np.ndarray
	u: np.ndarray
	v: np.ndarray
	beta: np.ndarray
	log_rho: np.ndarray
	log_beta: np.ndarray



def pressure(U: np.ndarray) -> np.ndarray:
	rho, mx, my, E = np.moveaxis(U, -1, 0)
	return (GAMMA - 1) * (E - .5 * (mx ** 2 + my ** 2) / rho)


def primitive(U: np.ndarray) -> tuple[np.ndarray, ...]:
	'''
	Returns (rho, u, v, p).
	'''
	rho, mx, my, E = np.moveaxis(U, -1, 0)
	u = mx / rho
	v = my / rho
	p = (GAMMA - 1) * (E - .5 * rho * (u ** 2 + v ** 2))
	return rho, u, v, p


def conservative(
	rho: np.ndarray | float,
	u: np.ndarray | float,
	v: np.ndarray | float,
	p: np.ndarray | float
) -> np.ndarray:

	rho, u, v, p = np.broadcast_arrays(*map(np.asarray, (rho, u, v, p)))
	E = p / (GAMMA - 1) + .5 * rho * (u ** 2 + v ** 2)
	return np.stack([rho, rho * u, rho * v, E], axis=-1).astype(float)


def sound_speed(U: np.ndarray) -> np.ndarray:
	rho = U[..., 0]
	return np.sqrt(GAMMA * pressure(U) / rho)


def wave_speed(U: np.ndarray) -> np.ndarray:
	'''
	Pointwise |u| + c.
	'''
	rho, u, v, p = primitive(U)
	return np.sqrt(u ** 2 + v ** 2) + np.sqrt(GAMMA * p / rho)


def admissible(
	U: np.ndarray,
	rho_floor: float = 0.,
	p_floor: float = 0.
) -> np.ndarray:
	'''
	Boolean mask over states: finite with rho > `rho_floor`, p > `p_floor`.
	'''
	with np.errstate(divide='ignore', invalid='ignore'):
		p = pressure(U)
	return np.isfinite(U).all(axis=-1) & (U[..., 0] > rho_floor) & (p > p_floor)


def check_admissible(
	U: np.ndarray,
	rho_floor: float = 0.,
	p_floor: float = 0.,
	time: float | None = None,
	stage: int | None = None
) -> None:
	'''
	Raises AdmissibilityError unless every state is finite with
	rho > `rho_floor` and p > `p_floor`.

	For fields shaped (E, N+1, N+1, 4) the error names the first offending
	element and node.
	'''
	bad = ~admissible(U, rho_floor, p_floor)
	if not bad.any():
		return

	index = tuple(int(i) for i in np.argwhere(bad)[0])
	state = U[index]
	with np.errstate(divide='ignore', invalid='ignore'):
		message = (
			f'inadmissible state rho = {state[0]:.6g}, p = {pressure(state):.6g}'
		)
	element = node = None
	if U.ndim == 4:
		element, node = index[0], index[1:]
	elif U.ndim == 3:
		node = index
	raise AdmissibilityError(
		message, element=element, node=node, time=time, stage=stage
	)


def physical_flux(U: np.ndarray) -> FluxPair:
	check_admissible(U)
	rho, u, v, p = primitive(U)
	E = U[..., 3]
	mx = U[..., 1]
	my = U[..., 2]
	f = np.stack([mx, mx * u + p, mx * v, u * (E + p)], axis=-1)
	g = np.stack([my, my * u, my * v + p, v * (E + p)], axis=-1)
	return FluxPair(f, g)


def normal_flux(
	U: np.ndarray,
	n: np.ndarray
) -> np.ndarray:
	'''
	n_x f(U) + n_y g(U) for (possibly unnormalized) directions `n`.
	'''
	f, g = physical_flux(U)
	return n[..., :1] * f + n[..., 1:] * g


def entropy_pair(U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
	'''
	Mathematical entropy eta = -rho s / (gamma - 1) with s = log(p rho^-gamma)
	and its fluxes q = eta (u, v).
	'''
	check_admissible(U)
	rho, u, v, p = primitive(U)
	s = np.log(p) - GAMMA * np.log(rho)
	eta = -rho * s / (GAMMA - 1)
	return eta, eta * u, eta * v


def entropy_variables(U: np.ndarray) -> np.ndarray:
	check_admissible(U)
	rho, u, v, p = primitive(U)
	s = np.log(p) - GAMMA * np.log(rho)
	b = rho / p
	return np.stack([
		(GAMMA - s) / (GAMMA - 1) - .5 * b * (u ** 2 + v ** 2),
		b * u,
		b * v,
		-b
	], axis=-1)


def conservative_from_entropy(V: np.ndarray) -> np.ndarray:
	'''
	Inverse of `entropy_variables` (requires V4 < 0).
	'''
	b = -V[..., 3]
	u = V[..., 1] / b
	v = V[..., 2] / b
	s = GAMMA - (GAMMA - 1) * (V[..., 0] + .5 * b * (u ** 2 + v ** 2))
	rho = np.exp((s + np.log(b)) / (1 - GAMMA))
	return conservative(rho, u, v, rho / b)


def entropy_potentials(
	U: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
	'''
	Returns (phi, psi_f, psi_g) with phi = U.V - eta and psi = (rho u, rho v).
	'''
	V = entropy_variables(U)
	eta, _, _ = entropy_pair(U)
	phi = np.einsum('...k,...k->...', U, V) - eta
	return phi, U[..., 1].copy(), U[..., 2].copy()


def log_mean(
	a: np.ndarray | float,
	b: np.ndarray | float
) -> np.ndarray | float:
	'''
	Logarithmic mean (a - b) / (log a - log b) of positive numbers.
	'''
	a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
	if np.any(~(a > 0)) or np.any(~(b > 0)):
		raise AdmissibilityError('log_mean requires positive arguments')
	value = _log_mean(a, b, np.log(a), np.log(b))
	return float(value) if value.ndim == 0 else value


def _log_mean(
	a: np.ndarray,
	b: np.ndarray,
	log_a: np.ndarray,
	log_b: np.ndarray
) -> np.ndarray:

	zeta = a / b
	close = (zeta - 1) ** 2 < 1e-4

	# Series in f = (zeta - 1) / (zeta + 1) near a = b
	f = (zeta - 1) / (zeta + 1)
	f2 = f * f
	series = .5 * (a + b) / (1 + f2 / 3 + f2 * f2 / 5 + f2 * f2 * f2 / 7)

	with np.errstate(divide='ignore', invalid='ignore'):
		direct = (a - b) / (log_a - log_b)
	return np.where(close, series, direct)


def two_point_state(U: np.ndarray) -> TwoPointState:
	rho, u, v, p = primitive(U)
	beta = .5 * rho / p
	return TwoPointState(rho, u, v, beta, np.log(rho), np.log(beta))


def ec_flux_two_point(
	left: TwoPointState,
	right: TwoPointState
) -> FluxPair:
	'''
	Kinetic-energy preserving, entropy conservative two-point flux on
	precomputed nodal quantities (no admissibility checks).
	'''
	rho_ln = _log_mean(left.rho, right.rho, left.log_rho, right.log_rho)
	beta_ln = _log_mean(left.beta, right.beta, left.log_beta, right.log_beta)
	u_avg = .5 * (left.u + right.u)
	v_avg = .5 * (left.v + right.v)
	p_hat = .5 * (left.rho + right.rho) / (left.beta + right.beta)
	speed2_avg = .5 * (
		left.u ** 2 + left.v ** 2 + right.u ** 2 + right.v ** 2
	)
	h_hat = (
		1 / (2 * beta_ln * (GAMMA - 1)) - .5 * speed2_avg
		+ p_hat / rho_ln + u_avg ** 2 + v_avg ** 2
	)

	mass_x = rho_ln * u_avg
	mass_y = rho_ln * v_avg
	f = np.stack([
		mass_x,
		mass_x * u_avg + p_hat,
		mass_x * v_avg,
		mass_x * h_hat
	], axis=-1)
	g = np.stack([
		mass_y,
		mass_y * u_avg,
		mass_y * v_avg + p_hat,
		mass_y * h_hat
	], axis=-1)
	return FluxPair(f, g)


def ec_flux(
	UL: np.ndarray,
	UR: np.ndarray
) -> FluxPair:
	check_admissible(UL)
	check_admissible(UR)
	return ec_flux_two_point(two_point_state(UL), two_point_state(UR))


def ec_normal_flux(
	UL: np.ndarray,
	UR: np.ndarray,
	n: np.ndarray
) -> np.ndarray:
	f, g = ec_flux(UL, UR)
	return n[..., :1] * f + n[..., 1:] * g


def llf_flux(
	UL: np.ndarray,
	UR: np.ndarray,
	n: np.ndarray
) -> np.ndarray:
	'''
	Local Lax-Friedrichs (Rusanov) flux in the unit direction `n`.

	alpha = max(|u_L.n| + c_L, |u_R.n| + c_R).
	'''
	n = np.asarray(n, dtype=float)
	if np.any(np.abs(np.hypot(n[..., 0], n[..., 1]) - 1) > 1e-12):
		raise GeometryError('llf_flux requires unit normals')
	check_admissible(UL)
	check_admissible(UR)

	alpha = np.maximum(_normal_wave_speed(UL, n), _normal_wave_speed(UR, n))
	central = .5 * (normal_flux(UL, n) + normal_flux(UR, n))
	return central - .5 * alpha[..., None] * (UR - UL)


def _normal_wave_speed(
	U: np.ndarray,
	n: np.ndarray
) -> np.ndarray:
	rho, u, v, p = primitive(U)
	return np.abs(u * n[..., 0] + v * n[..., 1]) + np.sqrt(GAMMA * p / rho)
