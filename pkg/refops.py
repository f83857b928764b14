'''
Contains the reference-element operators of the spectral element method.

Nodes are Legendre-Gauss-Lobatto (LGL) points on [-1, 1]; the nodal basis is
the Lagrange basis on those points and the differentiation matrix satisfies
the summation-by-parts (SBP) property with the LGL weights.
'''

from functools import lru_cache
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_legendre

from configs import LGL_TOLERANCE, LGL_MAX_ITERATIONS, MAX_OPERATOR_DEGREE
from utils.errors import ConfigurationError, GeometryError



@dataclass(frozen=True, eq=False)
class ReferenceOperators:
	'''
	Immutable LGL operators for a fixed degree.

	## Parameters
	`degree`: Polynomial degree N
	`nodes`: N+1 LGL nodes, strictly increasing
	`weights`: N+1 LGL weights
	`diff_matrix`: (N+1)x(N+1) matrix with D[i, j] = phi_j'(xi_i)
	'''

	degree: int
	nodes: np.ndarray
	weights: np.ndarray
	diff_matrix: np.ndarray

	def __post_init__(self) -> None:
		for array in (self.nodes, self.weights, self.diff_matrix):
			array.setflags(write=False)

	@property
	def num_nodes(self) -> int:
		return self.degree + 1

	@property
	def weights_2d(self) -> np.ndarray:
		'''
		Tensor-product weights w_i w_j indexed [i, j].
		'''
		return np.outer(self.weights, self.weights)

	def sbp_residual(self) -> float:
		'''
		Max abs entry of W D + (W D)^T - B with B = diag(-1, 0, ..., 0, 1).
		'''
		wd = self.weights[:, None] * self.diff_matrix
		boundary = np.zeros_like(wd)
		boundary[0, 0], boundary[-1, -1] = -1, 1
		return float(np.abs(wd + wd.T - boundary).max())



def lgl_nodes_weights(N: int) -> tuple[np.ndarray, np.ndarray]:
	'''
	LGL nodes (roots of (1 - x^2) P_N'(x)) and weights 2 / (N (N+1) P_N(x)^2).

	Interior nodes are found by Newton iteration from Chebyshev-Gauss-Lobatto
	guesses; derivatives of P_N come from the Legendre differential equation.
	'''
	if not isinstance(N, (int, np.integer)) or not 1 <= N <= MAX_OPERATOR_DEGREE:
		raise ConfigurationError(
			f'degree must be an integer in [1, {MAX_OPERATOR_DEGREE}], got {N}'
		)
	N = int(N)

	# Chebyshev-Gauss-Lobatto initial guesses, ascending
	x = -np.cos(np.pi * np.arange(N + 1) / N)

	# Newton on q(x) = P_N'(x) for the interior nodes
	interior = x[1:-1].copy()
	for _ in range(LGL_MAX_ITERATIONS):
		dp, d2p = _legendre_derivatives(N, interior)
		step = dp / d2p
		interior -= step
		if np.abs(step).max(initial=0.) < LGL_TOLERANCE:
			break

	nodes = np.concatenate([[-1.], np.sort(interior), [1.]])
	weights = 2 / (N * (N + 1) * eval_legendre(N, nodes) ** 2)
	return nodes, weights


def _legendre_derivatives(
	N: int,
	x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
	'''
	P_N'(x) and P_N''(x) for |x| < 1 from the Legendre ODE.
	'''
	p = eval_legendre(N, x)
	p_prev = eval_legendre(N - 1, x)
	one_minus = 1 - x ** 2
	dp = N * (p_prev - x * p) / one_minus
	d2p = (2 * x * dp - N * (N + 1) * p) / one_minus
	return dp, d2p


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
	diffs = nodes[:, None] - nodes[None, :]
	np.fill_diagonal(diffs, 1.)
	return 1 / diffs.prod(axis=1)


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
	'''
	D[i, j] = phi_j'(x_i) for the Lagrange basis on `nodes`.

	Off-diagonal entries use barycentric weights; the diagonal is set by the
	negative row sum so constants are differentiated to exactly zero.
	'''
	nodes = np.asarray(nodes, dtype=float)
	diffs = nodes[:, None] - nodes[None, :]
	off_diagonal = ~np.eye(len(nodes), dtype=bool)
	if np.any(diffs[off_diagonal] == 0):
		raise GeometryError('differentiation nodes must be distinct')
	if np.any(np.diff(nodes) < 0):
		raise GeometryError('differentiation nodes must be sorted')

	bary = barycentric_weights(nodes)
	np.fill_diagonal(diffs, 1.)
	D = bary[None, :] / (bary[:, None] * diffs)
	np.fill_diagonal(D, 0.)
	np.fill_diagonal(D, -D.sum(axis=1))
	return D


def lagrange_eval(
	nodes: np.ndarray,
	j: int,
	x: float | np.ndarray
) -> float | np.ndarray:
	'''
	Evaluates phi_j(x) = prod_{i != j} (x - x_i) / (x_j - x_i).
	'''
	nodes = np.asarray(nodes, dtype=float)
	if not 0 <= j < len(nodes):
		raise IndexError(f'basis index {j} out of range for {len(nodes)} nodes')
	others = np.delete(nodes, j)
	x = np.asarray(x, dtype=float)
	value = np.prod(
		(x[..., None] - others) / (nodes[j] - others),
		axis=-1
	)
	return float(value) if value.ndim == 0 else value


def interpolation_matrix(
	nodes: np.ndarray,
	points: np.ndarray
) -> np.ndarray:
	'''
	Matrix I[p, j] = phi_j(points[p]).
	'''
	return np.stack([
		lagrange_eval(nodes, j, points)
		for j in range(len(nodes))
	], axis=-1)


@lru_cache(maxsize=None)
def reference_operators(N: int) -> ReferenceOperators:
	'''
	Builds (once per degree) and returns the shared operators.
	'''
	nodes, weights = lgl_nodes_weights(N)
	D = differentiation_matrix(nodes)
	return ReferenceOperators(int(N), nodes, weights, D)
