'''
Contains tests of the LGL reference-element operators.
'''

import numpy as np
import pytest

from refops import (
	differentiation_matrix, interpolation_matrix, lagrange_eval,
	lgl_nodes_weights, reference_operators
)
from utils.errors import ConfigurationError, GeometryError



@pytest.mark.parametrize('N, nodes, weights', [
	(1, [-1., 1.], [1., 1.]),
	(2, [-1., 0., 1.], [1 / 3, 4 / 3, 1 / 3]),
	(3, [-1., -1 / np.sqrt(5), 1 / np.sqrt(5), 1.], [1 / 6, 5 / 6, 5 / 6, 1 / 6])
])
def test_lgl_known_values(N, nodes, weights):
	x, w = lgl_nodes_weights(N)
	np.testing.assert_allclose(x, nodes, atol=1e-15)
	np.testing.assert_allclose(w, weights, rtol=1e-14)


@pytest.mark.parametrize('N', range(1, 9))
def test_lgl_symmetry_and_weight_sum(N):
	x, w = lgl_nodes_weights(N)
	assert np.all(np.diff(x) > 0)
	np.testing.assert_allclose(x, -x[::-1], atol=1e-15)
	np.testing.assert_allclose(w, w[::-1], rtol=1e-14)
	assert w.sum() == pytest.approx(2., abs=1e-14)


@pytest.mark.parametrize('N', range(1, 9))
def test_lgl_quadrature_exact_to_degree_2N_minus_1(N):
	x, w = lgl_nodes_weights(N)
	for k in range(2 * N):
		exact = 0. if k % 2 else 2 / (k + 1)
		assert w @ x ** k == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize('N', range(1, 9))
def test_summation_by_parts(N):
	assert reference_operators(N).sbp_residual() < 1e-13


@pytest.mark.parametrize('N', range(1, 9))
def test_differentiation_exact_on_polynomials(N):
	ops = reference_operators(N)
	x, D = ops.nodes, ops.diff_matrix
	np.testing.assert_allclose(D @ np.ones_like(x), 0., atol=1e-13)
	for k in range(1, N + 1):
		np.testing.assert_allclose(D @ x ** k, k * x ** (k - 1), atol=1e-11)


@pytest.mark.parametrize('N', [0, 17, 2.5, -3])
def test_invalid_degree(N):
	with pytest.raises(ConfigurationError):
		lgl_nodes_weights(N)


def test_duplicate_or_unsorted_nodes():
	with pytest.raises(GeometryError):
		differentiation_matrix(np.array([-1., 0., 0., 1.]))
	with pytest.raises(GeometryError):
		differentiation_matrix(np.array([-1., .5, 0., 1.]))


def test_lagrange_basis_is_cardinal():
	x, _ = lgl_nodes_weights(4)
	values = np.array([lagrange_eval(x, j, x) for j in range(5)])
	np.testing.assert_allclose(values, np.eye(5), atol=1e-14)
	assert lagrange_eval(x, 2, 0.) == pytest.approx(1.)
	with pytest.raises(IndexError):
		lagrange_eval(x, 5, 0.)


def test_interpolation_reproduces_polynomials():
	x, _ = lgl_nodes_weights(3)
	points = np.linspace(-1, 1, 11)
	interp = interpolation_matrix(x, points)
	values = 2 * x ** 3 - x + .5
	np.testing.assert_allclose(interp @ values, 2 * points ** 3 - points + .5, atol=1e-13)


def test_operators_are_cached_and_read_only():
	ops = reference_operators(3)
	assert reference_operators(3) is ops
	assert ops.num_nodes == 4
	with pytest.raises(ValueError):
		ops.nodes[0] = 0.
	np.testing.assert_allclose(ops.weights_2d.sum(), 4.)
