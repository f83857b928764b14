'''
Contains tests of the entropy, conservation and error diagnostics.
'''

import numpy as np
import pytest

from dgsem import Discretization, FieldState
from diag import (
	conservation_totals, entropy_balance_residual, entropy_rates, l2_error,
	max_overshoot, observed_orders, total_entropy
)
from physics import conservative

from conftest import smooth_field, uniform_field



def _outflow(tag, interior, normals, coords, t):
	return interior.copy()


def test_total_entropy_of_uniform_state(periodic_mesh):
	field = uniform_field(periodic_mesh, (1., 0., 0., 2.))
	# eta = -rho log(p rho^-gamma) / (gamma - 1) on an area of 4
	assert total_entropy(field, periodic_mesh) == pytest.approx(-4 * np.log(2) / .4, rel=1e-13)


def test_conservation_totals(curved_mesh):
	state = (1.5, .2, -.1, 2.)
	totals = conservation_totals(uniform_field(curved_mesh, state), curved_mesh)
	np.testing.assert_allclose(totals, 4 * conservative(*state), rtol=1e-12)


def test_l2_error(periodic_mesh):
	exact = lambda x, y, t: conservative(1 + .1 * np.sin(np.pi * (x - t)), .5, 0., 1.)
	field = FieldState(exact(periodic_mesh.coords[..., 0], periodic_mesh.coords[..., 1], .3), .3)
	np.testing.assert_allclose(l2_error(field, exact, periodic_mesh), 0., atol=1e-15)
	field.U[..., 0] += .1
	errors = l2_error(field, exact, periodic_mesh)
	# Constant offset 0.1 over an area of 4
	assert errors[0] == pytest.approx(.2, rel=1e-13)
	np.testing.assert_allclose(errors[1:], 0., atol=1e-15)


def test_observed_orders():
	assert observed_orders([4., 1.], [2., 1.]) == pytest.approx([2.])
	orders = observed_orders([[4., 8.], [1., 1.], [.25, .125]], [.4, .2, .1])
	np.testing.assert_allclose(orders, [[2., 3.], [2., 3.]])
	with pytest.raises(AssertionError):
		observed_orders([1., 2.], [1.])


@pytest.mark.parametrize('flux', ['llf', 'ec'])
def test_entropy_balance_periodic(curved_mesh, flux):
	field = smooth_field(curved_mesh)
	balance = entropy_balance_residual(field, curved_mesh, Discretization(flux=flux))
	assert balance.shape == (curved_mesh.num_elements,)
	assert balance.max() <= 1e-10
	assert entropy_balance_residual(
		field, curved_mesh, Discretization(flux=flux), elem=3
	) == pytest.approx(balance[3])


def test_entropy_balance_with_boundaries(walled_mesh):
	x, y = walled_mesh.coords[..., 0], walled_mesh.coords[..., 1]
	field = FieldState(conservative(1 + .1 * np.sin(x + 2 * y), .4, -.3, 1 + .05 * np.cos(x)))
	balance = entropy_balance_residual(field, walled_mesh, Discretization(boundary=_outflow))
	assert balance.max() <= 1e-10


def test_collocation_volume_breaks_entropy_balance(curved_mesh):
	field = smooth_field(curved_mesh)
	balance = entropy_balance_residual(field, curved_mesh, Discretization(volume='standard'))
	assert balance.max() > 1e-10


def test_entropy_rates_sum_to_zero_with_ec_flux(curved_mesh):
	rates = entropy_rates(smooth_field(curved_mesh), curved_mesh, Discretization(flux='ec'))
	assert abs(rates.sum()) < 1e-11
	assert np.abs(rates).max() > 1e-8


def test_max_overshoot(periodic_mesh):
	field = uniform_field(periodic_mesh)
	field.U[2, 1, 1, 0] = 1.25
	assert max_overshoot(field, 1.) == pytest.approx(.25)
	assert max_overshoot(uniform_field(periodic_mesh), 1.) == pytest.approx(0.)
