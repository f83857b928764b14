'''
Contains tests of the oscillation-eliminating filter and the shock indicator.
'''

import numpy as np
import pytest

from cases import build_case
from dgsem import FieldState
from oe import (
	ModalPath, OEFilter, ProjectionHierarchy, ProjectionPath, apply_oe,
	damping_sigmas, derivative_multi_indices, legendre_modes,
	projection_decompose, resolve_mode, shock_indicator
)
from physics import conservative
from timeint import compute_dt
from utils import parse_mesh_spec
from utils.errors import ConfigurationError

from conftest import smooth_field, uniform_field



def strip_field(
	mesh,
	slope: float = 0.,
	wave: float = 0.
) -> FieldState:
	'''
	Density 2 on the column of elements covering [0, 0.5], 1 elsewhere, on
	the 4x4 periodic mesh; optionally with `slope` x and `wave` sin(pi x) on top.
	'''
	column = np.arange(mesh.num_elements) % 4
	x = mesh.coords[..., 0]
	rho = np.where(column == 2, 2., 1.)[:, None, None] + slope * x + wave * np.sin(np.pi * x)
	return FieldState(conservative(rho, 0., 0., 1.), 0.)


def level_norms(
	U: np.ndarray,
	mesh,
	hierarchy: ProjectionHierarchy,
	elem: int
) -> np.ndarray:
	'''
	J-weighted L2 norms of Delta_1..Delta_N, one row per component.
	'''
	norms = []
	for k in range(4):
		_, deltas = projection_decompose(U[elem, ..., k], hierarchy, elem)
		norms.append([np.sqrt(np.sum(mesh.mass[elem] * delta ** 2)) for delta in deltas])
	return np.array(norms)



def test_legendre_modes_ordered_by_level():
	modes = legendre_modes(2)
	assert len(modes) == 9
	assert modes[0] == (0, 0)
	assert [max(mode) for mode in modes] == [0, 1, 1, 1, 2, 2, 2, 2, 2]


def test_derivative_multi_indices():
	assert derivative_multi_indices(0, 'cartesian') == [(0, 0)]
	assert derivative_multi_indices(2, 'cartesian') == [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)]
	assert sorted(derivative_multi_indices(2, 'curvilinear')) == [
		(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)
	]


def test_resolve_mode(periodic_mesh, curved_mesh):
	assert resolve_mode('auto', periodic_mesh) == 'cartesian'
	assert resolve_mode('auto', curved_mesh) == 'curvilinear'
	assert resolve_mode('curvilinear', periodic_mesh) == 'curvilinear'
	with pytest.raises(ConfigurationError):
		resolve_mode('spectral', periodic_mesh)


def test_constant_field_is_untouched(curved_mesh):
	field = uniform_field(curved_mesh)
	oe = OEFilter(curved_mesh, threshold=0.)
	np.testing.assert_array_equal(oe.indicator(field), 0.)
	assert oe(field, .1) is field
	data = damping_sigmas(field, curved_mesh, 3)
	np.testing.assert_array_equal(data.sigmas, 0.)
	np.testing.assert_array_equal(data.deltas, 0.)


def test_piecewise_constant_elements_are_not_flagged(periodic_mesh):
	field = strip_field(periodic_mesh)
	for mode in ('cartesian', 'curvilinear'):
		np.testing.assert_array_equal(shock_indicator(field, periodic_mesh, mode=mode), 0.)
	data = damping_sigmas(field, periodic_mesh, 5, mode='cartesian')
	assert data.indicator == 0.
	np.testing.assert_array_equal(data.sigmas, 0.)
	np.testing.assert_array_equal(data.deltas, 0.)
	oe = OEFilter(periodic_mesh, threshold=0.)
	assert oe(field, .1) is field
	assert not oe.flagged.any()


def test_cartesian_indicator_uses_domain_deviation(periodic_mesh):
	field = strip_field(periodic_mesh, wave=.1)
	indicator = shock_indicator(field, periodic_mesh)
	column = np.arange(16) % 4
	# |jump| 1 over the domain deviation 2.1 - 1.25, weight 1 / (2 (2N - 1))
	expected = np.select([column == 1, column == 2, column == 3], [2 / 17, 4 / 17, 2 / 17], 0.)
	np.testing.assert_allclose(indicator, expected, rtol=1e-12, atol=1e-14)
	assert shock_indicator(field, periodic_mesh, elem=6) == pytest.approx(4 / 17)


def test_damping_quantities_by_hand(periodic_mesh):
	field = strip_field(periodic_mesh, slope=.1)
	data = damping_sigmas(field, periodic_mesh, 5, mode='cartesian')
	assert data.h == pytest.approx(.25)
	# Cell mean density 1 - 0.025 at rest with p = 1
	assert data.beta == pytest.approx(np.sqrt(1.4 / .975))
	# Only the east face jumps, by 1, over the domain deviation 2.05 - 1.25
	assert data.indicator == pytest.approx(1 / 8)
	np.testing.assert_allclose(data.sigmas[[0, 2, 3]], 0., atol=1e-12)
	# Level m weight (2m + 1) h^m / (2 (2N - 1) m!) on the same jump
	np.testing.assert_allclose(
		data.sigmas[1], [1 / 8, 3 / 32, 5 / 256, 7 / 3072], rtol=1e-10, atol=1e-12
	)
	np.testing.assert_allclose(
		data.deltas, data.beta / .25 * data.sigmas.sum(axis=0), rtol=1e-12
	)


def test_nodally_sampled_smooth_data_is_not_flagged():
	case = build_case('vortex', parse_mesh_spec('sinusoidal:10'), 3)
	oe = OEFilter(case.mesh)
	assert oe.indicator(case.field).max() < 1e-12
	assert oe(case.field, .1) is case.field
	assert not oe.flagged.any()


def test_strong_damping_collapses_flagged_elements(periodic_mesh):
	field = strip_field(periodic_mesh, wave=.1)
	oe = OEFilter(periodic_mesh)
	filtered = oe(field, 1e3)
	column = np.arange(16) % 4
	np.testing.assert_array_equal(oe.flagged, column != 0)

	before = periodic_mesh.cell_average(field.U)
	after = periodic_mesh.cell_average(filtered.U)
	np.testing.assert_allclose(after, before, rtol=1e-13)
	flagged = oe.flagged
	np.testing.assert_allclose(
		filtered.U[flagged], np.broadcast_to(after[flagged, None, None], filtered.U[flagged].shape),
		atol=1e-12
	)
	np.testing.assert_array_equal(filtered.U[~flagged], field.U[~flagged])


def test_modal_and_projection_paths_agree(periodic_mesh, rng):
	N = periodic_mesh.degree
	elems = np.arange(periodic_mesh.num_elements)
	U = rng.normal(size=(len(elems), N + 1, N + 1, 4))
	factors = rng.uniform(0, 1, (len(elems), N + 1))
	factors[:, 0] = 1.
	modal = ModalPath(periodic_mesh.refops.nodes)(U, elems, factors)
	projected = ProjectionPath(ProjectionHierarchy(periodic_mesh))(U, elems, factors)
	np.testing.assert_allclose(modal, projected, atol=1e-11)


def test_projection_hierarchy_telescopes(curved_mesh, rng):
	hierarchy = ProjectionHierarchy(curved_mesh)
	N = curved_mesh.degree
	u = rng.normal(size=(N + 1, N + 1))
	u0, deltas = projection_decompose(u, hierarchy, 6)
	assert len(deltas) == N
	np.testing.assert_allclose(u0 + sum(deltas), u, atol=1e-12)

	# Delta_k is orthogonal to Q_{k-1} in the J-weighted inner product
	x = curved_mesh.refops.nodes
	mass = curved_mesh.mass[6]
	for k, delta in enumerate(deltas, start=1):
		for a in range(k):
			for b in range(k):
				v = np.outer(x ** a, x ** b)
				assert abs(np.sum(mass * delta * v)) < 1e-11

	mean = curved_mesh.cell_average(u[None], np.array([6]))[0]
	assert u0 == pytest.approx(mean, rel=1e-12)


def test_projection_of_reference_bilinear_field(curved_mesh):
	hierarchy = ProjectionHierarchy(curved_mesh)
	x = curved_mesh.refops.nodes
	u = 1 + 2 * x[:, None] - x[None, :] + .5 * np.outer(x, x)
	_, deltas = projection_decompose(u, hierarchy, 0)
	for delta in deltas[1:]:
		np.testing.assert_allclose(delta, 0., atol=1e-12)
	np.testing.assert_allclose(hierarchy.project(u, 0, 1), u, atol=1e-12)
	constant = np.full_like(u, 3.)
	u0, deltas = projection_decompose(constant, hierarchy, 0)
	assert u0 == pytest.approx(3.)
	np.testing.assert_allclose(deltas, 0., atol=1e-12)


def test_damping_semigroup_and_identity(curved_mesh, rng):
	oe = OEFilter(curved_mesh, mode='curvilinear')
	U = smooth_field(curved_mesh).U
	elems = np.array([0, 5, 9])
	N = curved_mesh.degree
	first, second = rng.uniform(0, 5, (2, len(elems), N + 1))
	twice = oe.damp(oe.damp(U, elems, first, .1), elems, second, .1)
	once = oe.damp(U, elems, first + second, .1)
	np.testing.assert_allclose(twice, once, atol=1e-12)
	np.testing.assert_allclose(oe.damp(U, elems, np.zeros_like(first), .1), U, atol=1e-13)


def test_filter_off_and_validation(periodic_mesh):
	field = strip_field(periodic_mesh, wave=.1)
	oe = OEFilter(periodic_mesh, mode='off')
	assert not oe.enabled
	assert oe.formula == 'cartesian'
	assert oe(field, .1) is field
	assert oe.indicator(field).max() == pytest.approx(4 / 17)
	with pytest.raises(ConfigurationError):
		OEFilter(periodic_mesh, scale=0.)
	with pytest.raises(ConfigurationError):
		OEFilter(periodic_mesh, threshold=-1.)
	with pytest.raises(ConfigurationError):
		damping_sigmas(field, periodic_mesh, 0, mode='off')


def test_apply_oe_preserves_cell_averages(curved_mesh):
	field = smooth_field(curved_mesh)
	field.U[3] *= 1.3
	filtered = apply_oe(field, curved_mesh, .05, threshold=0.)
	np.testing.assert_allclose(
		curved_mesh.cell_average(filtered.U), curved_mesh.cell_average(field.U), rtol=1e-13
	)


def test_damping_scales_each_level_by_its_factor(curved_mesh, rng):
	oe = OEFilter(curved_mesh, scale=.2, mode='curvilinear')
	N = curved_mesh.degree
	elems = np.array([2, 7, 11])
	U = smooth_field(curved_mesh).U.copy()
	U[elems] = rng.normal(size=(len(elems), N + 1, N + 1, 4))
	deltas = rng.uniform(0, 20, (len(elems), N + 1))
	dt = .1
	damped = oe.damp(U, elems, deltas, dt)

	for elem, delta in zip(elems, deltas):
		before = level_norms(U, curved_mesh, oe.hierarchy, elem)
		after = level_norms(damped, curved_mesh, oe.hierarchy, elem)
		factors = np.exp(-.2 * dt * np.cumsum(delta))[1:]
		assert np.all(factors < 1)
		np.testing.assert_allclose(after / before, np.broadcast_to(factors, before.shape), rtol=1e-10)


def test_apply_oe_never_grows_a_level(curved_mesh):
	field = smooth_field(curved_mesh)
	field.U[3] *= 1.3
	oe = OEFilter(curved_mesh, threshold=0.)
	filtered = oe(field, .05)
	assert oe.flagged[3]
	hierarchy = oe.hierarchy
	for elem in range(curved_mesh.num_elements):
		before = level_norms(field.U, curved_mesh, hierarchy, elem)
		after = level_norms(filtered.U, curved_mesh, hierarchy, elem)
		assert np.all(after <= before * (1 + 1e-12) + 1e-14)


def test_filter_leaves_resolved_vortex_unchanged():
	case = build_case('vortex', parse_mesh_spec('sinusoidal:40'), 3)
	mesh, field = case.mesh, case.field
	filtered = apply_oe(field, mesh, compute_dt(field, mesh))
	norm = np.sqrt(np.sum(mesh.mass[..., None] * field.U ** 2))
	change = np.sqrt(np.sum(mesh.mass[..., None] * (filtered.U - field.U) ** 2))
	assert change <= 1e-8 * norm
