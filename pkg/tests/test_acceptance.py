'''
Desk-scale acceptance runs. Deselected by default, run with `pytest -m slow`.
'''

import numpy as np
import pytest

from cases import DMR_POST_SHOCK, build_case
from dgsem import Discretization
from diag import conservation_totals, total_entropy
from mesh import build_sinusoidal, metric_identity_residual
from oe import OEFilter
from runner import COMPONENTS, convergence_study, simulate
from timeint import TimeIntegrator
from utils import RunConfig, parse_mesh_spec

from conftest import smooth_field, uniform_field

pytestmark = pytest.mark.slow



@pytest.mark.parametrize('M', [10, 20, 40])
@pytest.mark.parametrize('N', [3, 4])
def test_metric_identities_on_sinusoidal_meshes(M, N):
	mesh = build_sinusoidal(M, (-10., 10.), 1.5, N)
	assert metric_identity_residual(mesh) <= 1e-12


def test_free_stream_preservation_over_100_steps():
	mesh = build_sinusoidal(10, (-10., 10.), 1.5, 3)
	field = uniform_field(mesh)
	integrator = TimeIntegrator(mesh, oe_filter=OEFilter(mesh))
	current = field
	for _ in range(100):
		current, _ = integrator.step(current)
	assert np.abs(current.U - field.U).max() <= 1e-11


@pytest.mark.parametrize('N, meshes', [
	(3, ['sinusoidal:10', 'sinusoidal:20', 'sinusoidal:40']),
	(4, ['sinusoidal:8', 'sinusoidal:16', 'sinusoidal:32'])
])
def test_vortex_convergence(tmp_path, N, meshes):
	config = RunConfig('vortex', order=N, t_end=2., out=str(tmp_path))
	rows = convergence_study(config, meshes, verbose=False)
	for name in COMPONENTS:
		assert N + .5 <= rows[-1][f'order_{name}'] <= N + 1.5


def test_vortex_entropy_is_non_increasing():
	case = build_case('vortex', parse_mesh_spec('sinusoidal:20'), 3)
	integrator = TimeIntegrator(case.mesh, Discretization(flux='llf'), OEFilter(case.mesh))
	field = case.field
	previous = total_entropy(field, case.mesh)
	while field.t < 2.:
		field, report = integrator.step(field, 2.)
		assert report.entropy <= previous + 1e-8 * abs(previous)
		previous = report.entropy


def test_entropy_conservation_under_dt_halving(curved_mesh):
	field = smooth_field(curved_mesh)
	start = total_entropy(field, curved_mesh)
	integrator = TimeIntegrator(curved_mesh, Discretization(flux='ec'), limiter=None)
	changes = []
	for steps in (10, 20, 40):
		current = field
		for _ in range(steps):
			current, report = integrator.step(current, dt=.2 / steps)
		changes.append(abs(report.entropy - start))
	orders = np.log2(np.array(changes[:-1]) / np.array(changes[1:]))
	assert np.all((orders > 2.5) & (orders < 4.5))


def test_vortex_conservation_over_200_steps():
	case = build_case('vortex', parse_mesh_spec('sinusoidal:10'), 3)
	integrator = TimeIntegrator(case.mesh, oe_filter=OEFilter(case.mesh))
	totals = conservation_totals(case.field, case.mesh)
	field = case.field
	for _ in range(200):
		field, _ = integrator.step(field)
	drift = np.abs(conservation_totals(field, case.mesh) - totals) / np.abs(totals)
	assert drift.max() <= 1e-11


@pytest.mark.parametrize('case, t_end', [('riemann12', .2), ('riemann13', .3)])
def test_riemann_robustness(tmp_path, case, t_end):
	config = RunConfig(case, mesh='cartesian:160', t_end=t_end, out=str(tmp_path))
	summary = simulate(config, verbose=False)
	assert summary['min_rho'] > 0 and summary['min_p'] > 0
	assert summary['flagged_fraction'] < .25


def test_double_mach_robustness_and_overshoot(tmp_path):
	config = RunConfig('dmr', order=2, mesh='cartesian:240x60', out=str(tmp_path / 'oe'))
	filtered = simulate(config, verbose=False)
	assert filtered['min_rho'] > 0 and filtered['min_p'] > 0
	assert filtered['flagged_fraction'] < .3

	unfiltered = simulate(
		config.replace(oe_mode='off', out=str(tmp_path / 'off')), verbose=False
	)
	post_shock = DMR_POST_SHOCK[0]
	assert unfiltered['max_rho'] - post_shock > filtered['max_rho'] - post_shock


def test_higher_threshold_lowers_filter_cost(tmp_path):
	config = RunConfig('dmr', order=2, mesh='cartesian:60x15', t_end=.05)
	costs = []
	for threshold in (0., .02, .1):
		run = config.replace(indicator_threshold=threshold, out=str(tmp_path / str(threshold)))
		costs.append(simulate(run, verbose=False)['mean_oe_seconds'])
	assert costs[0] > costs[1] > costs[2]
