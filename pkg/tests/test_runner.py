'''
Contains tests of the run loop, exit codes and convergence study.
'''

import json
import os

import numpy as np
import pytest

import runner
from runner import (
	EXIT_ADMISSIBILITY_ERROR, EXIT_CONFIG_ERROR, EXIT_SUCCESS,
	convergence_study, run, simulate
)
from utils import ConfigurationError, RunConfig, read_csv
from utils.errors import AdmissibilityError
from utils.io_utils import TIME_SERIES_COLUMNS



def short_vortex(out, **changes) -> RunConfig:
	return RunConfig(
		'vortex', order=2, mesh='sinusoidal:4', t_end=.2, out=str(out)
	).replace(**changes)


def test_simulate_writes_outputs(tmp_path):
	summary = simulate(short_vortex(tmp_path), verbose=False)

	assert summary['final_time'] == .2
	assert summary['steps'] >= 1
	assert summary['elements'] == 16
	assert summary['h'] == pytest.approx(5.)
	assert summary['min_rho'] > 0 and summary['min_p'] > 0
	assert len(summary['l2_errors']) == 4

	with open(tmp_path / 'summary.json') as file:
		written = json.load(file)
	assert written['steps'] == summary['steps']
	assert written['config']['case'] == 'vortex'

	series = read_csv(tmp_path / 'time_series.csv')
	assert list(series.columns) == TIME_SERIES_COLUMNS
	assert len(series) == summary['steps'] + 1
	assert series['t'].iloc[-1] == .2
	np.testing.assert_allclose(series['mass'], series['mass'][0], rtol=1e-12)

	for name in ('rho', 'rho_u', 'rho_v', 'E', 'p', 'indicator'):
		assert os.path.exists(tmp_path / 'snapshots' / f'{name}_final.csv')


def test_snapshot_cadence(tmp_path):
	config = short_vortex(tmp_path, snapshot_every=1)
	summary = simulate(config, verbose=False)
	for step in range(summary['steps'] + 1):
		assert os.path.exists(tmp_path / 'snapshots' / f'rho_{step:06d}.csv')


def test_riemann_snapshots_are_clipped(tmp_path):
	config = RunConfig('riemann12', order=1, mesh='cartesian:4', t_end=.01, out=str(tmp_path))
	simulate(config, verbose=False, outputs=True)
	frame = read_csv(tmp_path / 'snapshots' / 'rho_final.csv')
	assert frame['x'].max() <= 1. and frame['y'].max() <= 1.


def test_run_exit_codes(tmp_path, monkeypatch):
	assert run(short_vortex(tmp_path, t_end=.05), verbose=False) == EXIT_SUCCESS

	missing = RunConfig('custom-mesh', mesh=f'file:{tmp_path}/none.mesh', out=str(tmp_path))
	assert run(missing, verbose=False) == EXIT_CONFIG_ERROR

	def failing_step(self, field, t_end=None, dt=None):
		raise AdmissibilityError('negative density', element=3, time=field.t)

	monkeypatch.setattr(runner.TimeIntegrator, 'step', failing_step)
	out = tmp_path / 'failed'
	assert run(short_vortex(out), verbose=False) == EXIT_ADMISSIBILITY_ERROR
	assert os.path.exists(out / 'snapshots' / 'rho_last_good.csv')
	assert len(read_csv(out / 'time_series.csv')) == 1


def test_convergence_study(tmp_path):
	config = short_vortex(tmp_path, order=1, t_end=.05)
	rows = convergence_study(config, ['sinusoidal:2', 'sinusoidal:4'], verbose=False)
	assert len(rows) == 2
	assert rows[0]['order_rho'] is None
	assert np.isfinite(rows[1]['order_rho'])
	assert rows[1]['h'] == pytest.approx(rows[0]['h'] / 2)
	table = read_csv(tmp_path / 'convergence.csv')
	assert list(table.columns[:2]) == ['h', 'err_rho']

	with pytest.raises(ConfigurationError):
		convergence_study(config, [], verbose=False)
	riemann = RunConfig('riemann12', order=1, t_end=.01, out=str(tmp_path))
	with pytest.raises(ConfigurationError, match='exact solution'):
		convergence_study(riemann, ['cartesian:2'], verbose=False)
