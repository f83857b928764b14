'''
Contains tests of the snapshot, time series and summary writers.
'''

import json

import numpy as np

from utils import (
	clip_mask, read_csv, write_indicator, write_snapshot, write_summary,
	write_table, write_time_series
)
from utils.io_utils import SNAPSHOT_COLUMNS, TIME_SERIES_COLUMNS



def test_snapshot_round_trip(tmp_path, periodic_mesh):
	values = np.sin(periodic_mesh.coords[..., 0]) / 3
	path = tmp_path / 'snapshots' / 'rho_final.csv'
	write_snapshot(str(path), values, periodic_mesh.coords, {'case': 'vortex', 't': .5})

	lines = path.read_text().splitlines()
	assert lines[:2] == ['# case = vortex', '# t = 0.5']
	assert lines[2] == ','.join(SNAPSHOT_COLUMNS)

	frame = read_csv(path)
	assert len(frame) == values.size
	np.testing.assert_array_equal(frame['value'].to_numpy(), values.ravel())
	row = frame.iloc[7]
	assert (row['elem'], row['i'], row['j']) == (0, 1, 3)
	assert row['x'] == periodic_mesh.coords[0, 1, 3, 0]


def test_clipped_snapshot(tmp_path, periodic_mesh):
	mask = clip_mask(periodic_mesh.coords, (0., 1., 0., 1.))
	assert clip_mask(periodic_mesh.coords, None) is None
	# Four elements plus the shared nodes on x = 0 and y = 0
	assert mask.sum() == 4 * 16 + 2 * 2 * 4 + 1
	path = tmp_path / 'clipped.csv'
	write_snapshot(str(path), periodic_mesh.coords[..., 1], periodic_mesh.coords, mask=mask)
	frame = read_csv(path)
	assert frame['x'].min() >= 0. and frame['y'].min() >= 0.


def test_indicator_snapshot(tmp_path):
	path = tmp_path / 'indicator.csv'
	write_indicator(str(path), np.array([0., .01, .5]), .02)
	frame = read_csv(path)
	assert frame['flagged'].tolist() == [0, 0, 1]
	assert frame['I'].tolist() == [0., .01, .5]


def test_time_series_and_tables(tmp_path):
	rows = [{name: 0 for name in TIME_SERIES_COLUMNS} | {'t': 1 / 3}]
	path = tmp_path / 'time_series.csv'
	write_time_series(str(path), rows, {'order': 3})
	frame = read_csv(path)
	assert list(frame.columns) == TIME_SERIES_COLUMNS
	assert frame['t'][0] == 1 / 3

	path = tmp_path / 'convergence.csv'
	write_table(str(path), [{'h': 1., 'order_rho': None}], ['h', 'order_rho'])
	assert np.isnan(read_csv(path)['order_rho'][0])


def test_write_summary(tmp_path):
	path = tmp_path / 'out' / 'summary.json'
	write_summary(str(path), {'steps': 3, 'totals': [1., 2.]})
	assert json.loads(path.read_text()) == {'steps': 3, 'totals': [1., 2.]}
