'''
Contains the CSV and JSON writers of run outputs.

Every CSV starts with `#` comment lines echoing the run configuration,
followed by a header row; floats are written with 17 significant digits.
'''

import os
import json
from typing import Any

import numpy as np
import pandas as pd

FLOAT_FORMAT = '%.17g'
SNAPSHOT_COLUMNS = ['elem', 'i', 'j', 'x', 'y', 'value']
INDICATOR_COLUMNS = ['elem', 'I', 'flagged']
TIME_SERIES_COLUMNS = [
	'step', 't', 'dt', 'I_eta', 'mass', 'mom_x', 'mom_y', 'energy',
	'min_rho', 'min_p', 'flagged_fraction', 'oe_seconds', 'oe_elements'
]



def make_dirs(path: str) -> None:
	dirs, _ = os.path.split(path)
	if dirs and not os.path.exists(dirs):
		os.makedirs(dirs)


def write_csv(
	frame: pd.DataFrame,
	path: str,
	header: dict[str, Any] | None = None
) -> None:
	'''
	Writes `frame` with the `header` items as leading comment lines.
	'''
	make_dirs(path)
	with open(path, 'w', newline='') as file:
		for key, value in (header or {}).items():
			file.write(f'# {key} = {value}\n')
		frame.to_csv(file, index=False, float_format=FLOAT_FORMAT)


def read_csv(path: str) -> pd.DataFrame:
	return pd.read_csv(path, comment='#', float_precision='round_trip')


def clip_mask(
	coords: np.ndarray,
	box: tuple[float, float, float, float] | None
) -> np.ndarray | None:
	'''
	Nodes of `coords` (..., 2) inside the closed box (x0, x1, y0, y1).
	'''
	if box is None:
		return None
	x0, x1, y0, y1 = box
	x, y = coords[..., 0], coords[..., 1]
	return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)


def snapshot_frame(
	values: np.ndarray,
	coords: np.ndarray,
	mask: np.ndarray | None = None
) -> pd.DataFrame:
	'''
	One row per node of nodal `values` (E, N+1, N+1), optionally restricted
	to the nodes selected by `mask`.
	'''
	E, n, _ = values.shape
	elem, i, j = np.meshgrid(np.arange(E), np.arange(n), np.arange(n), indexing='ij')
	frame = pd.DataFrame({
		'elem': elem.ravel(),
		'i': i.ravel(),
		'j': j.ravel(),
		'x': coords[..., 0].ravel(),
		'y': coords[..., 1].ravel(),
		'value': values.ravel()
	}, columns=SNAPSHOT_COLUMNS)
	if mask is not None:
		frame = frame[mask.ravel()]
	return frame


def write_snapshot(
	path: str,
	values: np.ndarray,
	coords: np.ndarray,
	header: dict[str, Any] | None = None,
	mask: np.ndarray | None = None
) -> None:
	write_csv(snapshot_frame(values, coords, mask), path, header)


def write_indicator(
	path: str,
	indicator: np.ndarray,
	threshold: float,
	header: dict[str, Any] | None = None
) -> None:

	frame = pd.DataFrame({
		'elem': np.arange(len(indicator)),
		'I': indicator,
		'flagged': (indicator > threshold).astype(int)
	}, columns=INDICATOR_COLUMNS)
	write_csv(frame, path, header)


def write_time_series(
	path: str,
	rows: list[dict[str, Any]],
	header: dict[str, Any] | None = None
) -> None:
	write_csv(pd.DataFrame(rows, columns=TIME_SERIES_COLUMNS), path, header)


def write_table(
	path: str,
	rows: list[dict[str, Any]],
	columns: list[str],
	header: dict[str, Any] | None = None
) -> None:
	write_csv(pd.DataFrame(rows, columns=columns), path, header)


def write_summary(
	path: str,
	summary: dict[str, Any]
) -> None:

	make_dirs(path)
	with open(path, 'w') as fp:
		json.dump(summary, fp, indent=2)
