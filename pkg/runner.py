'''
Contains the run loop behind `solver.py` and `convergence.py`.
'''

import time
from typing import Any

import numpy as np

from configs import FLT_PREC, SPACES, THREADS_ENV_VAR
from cases import Case, build_case
from dgsem import Discretization, FieldState
from diag import conservation_totals, l2_error, observed_orders, total_entropy
from limiter import LimiterParams
from oe import OEFilter
from physics import pressure
from timeint import StepReport, TimeIntegrator
from utils import (
	RunConfig, ConfigurationError, GeometryError, AdmissibilityError,
	clear_stdout, format_duration, show_exception, get_num_threads,
	limit_threads, clip_mask, write_snapshot, write_indicator,
	write_time_series, write_table, write_summary
)

# Exit codes of `run`
EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 1
EXIT_ADMISSIBILITY_ERROR = 2

COMPONENTS = ('rho', 'mx', 'my', 'E')



def _snapshot_fields(U: np.ndarray) -> dict[str, np.ndarray]:
	return {
		'rho': U[..., 0],
		'rho_u': U[..., 1],
		'rho_v': U[..., 2],
		'E': U[..., 3],
		'p': pressure(U)
	}


def _series_row(
	field: FieldState,
	case: Case,
	report: StepReport | None = None
) -> dict[str, Any]:

	U = field.U
	mass, mom_x, mom_y, energy = conservation_totals(field, case.mesh)
	return {
		'step': 0 if report is None else report.step,
		't': field.t,
		'dt': 0. if report is None else report.dt,
		'I_eta': total_entropy(field, case.mesh) if report is None else report.entropy,
		'mass': mass,
		'mom_x': mom_x,
		'mom_y': mom_y,
		'energy': energy,
		'min_rho': float(U[..., 0].min()),
		'min_p': float(pressure(U).min()),
		'flagged_fraction': 0. if report is None else report.flagged_fraction,
		'oe_seconds': 0. if report is None else report.oe_seconds,
		'oe_elements': 0 if report is None else report.oe_elements
	}


def write_fields(
	out_dir: str,
	label: str,
	field: FieldState,
	case: Case,
	oe_filter: OEFilter,
	header: dict[str, Any]
) -> None:
	'''
	Writes one snapshot CSV per field and the indicator snapshot.
	'''
	mesh = case.mesh
	header = header | {'t': field.t}
	mask = clip_mask(mesh.coords, case.clip)
	for name, values in _snapshot_fields(field.U).items():
		write_snapshot(
			f'{out_dir}/snapshots/{name}_{label}.csv', values, mesh.coords,
			header, mask
		)
	write_indicator(
		f'{out_dir}/snapshots/indicator_{label}.csv',
		oe_filter.indicator(field), oe_filter.threshold, header
	)


def print_progress(
	report: StepReport,
	t_end: float,
	elapsed: float,
	flt_prec: int = FLT_PREC,
	spaces: int = SPACES
) -> None:

	remaining = elapsed * (t_end - report.t) / report.t if report.t > 0 else 0.
	clear_stdout(spaces)
	print(
		f'Step [{report.step}]',
		f'Time [{round(report.t, flt_prec)}/{t_end}]',
		f'dt [{report.dt:.{flt_prec}g}]',
		f'Flagged [{round(100 * report.flagged_fraction, flt_prec)}%]',
		f'Min rho [{report.min_rho:.{flt_prec}g}]',
		f'Min p [{report.min_p:.{flt_prec}g}]',
		f'Time remaining [{format_duration(remaining)}]',
		end=''
	)


def simulate(
	config: RunConfig,
	verbose: bool = True,
	outputs: bool = True
) -> dict[str, Any]:
	'''
	Runs `config` to its final time and returns the run summary.

	With `outputs` the snapshots, time series and summary.json are written
	under `config.out`. On an admissibility failure the last good field is
	flushed before the error propagates.
	'''
	start = time.perf_counter()
	header = config.as_dict()
	out_dir = config.out
	if config.seed is not None:
		np.random.seed(config.seed)

	if verbose:
		print('Building mesh and initializing case...')
	case = build_case(
		config.case, config.mesh_spec, config.order, config.mach, config.angle
	)
	mesh = case.mesh
	if verbose:
		print(
			f'Mesh with {mesh.num_elements} elements of degree {mesh.degree}, '
			f'boundary: {case.boundary if case.boundary else "periodic"}'
		)

	discretization = Discretization(flux=config.flux, boundary=case.boundary)
	oe_filter = OEFilter(
		mesh, config.oe_scale, config.indicator_threshold, config.oe_mode
	)
	integrator = TimeIntegrator(
		mesh, discretization, oe_filter, LimiterParams(), config.cfl
	)
	if verbose:
		print(
			f'Filter mode {oe_filter.mode}, flux {config.flux}, '
			f'CFL constant {round(integrator.cfl, FLT_PREC)}'
		)

	field = case.field
	rows = [_series_row(field, case)]
	reports = []
	if outputs and config.snapshot_every:
		write_fields(out_dir, f'{0:06d}', field, case, oe_filter, header)

	if verbose:
		print('Starting time stepping...\n')
	try:
		while field.t < config.t_end:
			field_next, report = integrator.step(field, config.t_end)
			field = field_next
			reports.append(report)
			rows.append(_series_row(field, case, report))
			if verbose:
				print_progress(report, config.t_end, time.perf_counter() - start)
			if outputs and config.snapshot_every \
					and report.step % config.snapshot_every == 0:
				write_fields(
					out_dir, f'{report.step:06d}', field, case, oe_filter, header
				)

	except AdmissibilityError:
		if outputs:
			write_fields(out_dir, 'last_good', field, case, oe_filter, header)
			write_time_series(f'{out_dir}/time_series.csv', rows, header)
		raise

	finally:
		if verbose:
			clear_stdout(SPACES)

	wall_seconds = time.perf_counter() - start
	summary = {
		'case': config.case,
		'final_time': field.t,
		'steps': len(reports),
		'elements': mesh.num_elements,
		'degree': mesh.degree,
		'h': float(np.sqrt(mesh.area / mesh.num_elements)),
		'totals': conservation_totals(field, mesh).tolist(),
		'entropy': total_entropy(field, mesh),
		'min_rho': float(field.U[..., 0].min()),
		'max_rho': float(field.U[..., 0].max()),
		'min_p': float(pressure(field.U).min()),
		'flagged_fraction': reports[-1].flagged_fraction if reports else 0.,
		'wall_seconds': wall_seconds,
		'mean_oe_seconds': float(np.mean([r.oe_seconds for r in reports])) if reports else 0.
	}
	if case.exact is not None:
		summary['l2_errors'] = l2_error(field, case.exact, mesh).tolist()

	if outputs:
		write_fields(out_dir, 'final', field, case, oe_filter, header)
		write_time_series(f'{out_dir}/time_series.csv', rows, header)
		write_summary(f'{out_dir}/summary.json', summary | {'config': header})

	if verbose:
		print(
			f'Finished {summary["steps"]} steps to t = {round(field.t, FLT_PREC)}',
			f'in {format_duration(wall_seconds)}'
		)
		if 'l2_errors' in summary:
			errors = ', '.join(
				f'{name} {error:.{FLT_PREC}e}'
				for name, error in zip(COMPONENTS, summary['l2_errors'])
			)
			print(f'L2 errors: {errors}')
	return summary


def run(
	config: RunConfig,
	verbose: bool = True
) -> int:
	'''
	Runs `config` and returns the exit code: 0 on success, 1 on a
	configuration or mesh error, 2 on an admissibility failure.
	'''
	try:
		with limit_threads(get_num_threads(THREADS_ENV_VAR)):
			simulate(config, verbose)
	except AdmissibilityError as e:
		show_exception(e)
		print(f'Last good snapshot written to {config.out}/snapshots')
		return EXIT_ADMISSIBILITY_ERROR
	except (ConfigurationError, GeometryError, OSError) as e:
		show_exception(e)
		return EXIT_CONFIG_ERROR
	return EXIT_SUCCESS


def convergence_study(
	config: RunConfig,
	meshes: list[str],
	verbose: bool = True
) -> list[dict[str, Any]]:
	'''
	Runs `config` on every mesh of `meshes` and writes convergence.csv with
	columns h, err_* and order_* (orders are empty on the first row).
	'''
	if not meshes:
		raise ConfigurationError('mesh: convergence study needs at least one mesh')

	hs, errors = [], []
	for mesh in meshes:
		if verbose:
			print(f'\nResolution {mesh}')
		summary = simulate(config.replace(mesh=mesh), verbose, outputs=False)
		if 'l2_errors' not in summary:
			raise ConfigurationError(
				f'case: {config.case!r} has no exact solution to measure errors'
			)
		hs.append(summary['h'])
		errors.append(summary['l2_errors'])

	orders = observed_orders(errors, hs) if len(hs) > 1 else np.empty((0, 4))
	rows = []
	for index, (h, error) in enumerate(zip(hs, errors)):
		row = {'h': h}
		row |= {f'err_{name}': value for name, value in zip(COMPONENTS, error)}
		for k, name in enumerate(COMPONENTS):
			row[f'order_{name}'] = orders[index - 1, k] if index else None
		rows.append(row)

	columns = ['h'] + [f'err_{name}' for name in COMPONENTS] \
		+ [f'order_{name}' for name in COMPONENTS]
	write_table(
		f'{config.out}/convergence.csv', rows, columns,
		config.as_dict() | {'meshes': ' '.join(meshes)}
	)
	return rows
