'''
Contains the three-stage strong stability preserving Runge-Kutta integrator
with CFL step control and the per-stage filter and limiter pipeline.
'''

import time
from typing import Callable
from dataclasses import dataclass

import numpy as np

from configs import CFL_NUMERATOR
from dgsem import Discretization, FieldState, residual
from diag import total_entropy
from limiter import LimiterParams, limit_field
from mesh import Mesh
from oe import OEFilter
from physics import pressure, wave_speed
from utils.errors import AdmissibilityError, ConfigurationError

# (weight of U^n, weight of U^(s) + dt L(U^(s))) per stage
STAGE_COEFFICIENTS = ((0., 1.), (3 / 4, 1 / 4), (1 / 3, 2 / 3))
# Stage evaluation times as fractions of dt
STAGE_TIMES = (0., 1., .5)

for a, b in STAGE_COEFFICIENTS[1:]:
	assert abs(a + b - 1) < 1e-15, 'SSP-RK3 stages must be convex combinations'



@dataclass
class StepReport:
	step: int
	t: float
	dt: float
	flagged_fraction: float
	min_rho: float
	min_p: float
	entropy: float
	oe_seconds: float = 0.
	oe_elements: int = 0

	def __post_init__(self) -> None:
		assert self.dt > 0, 'Step size must be positive'
		assert 0 <= self.flagged_fraction <= 1, 'Flagged fraction out of range'



def default_cfl(N: int) -> float:
	'''
	K = 0.5 / (2N + 1).
	'''
	return CFL_NUMERATOR / (2 * N + 1)


def compute_dt(
	field: FieldState,
	mesh: Mesh,
	K: float | None = None
) -> float:
	'''
	dt = K min_e h_e / max_{nodes of e}(|u| + c).
	'''
	if K is None:
		K = default_cfl(mesh.degree)
	with np.errstate(invalid='ignore', divide='ignore'):
		speed = wave_speed(field.U).max(axis=(1, 2))
	if not np.isfinite(speed).all():
		e = int(np.argmax(~np.isfinite(speed)))
		raise AdmissibilityError('non-finite wave speed', element=e, time=field.t)
	dt = K * float((mesh.h / speed).min())
	if not dt > 0:
		raise AdmissibilityError('time step collapsed to zero', time=field.t)
	return dt


def ssp_rk3_step(
	field: FieldState,
	dt: float,
	rhs: Callable[[FieldState, int], np.ndarray],
	post_stage: Callable[[FieldState, int], FieldState] | None = None
) -> FieldState:
	'''
	One SSP-RK3 step.

	:param rhs: Time derivative of a stage field; receives the stage index
	:param post_stage: Applied to every stage result (filter, limiter)
	:returns: The field at t + dt

	Each stage a U^n + b (U^(s) + dt L) is evaluated as
	U^n + b (U^(s) + dt L - U^n), so a zero derivative leaves U bitwise intact.
	'''
	U0, t0 = field.U, field.t
	current = field
	for stage, ((_, b), fraction) in enumerate(
		zip(STAGE_COEFFICIENTS, STAGE_TIMES), start=1
	):
		stage_field = FieldState(current.U, t0 + fraction * dt)
		update = current.U + dt * rhs(stage_field, stage)
		U = update if stage == 1 else U0 + b * (update - U0)
		t_next = t0 + (dt if stage != 2 else .5 * dt)
		current = FieldState(U, t_next)
		if post_stage is not None:
			current = post_stage(current, stage)

	return FieldState(current.U, t0 + dt)



class TimeIntegrator:
	'''
	Advances a field with SSP-RK3, applying the OE filter and then the
	positivity limiter after every stage.

	## Parameters
	`mesh`: Mesh of the field
	`discretization`: Spatial operator choices
	`oe_filter`: Filter, or None to skip filtering
	`limiter`: Limiter floors, or None to skip limiting
	`cfl`: CFL constant K, default 0.5 / (2N + 1)
	'''

	def __init__(
		self,
		mesh: Mesh,
		discretization: Discretization = Discretization(),
		oe_filter: OEFilter | None = None,
		limiter: LimiterParams | None = LimiterParams(),
		cfl: float | None = None
	) -> None:

		if cfl is not None and not cfl > 0:
			raise ConfigurationError(f'cfl must be positive, got {cfl}')
		self.mesh = mesh
		self.discretization = discretization
		self.oe_filter = oe_filter
		self.limiter = limiter
		self.cfl = default_cfl(mesh.degree) if cfl is None else cfl
		self.steps = 0

	def compute_dt(self, field: FieldState) -> float:
		return compute_dt(field, self.mesh, self.cfl)

	def step(
		self,
		field: FieldState,
		t_end: float | None = None,
		dt: float | None = None
	) -> tuple[FieldState, StepReport]:
		'''
		Takes one step, clipped so that `t_end` is hit exactly.
		'''
		if dt is None:
			dt = self.compute_dt(field)
		if t_end is not None:
			dt = min(dt, t_end - field.t)
		assert dt > 0, 'Cannot step past the final time'

		mesh = self.mesh
		oe_seconds = 0.
		oe_elements = 0
		flagged = np.zeros(mesh.num_elements, dtype=bool)

		def rhs(stage_field: FieldState, stage: int) -> np.ndarray:
			return residual(stage_field, mesh, self.discretization, stage)

		def post_stage(stage_field: FieldState, stage: int) -> FieldState:
			nonlocal oe_seconds, oe_elements, flagged
			if self.oe_filter is not None and self.oe_filter.enabled:
				start = time.perf_counter()
				stage_field = self.oe_filter(stage_field, dt)
				oe_seconds += time.perf_counter() - start
				flagged = self.oe_filter.flagged
				oe_elements += int(flagged.sum())
			if self.limiter is not None:
				stage_field = limit_field(stage_field, mesh, self.limiter, stage)
			return stage_field

		new_field = ssp_rk3_step(field, dt, rhs, post_stage)
		if t_end is not None and abs(new_field.t - t_end) <= 1e-14 * max(1., abs(t_end)):
			new_field.t = t_end
		self.steps += 1

		U = new_field.U
		report = StepReport(
			step=self.steps,
			t=new_field.t,
			dt=dt,
			flagged_fraction=float(flagged.mean()),
			min_rho=float(U[..., 0].min()),
			min_p=float(pressure(U).min()),
			entropy=total_entropy(new_field, mesh),
			oe_seconds=oe_seconds,
			oe_elements=oe_elements
		)
		return new_field, report
