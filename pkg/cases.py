'''
Contains the test case catalog: initial conditions, exact solutions and the
ghost-state rules of the boundary conditions.

Boundary conditions are imposed weakly: every kind produces an exterior state
that enters the interface numerical flux, nodal values are never overwritten.
'''

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from configs import (
	CASES, GAMMA, FREESTREAM_MACH, FREESTREAM_ANGLE, VORTEX_STRENGTH,
	VORTEX_VELOCITY
)
from dgsem import FieldState
from mesh import Mesh, build_cartesian, build_sinusoidal, load_mesh
from physics import conservative, primitive
from utils.config_utils import MeshSpec
from utils.errors import ConfigurationError

# Post- and pre-shock states (rho, u, v, p) of the double Mach reflection
DMR_POST_SHOCK = (8., 8.25 * np.cos(np.pi / 6), -8.25 * np.sin(np.pi / 6), 116.5)
DMR_PRE_SHOCK = (1.4, 0., 0., 1.)
DMR_SHOCK_X = 1 / 6
DMR_SHOCK_SPEED = 20.

# Quadrant states (rho, u, v, p) of the Riemann problems on [0, 1]^2,
# ordered lower-left, upper-left, lower-right, upper-right
RIEMANN_STATES = {
	12: (
		(.8, 0., 0., 1.),
		(1., .7276, 0., 1.),
		(1., 0., .7276, 1.),
		(.5313, 0., 0., .4)
	),
	13: (
		(.8, .1, -.3, .4),
		(.5197, -.6259, -.3, .4),
		(.5313, .1, .4276, .4),
		(1., .1, -.3, 1.)
	)
}

DOMAINS = {
	'vortex': (-10., 10., -10., 10.),
	'riemann12': (0., 2., 0., 2.),
	'riemann13': (0., 2., 0., 2.),
	'dmr': (0., 4., 0., 1.),
	'freestream': (-1., 1., -1., 1.)
}

# Sub-domain reported for cases run on an extended domain
CLIP_BOXES = {
	'riemann12': (0., 1., 0., 1.),
	'riemann13': (0., 1., 0., 1.)
}



class BoundaryKind(ABC):
	'''
	Rule producing exterior states on a set of boundary nodes.

	`ghost` receives interior states (..., 4), unit outward normals (..., 2),
	node coordinates (..., 2) and the stage time.
	'''

	@abstractmethod
	def ghost(
		self,
		interior: np.ndarray,
		normals: np.ndarray,
		coords: np.ndarray,
		t: float
	) -> np.ndarray:
		pass

	def __repr__(self) -> str:
		return self.__class__.__name__



class Periodic(BoundaryKind):

	def ghost(self, interior, normals, coords, t) -> np.ndarray:
		raise ConfigurationError(
			'periodic sides are paired by the mesh and have no ghost state'
		)



class Inflow(BoundaryKind):
	'''
	Prescribed exterior state.
	'''

	def __init__(self, state: np.ndarray) -> None:
		self.state = np.asarray(state, dtype=float)
		assert self.state.shape == (4,), 'Inflow state must be a single state'

	def ghost(self, interior, normals, coords, t) -> np.ndarray:
		return np.broadcast_to(self.state, interior.shape).copy()

	def __repr__(self) -> str:
		return f'Inflow({np.array2string(self.state, precision=4)})'



class Outflow(BoundaryKind):

	def ghost(self, interior, normals, coords, t) -> np.ndarray:
		return np.array(interior, dtype=float)



class SlipWall(BoundaryKind):
	'''
	Mirror state: same density and pressure, velocity u - 2 (u.n) n.
	'''

	def ghost(self, interior, normals, coords, t) -> np.ndarray:
		return _mirror(interior, normals)



class DMRTop(BoundaryKind):
	'''
	Post-shock state left of the moving front x = 1/6 + (1 + 20 t) / sqrt(3),
	pre-shock state to its right.
	'''

	def ghost(self, interior, normals, coords, t) -> np.ndarray:
		front = DMR_SHOCK_X + (1 + DMR_SHOCK_SPEED * t) / np.sqrt(3)
		behind = coords[..., 0] < front
		return np.where(
			behind[..., None], conservative(*DMR_POST_SHOCK),
			conservative(*DMR_PRE_SHOCK)
		)



class DMRBottom(BoundaryKind):
	'''
	Post-shock state for x < 1/6, reflective wall beyond.
	'''

	def ghost(self, interior, normals, coords, t) -> np.ndarray:
		behind = coords[..., 0] < DMR_SHOCK_X
		return np.where(
			behind[..., None], conservative(*DMR_POST_SHOCK),
			_mirror(interior, normals)
		)



class BoundaryConditions:
	'''
	Map from boundary tag to BoundaryKind, callable as the ghost-state
	function of the residual.
	'''

	def __init__(self, kinds: dict[str, BoundaryKind]) -> None:
		self.kinds = dict(kinds)

	def validate(self, mesh: Mesh) -> None:
		missing = sorted(mesh.tags - set(self.kinds))
		if missing:
			raise ConfigurationError(
				f'no boundary condition for tags {missing}'
			)
		periodic = [tag for tag in mesh.tags if isinstance(self.kinds[tag], Periodic)]
		if periodic:
			raise ConfigurationError(
				f'tags {sorted(periodic)} are mapped to Periodic but the mesh '
				f'has unpaired sides there'
			)

	def __call__(
		self,
		tag: str,
		interior: np.ndarray,
		normals: np.ndarray,
		coords: np.ndarray,
		t: float
	) -> np.ndarray:

		if tag not in self.kinds:
			raise ConfigurationError(f'no boundary condition for tag {tag!r}')
		return ghost_state(self.kinds[tag], interior, normals, t, coords)

	def __repr__(self) -> str:
		return ', '.join(f'{tag}: {kind!r}' for tag, kind in sorted(self.kinds.items()))



@dataclass
class Case:
	'''
	A ready-to-run problem.

	## Parameters
	`name`: Case id
	`mesh`: Mesh of the run
	`field`: Initial field at t = 0
	`boundary`: Boundary conditions, None on periodic meshes
	`exact`: Exact solution exact(x, y, t), if known
	`clip`: Reported sub-domain (x0, x1, y0, y1), if any
	'''
	name: str
	mesh: Mesh
	field: FieldState
	boundary: BoundaryConditions | None = None
	exact: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None = None
	clip: tuple[float, float, float, float] | None = None



def _mirror(
	interior: np.ndarray,
	normals: np.ndarray
) -> np.ndarray:

	rho, u, v, p = primitive(interior)
	nx, ny = normals[..., 0], normals[..., 1]
	normal_velocity = u * nx + v * ny
	return conservative(
		rho, u - 2 * normal_velocity * nx, v - 2 * normal_velocity * ny, p
	)


def ghost_state(
	kind: BoundaryKind,
	interior: np.ndarray,
	n: np.ndarray,
	t: float = 0.,
	coords: np.ndarray | None = None
) -> np.ndarray:
	'''
	Exterior state of `kind` for interior states and unit normals `n`.
	'''
	interior = np.asarray(interior, dtype=float)
	n = np.asarray(n, dtype=float)
	if coords is None:
		coords = np.zeros(interior.shape[:-1] + (2,))
	return kind.ghost(interior, n, np.asarray(coords, dtype=float), t)


def vortex_exact(
	x: np.ndarray | float,
	y: np.ndarray | float,
	t: float,
	strength: float = VORTEX_STRENGTH,
	velocity: tuple[float, float] = VORTEX_VELOCITY,
	period: float | None = None
) -> np.ndarray:
	'''
	Isentropic vortex advected by the background velocity.

	With `period` set, the vortex center is wrapped into the periodic square
	[-period / 2, period / 2]^2.
	'''
	ub, vb = velocity
	dx = np.asarray(x, dtype=float) - ub * t
	dy = np.asarray(y, dtype=float) - vb * t
	if period is not None:
		dx = (dx + period / 2) % period - period / 2
		dy = (dy + period / 2) % period - period / 2

	decay = np.exp(1 - dx ** 2 - dy ** 2)
	swirl = strength / (2 * np.pi) * np.sqrt(decay)
	u = ub - swirl * dy
	v = vb + swirl * dx
	T = 1 - (GAMMA - 1) * strength ** 2 / (8 * GAMMA * np.pi ** 2) * decay
	rho = T ** (1 / (GAMMA - 1))
	return conservative(rho, u, v, rho * T)


def riemann_initial(
	case: int,
	x: np.ndarray | float,
	y: np.ndarray | float
) -> np.ndarray:
	'''
	Quadrant states of Riemann configuration 12 or 13 on [0, 1]^2, mirrored
	across x = 1 and y = 1 onto [0, 2]^2.
	'''
	if case not in RIEMANN_STATES:
		raise ConfigurationError(
			f'unknown Riemann configuration {case}, expected one of '
			f'{sorted(RIEMANN_STATES)}'
		)
	x = np.asarray(x, dtype=float)
	y = np.asarray(y, dtype=float)
	x = np.where(x > 1, 2 - x, x)
	y = np.where(y > 1, 2 - y, y)

	quadrant = 2 * (x >= .5) + (y >= .5)
	states = conservative(*np.array(RIEMANN_STATES[case]).T)
	return states[quadrant]


def dmr_initial(
	x: np.ndarray | float,
	y: np.ndarray | float
) -> np.ndarray:
	'''
	Mach 10 shock through (1/6, 0) inclined at 60 degrees.
	'''
	x = np.asarray(x, dtype=float)
	y = np.asarray(y, dtype=float)
	behind = x < DMR_SHOCK_X + y / np.sqrt(3)
	return np.where(
		behind[..., None], conservative(*DMR_POST_SHOCK),
		conservative(*DMR_PRE_SHOCK)
	)


def dmr_boundary(
	tag: str,
	interior: np.ndarray,
	n: np.ndarray,
	coords: np.ndarray,
	t: float
) -> np.ndarray:
	'''
	Exterior states of the double Mach reflection on its four sides.
	'''
	return dmr_boundary_conditions()(tag, interior, n, coords, t)


def dmr_boundary_conditions() -> BoundaryConditions:
	return BoundaryConditions({
		'left': Inflow(conservative(*DMR_POST_SHOCK)),
		'right': Outflow(),
		'top': DMRTop(),
		'bottom': DMRBottom()
	})


def freestream_state(
	mach: float = FREESTREAM_MACH,
	angle: float = FREESTREAM_ANGLE
) -> np.ndarray:
	'''
	rho = 1, p = 1 flow at Mach `mach`, inclined `angle` degrees.
	'''
	speed = mach * np.sqrt(GAMMA)
	theta = np.deg2rad(angle)
	return conservative(1., speed * np.cos(theta), speed * np.sin(theta), 1.)


def freestream_boundary_conditions(
	mesh: Mesh,
	state: np.ndarray
) -> BoundaryConditions:
	'''
	Maps tags by name: inflow, outflow and wall.
	'''
	named = {'inflow': Inflow(state), 'outflow': Outflow(), 'wall': SlipWall()}
	unknown = sorted(mesh.tags - set(named))
	if unknown:
		raise ConfigurationError(
			f'unknown boundary tags {unknown}, expected inflow, outflow or wall'
		)
	return BoundaryConditions({tag: named[tag] for tag in mesh.tags})


def build_mesh(
	case: str,
	spec: MeshSpec,
	N: int
) -> Mesh:
	'''
	Builds the mesh described by `spec` on the domain of `case`.
	'''
	if spec.kind == 'file':
		return load_mesh(spec.path).with_degree(N)
	if case not in DOMAINS:
		raise ConfigurationError(f'case {case!r} needs a mesh file')

	domain = DOMAINS[case]
	x0, x1, y0, y1 = domain
	if spec.kind == 'sinusoidal':
		if x1 - x0 != y1 - y0 or case == 'dmr':
			raise ConfigurationError(
				f'sinusoidal meshes need a square periodic domain, case {case!r} '
				f'has {domain}'
			)
		return build_sinusoidal(spec.nx, (x0, x1), spec.alpha, N)

	nx, ny = spec.nx, spec.ny
	if ny is None:
		# M elements along the shorter side
		ny = spec.nx
		nx = round(spec.nx * (x1 - x0) / (y1 - y0))
	return build_cartesian(nx, ny, domain, N, periodic=case != 'dmr')


def sample(
	initial: Callable[[np.ndarray, np.ndarray], np.ndarray],
	mesh: Mesh
) -> FieldState:
	'''
	Nodal interpolation of `initial` at t = 0.
	'''
	x, y = mesh.coords[..., 0], mesh.coords[..., 1]
	return FieldState(np.array(initial(x, y), dtype=float), 0.)


def build_case(
	name: str,
	spec: MeshSpec,
	N: int,
	mach: float = FREESTREAM_MACH,
	angle: float = FREESTREAM_ANGLE
) -> Case:
	'''
	Builds mesh, initial field, boundary conditions and exact solution of a
	catalog case.
	'''
	if name not in CASES:
		raise ConfigurationError(f'unknown case {name!r}, expected one of {CASES}')
	if name == 'custom-mesh' and spec.kind != 'file':
		raise ConfigurationError('case custom-mesh needs --mesh file:<path>')

	mesh = build_mesh(name, spec, N)
	boundary = None
	exact = None

	if name == 'vortex':
		period = DOMAINS['vortex'][1] - DOMAINS['vortex'][0]
		exact = lambda x, y, t: vortex_exact(x, y, t, period=period)
		field = sample(lambda x, y: exact(x, y, 0.), mesh)
	elif name in ('riemann12', 'riemann13'):
		configuration = int(name[-2:])
		field = sample(lambda x, y: riemann_initial(configuration, x, y), mesh)
	elif name == 'dmr':
		field = sample(dmr_initial, mesh)
		boundary = dmr_boundary_conditions()
	else:
		state = freestream_state(mach, angle)
		exact = lambda x, y, t: np.broadcast_to(state, np.shape(x) + (4,))
		field = sample(lambda x, y: exact(x, y, 0.), mesh)
		if not mesh.is_periodic:
			boundary = freestream_boundary_conditions(mesh, state)

	if not mesh.is_periodic and boundary is None:
		raise ConfigurationError(
			f'case {name!r} runs on periodic meshes, the mesh has boundary tags '
			f'{sorted(mesh.tags)}'
		)
	if boundary is not None:
		boundary.validate(mesh)

	return Case(
		name=name,
		mesh=mesh,
		field=field,
		boundary=boundary,
		exact=exact,
		clip=CLIP_BOXES.get(name)
	)
