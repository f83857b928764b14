'''
Contains shared fixtures of the test suite.
'''

import numpy as np
import pytest

from dgsem import FieldState
from mesh import build_cartesian, build_sinusoidal
from physics import conservative
from refops import reference_operators



def pytest_configure(config) -> None:
	config.addinivalue_line(
		'markers', 'slow: desk-scale acceptance runs (deselected by default)'
	)


def random_states(
	rng: np.random.Generator,
	shape: tuple[int, ...],
	rho: tuple[float, float] = (.5, 2.),
	speed: float = 1.,
	p: tuple[float, float] = (.5, 2.)
) -> np.ndarray:
	'''
	Admissible conservative states of the given leading shape.
	'''
	return conservative(
		rng.uniform(*rho, shape),
		rng.uniform(-speed, speed, shape),
		rng.uniform(-speed, speed, shape),
		rng.uniform(*p, shape)
	)


def smooth_field(mesh, t: float = 0.) -> FieldState:
	'''
	Smooth periodic-friendly perturbation of a uniform state.
	'''
	x, y = mesh.coords[..., 0], mesh.coords[..., 1]
	rho = 1 + .2 * np.sin(np.pi * x) * np.cos(np.pi * y)
	u = .3 + .1 * np.cos(np.pi * y)
	v = -.2 + .1 * np.sin(np.pi * x)
	p = 1 + .1 * np.cos(np.pi * (x + y))
	return FieldState(conservative(rho, u, v, p), t)


def uniform_field(mesh, state=(1., .3, -.2, 1.)) -> FieldState:
	U = np.broadcast_to(conservative(*state), mesh.coords.shape[:-1] + (4,))
	return FieldState(U.copy(), 0.)


@pytest.fixture
def rng() -> np.random.Generator:
	return np.random.default_rng(1234)


@pytest.fixture(params=[1, 2, 3, 4])
def refops(request):
	return reference_operators(request.param)


@pytest.fixture
def periodic_mesh():
	'''
	4x4 periodic Cartesian mesh on [-1, 1]^2 with N = 3.
	'''
	return build_cartesian(4, 4, (-1., 1., -1., 1.), 3, periodic=True)


@pytest.fixture
def curved_mesh():
	'''
	Periodic sinusoidal mesh on [-1, 1]^2 with N = 3.
	'''
	return build_sinusoidal(4, (-1., 1.), 1., 3)


@pytest.fixture
def walled_mesh():
	'''
	Non-periodic 3x2 Cartesian mesh on [0, 3] x [0, 2] with N = 2.
	'''
	return build_cartesian(3, 2, (0., 3., 0., 2.), 2)
