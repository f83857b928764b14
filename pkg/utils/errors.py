'''
Contains the exception hierarchy of the solver.
'''



class SolverError(Exception):
	'''
	Base class of every error raised by the solver.
	'''



class ConfigurationError(SolverError, ValueError):
	'''
	Invalid run configuration or operator request (bad degree, bad flag,
	unknown case, missing boundary condition).
	'''



class GeometryError(SolverError, ValueError):
	'''
	Invalid geometry: degenerate or inverted elements, duplicate nodes,
	non-conforming faces, singular Gram matrices.
	'''

	def __init__(
		self,
		message: str,
		element: int | None = None
	) -> None:

		if element is not None:
			message = f'element {element}: {message}'
		super().__init__(message)
		self.element = element



class MeshParseError(GeometryError):
	'''
	Malformed mesh file. Carries the 1-based line number of the offence.
	'''

	def __init__(
		self,
		message: str,
		line_number: int | None = None
	) -> None:

		if line_number is not None:
			message = f'line {line_number}: {message}'
		super().__init__(message)
		self.line_number = line_number



class AdmissibilityError(SolverError, ArithmeticError):
	'''
	Non-physical state (non-positive density or pressure, non-finite value).

	Optionally names the element, the node within it, the simulation time
	and the Runge-Kutta stage where the state was found.
	'''

	def __init__(
		self,
		message: str,
		element: int | None = None,
		node: tuple[int, int] | None = None,
		time: float | None = None,
		stage: int | None = None
	) -> None:

		location = []
		if element is not None:
			location.append(f'element {element}')
		if node is not None:
			location.append(f'node {tuple(int(i) for i in node)}')
		if time is not None:
			location.append(f't = {time:.6g}')
		if stage is not None:
			location.append(f'stage {stage}')
		if location:
			message = f'{message} ({", ".join(location)})'
		super().__init__(message)
		self.element = element
		self.node = node
		self.time = time
		self.stage = stage
