'''
Contains the curvilinear quadrilateral mesh.

Every element carries the Q_N nodal interpolant of its mapping from the
reference square [-1, 1]^2, so metric terms computed with the LGL
differentiation matrix satisfy the discrete metric identities. Nodal arrays
are indexed [element, i, j] with i running along xi and j along eta.

Element sides are numbered 0 (xi = -1), 1 (xi = +1), 2 (eta = -1) and
3 (eta = +1). Traces along sides 0 and 1 run in increasing j, along sides
2 and 3 in increasing i.
'''

import re
from typing import Callable, NamedTuple
from dataclasses import dataclass

import numpy as np

from refops import ReferenceOperators, interpolation_matrix, reference_operators
from utils.errors import ConfigurationError, GeometryError, MeshParseError

BOUNDARY = 'BOUNDARY'
HEADER_PATTERN = re.compile(r'^esdg-mesh v1 N=(\d+) elements=(\d+)$')
TAG_PATTERN = re.compile(r'^[A-Za-z_][\w\-]*$')

# Absolute tolerance scaled by max(1, domain extent)
CONFORMITY_TOLERANCE = 1e-12



class Face(NamedTuple):
	'''
	One face record. Boundary faces have `right_elem` = -1 and a `tag`.
	'''
	left_elem: int
	left_side: int
	right_elem: int = -1
	right_side: int = -1
	reversed: bool = False
	tag: str | None = None

	@property
	def is_boundary(self) -> bool:
		return self.right_elem < 0



@dataclass(frozen=True, eq=False)
class ElementGeometry:
	'''
	Geometry of a single element.

	## Parameters
	`coords`: (N+1, N+1, 2) nodal coordinates
	`x_xi`, `x_eta`, `y_xi`, `y_eta`: (N+1, N+1) metric derivatives
	`jacobian`: (N+1, N+1) values of x_xi y_eta - x_eta y_xi
	`normals`: (4, N+1, 2) scaled outward normals per side
	`measure`: (4, N+1) lengths of `normals`
	`mass`: (N+1, N+1) quadrature weights w_i w_j J
	`h`: Inscribed-radius estimate
	'''

	coords: np.ndarray
	x_xi: np.ndarray
	x_eta: np.ndarray
	y_xi: np.ndarray
	y_eta: np.ndarray
	jacobian: np.ndarray
	normals: np.ndarray
	measure: np.ndarray
	mass: np.ndarray
	h: float

	@property
	def unit_normals(self) -> np.ndarray:
		return self.normals / self.measure[..., None]



def side_nodes(N: int) -> tuple[np.ndarray, np.ndarray]:
	'''
	Index arrays (I, J), each (4, N+1), of the nodes on each side.
	'''
	n = N + 1
	running = np.arange(n)
	I = np.stack([np.zeros(n, int), np.full(n, N), running, running])
	J = np.stack([running, running, np.zeros(n, int), np.full(n, N)])
	return I, J


def _metric_terms(
	coords: np.ndarray,
	D: np.ndarray
) -> tuple[np.ndarray, ...]:

	d_xi = np.einsum('ia,eajc->eijc', D, coords)
	d_eta = np.einsum('ja,eiac->eijc', D, coords)
	x_xi, y_xi = d_xi[..., 0], d_xi[..., 1]
	x_eta, y_eta = d_eta[..., 0], d_eta[..., 1]
	return x_xi, x_eta, y_xi, y_eta


def _batched_geometry(
	coords: np.ndarray,
	refops: ReferenceOperators
) -> dict[str, np.ndarray]:
	'''
	Metric terms, Jacobians, scaled normals and h for coords (E, n, n, 2).
	'''
	N = refops.degree
	coords = np.asarray(coords, dtype=float)
	assert coords.shape[1:] == (N + 1, N + 1, 2), \
		f'Expected nodal coordinates of shape (E, {N+1}, {N+1}, 2)'
	if not np.isfinite(coords).all():
		bad = int(np.argwhere(~np.isfinite(coords))[0][0])
		raise GeometryError('non-finite nodal coordinates', element=bad)

	x_xi, x_eta, y_xi, y_eta = _metric_terms(coords, refops.diff_matrix)
	jacobian = x_xi * y_eta - x_eta * y_xi
	inverted = (jacobian <= 0).any(axis=(1, 2))
	if inverted.any():
		e = int(np.argmax(inverted))
		raise GeometryError(
			f'non-positive Jacobian (min {jacobian[e].min():.6g})', element=e
		)

	# Contravariant directions J grad(xi) and J grad(eta)
	grad_xi = np.stack([y_eta, -x_eta], axis=-1)
	grad_eta = np.stack([-y_xi, x_xi], axis=-1)
	normals = np.stack([
		-grad_xi[:, 0, :],
		grad_xi[:, N, :],
		-grad_eta[:, :, 0],
		grad_eta[:, :, N]
	], axis=1)
	measure = np.linalg.norm(normals, axis=-1)

	# Centroid to side-chord distances
	mass = refops.weights_2d * jacobian
	centroid = np.einsum('eij,eijc->ec', mass, coords) \
		/ mass.sum(axis=(1, 2))[:, None]
	I, J = side_nodes(N)
	start = coords[:, I[:, 0], J[:, 0]]
	chord = coords[:, I[:, -1], J[:, -1]] - start
	rel = centroid[:, None, :] - start
	cross = np.abs(chord[..., 0] * rel[..., 1] - chord[..., 1] * rel[..., 0])
	h = (cross / np.linalg.norm(chord, axis=-1)).min(axis=1)

	return dict(
		coords=coords, x_xi=x_xi, x_eta=x_eta, y_xi=y_xi, y_eta=y_eta,
		jacobian=jacobian, normals=normals, measure=measure, mass=mass, h=h
	)


def compute_geometry(
	nodal_coords: np.ndarray,
	refops: ReferenceOperators
) -> ElementGeometry:
	'''
	Geometry of one element from its (N+1, N+1, 2) nodal coordinates.
	'''
	data = _batched_geometry(np.asarray(nodal_coords)[None], refops)
	return ElementGeometry(**{
		key: (float(value[0]) if key == 'h' else value[0])
		for key, value in data.items()
	})



class Mesh:
	'''
	Conforming quadrilateral mesh of Q_N elements.

	## Parameters
	`coords`: (E, N+1, N+1, 2) nodal coordinates
	`faces`: Face records, one per element side pair or boundary side
	`refops`: Reference operators of degree N
	`validate`: Check that every side is covered once and traces conform
	'''

	def __init__(
		self,
		coords: np.ndarray,
		faces: list[Face],
		refops: ReferenceOperators,
		validate: bool = True
	) -> None:

		geometry = _batched_geometry(coords, refops)
		self.refops = refops
		self.degree = refops.degree
		self.faces = list(faces)
		self.coords = geometry['coords']
		self.x_xi = geometry['x_xi']
		self.x_eta = geometry['x_eta']
		self.y_xi = geometry['y_xi']
		self.y_eta = geometry['y_eta']
		self.jacobian = geometry['jacobian']
		self.normals = geometry['normals']
		self.measure = geometry['measure']
		self.mass = geometry['mass']
		self.h = geometry['h']
		for array in geometry.values():
			array.setflags(write=False)

		E = self.num_elements
		self.neighbor = np.full((E, 4), -1)
		self.neighbor_side = np.full((E, 4), -1)
		self.neighbor_reversed = np.zeros((E, 4), dtype=bool)
		self.side_tag = np.full((E, 4), None, dtype=object)
		self._index_faces()

		interior = [face for face in self.faces if not face.is_boundary]
		boundary = [face for face in self.faces if face.is_boundary]
		self.interior_left = np.array([f.left_elem for f in interior], int)
		self.interior_left_side = np.array([f.left_side for f in interior], int)
		self.interior_right = np.array([f.right_elem for f in interior], int)
		self.interior_right_side = np.array(
			[f.right_side for f in interior], int
		)
		self.interior_reversed = np.array([f.reversed for f in interior], bool)
		self.boundary_elem = np.array([f.left_elem for f in boundary], int)
		self.boundary_side = np.array([f.left_side for f in boundary], int)
		self.boundary_tags = np.array([f.tag for f in boundary], dtype=object)

		if validate:
			bad = nonconforming_faces(self)
			if bad:
				face = self.faces[bad[0]]
				raise GeometryError(
					f'face {bad[0]} does not conform with element '
					f'{face.right_elem}', element=face.left_elem
				)

	def _index_faces(self) -> None:
		E = self.num_elements
		for index, face in enumerate(self.faces):
			owners = [(face.left_elem, face.left_side)]
			if not face.is_boundary:
				owners.append((face.right_elem, face.right_side))
			for elem, side in owners:
				if not (0 <= elem < E and 0 <= side < 4):
					raise GeometryError(f'face {index} references a missing side')
				if self.neighbor[elem, side] != -1 \
						or self.side_tag[elem, side] is not None:
					raise GeometryError(
						f'side {side} is owned by more than one face', element=elem
					)

			if face.is_boundary:
				self.side_tag[face.left_elem, face.left_side] = face.tag
				continue
			(left, left_side), (right, right_side) = owners
			self.neighbor[left, left_side] = right
			self.neighbor_side[left, left_side] = right_side
			self.neighbor[right, right_side] = left
			self.neighbor_side[right, right_side] = left_side
			self.neighbor_reversed[left, left_side] = face.reversed
			self.neighbor_reversed[right, right_side] = face.reversed

		uncovered = (self.neighbor < 0) & (self.side_tag == None)
		if uncovered.any():
			elem, side = (int(i) for i in np.argwhere(uncovered)[0])
			raise GeometryError(f'side {side} has no face record', element=elem)

	@property
	def num_elements(self) -> int:
		return self.coords.shape[0]

	@property
	def num_nodes(self) -> int:
		return self.degree + 1

	@property
	def tags(self) -> set[str]:
		return set(self.boundary_tags.tolist())

	@property
	def is_periodic(self) -> bool:
		return len(self.boundary_tags) == 0

	@property
	def area(self) -> float:
		return float(self.mass.sum())

	def cell_average(
		self,
		values: np.ndarray,
		elems: np.ndarray | slice = slice(None)
	) -> np.ndarray:
		'''
		J-weighted means (k, ...) of nodal `values` (k, N+1, N+1, ...) living
		on elements `elems`.
		'''
		mass = self.mass[elems]
		total = np.einsum('eij,eij...->e...', mass, values)
		volume = mass.sum(axis=(1, 2))
		return total / volume.reshape((-1,) + (1,) * (total.ndim - 1))

	@property
	def extent(self) -> float:
		return float(np.ptp(self.coords.reshape(-1, 2), axis=0).max())

	def element(self, e: int) -> ElementGeometry:
		return ElementGeometry(
			coords=self.coords[e], x_xi=self.x_xi[e], x_eta=self.x_eta[e],
			y_xi=self.y_xi[e], y_eta=self.y_eta[e], jacobian=self.jacobian[e],
			normals=self.normals[e], measure=self.measure[e], mass=self.mass[e],
			h=float(self.h[e])
		)

	def is_cartesian(self, tol: float = 1e-12) -> bool:
		'''
		True if every element is an axis-aligned rectangle with constant metric.
		'''
		scale = max(
			1., float(np.abs(self.x_xi).max()), float(np.abs(self.y_eta).max())
		)
		skew = max(float(np.abs(self.x_eta).max()), float(np.abs(self.y_xi).max()))
		if skew > tol * scale:
			return False
		for metric in (self.x_xi, self.y_eta):
			spread = metric.max(axis=(1, 2)) - metric.min(axis=(1, 2))
			if spread.max() > tol * scale:
				return False
		return True

	def traces(
		self,
		values: np.ndarray,
		elems: np.ndarray,
		sides: np.ndarray,
		reversed: np.ndarray | None = None
	) -> np.ndarray:
		'''
		Side traces of nodal `values` (E, n, n, ...) for each (elem, side)
		pair, optionally reversed, as an (F, n, ...) array.
		'''
		I, J = side_nodes(self.degree)
		I, J = I[sides], J[sides]
		if reversed is not None:
			I = np.where(reversed[:, None], I[:, ::-1], I)
			J = np.where(reversed[:, None], J[:, ::-1], J)
		return values[elems[:, None], I, J]

	def with_degree(self, N: int) -> 'Mesh':
		'''
		Re-interpolates the element mappings onto degree-N LGL nodes.
		'''
		if N == self.degree:
			return self
		refops = reference_operators(N)
		interp = interpolation_matrix(self.refops.nodes, refops.nodes)
		coords = np.einsum('pa,qb,eabc->epqc', interp, interp, self.coords)
		return Mesh(coords, self.faces, refops)



def nonconforming_faces(mesh: Mesh) -> list[int]:
	'''
	Indices into `mesh.faces` of interior faces whose aligned traces differ by
	more than a constant translation, or whose scaled normals do not cancel.
	'''
	tol = CONFORMITY_TOLERANCE * max(1., mesh.extent)
	bad = []
	interior = [
		index for index, face in enumerate(mesh.faces) if not face.is_boundary
	]
	if not interior:
		return bad

	left_x = mesh.traces(mesh.coords, mesh.interior_left, mesh.interior_left_side)
	right_x = mesh.traces(
		mesh.coords, mesh.interior_right, mesh.interior_right_side,
		mesh.interior_reversed
	)
	offset = left_x - right_x
	spread = np.abs(offset - offset[:, :1]).max(axis=(1, 2))

	left_n = mesh.normals[mesh.interior_left, mesh.interior_left_side]
	right_n = mesh.normals[mesh.interior_right, mesh.interior_right_side]
	right_n = np.where(
		mesh.interior_reversed[:, None, None], right_n[:, ::-1], right_n
	)
	normal_scale = max(1., float(mesh.measure.max()))
	mismatch = np.abs(left_n + right_n).max(axis=(1, 2))

	for k in np.flatnonzero((spread > tol) | (mismatch > tol * normal_scale)):
		bad.append(interior[k])
	return bad


def metric_identity_residual(mesh: Mesh) -> float:
	'''
	Max over elements and nodes of |D_xi(y_eta) - D_eta(y_xi)| and
	|D_xi(x_eta) - D_eta(x_xi)|.
	'''
	D = mesh.refops.diff_matrix
	residual = 0.
	for along_eta, along_xi in ((mesh.y_eta, mesh.y_xi), (mesh.x_eta, mesh.x_xi)):
		d_xi = np.einsum('ia,eaj->eij', D, along_eta)
		d_eta = np.einsum('ja,eia->eij', D, along_xi)
		residual = max(residual, float(np.abs(d_xi - d_eta).max()))
	return residual


def build_cartesian(
	nx: int,
	ny: int,
	domain: tuple[float, float, float, float],
	N: int,
	periodic: bool | tuple[bool, bool] = False,
	tags: dict[str, str] | None = None,
	mapping: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
) -> Mesh:
	'''
	Uniform nx x ny grid on `domain` = (x0, x1, y0, y1).

	## Parameters
	`periodic`: Identify opposite sides in x and/or y
	`tags`: Boundary tags of the 'left', 'right', 'bottom' and 'top' sides,
	defaulting to those names
	`mapping`: Optional map applied to every nodal coordinate
	'''
	if nx < 1 or ny < 1:
		raise GeometryError(f'grid must have at least one element, got {nx}x{ny}')
	x0, x1, y0, y1 = map(float, domain)
	if not (x1 > x0 and y1 > y0):
		raise GeometryError(f'degenerate rectangle {domain}')
	periodic_x, periodic_y = (periodic, periodic) \
		if isinstance(periodic, bool) else periodic
	tags = {
		side: side for side in ('left', 'right', 'bottom', 'top')
	} | (tags or {})

	refops = reference_operators(N)
	ref = (refops.nodes + 1) / 2
	xs = x0 + (x1 - x0) * (np.arange(nx)[:, None] + ref[None, :]) / nx
	ys = y0 + (y1 - y0) * (np.arange(ny)[:, None] + ref[None, :]) / ny

	# Element e = ey * nx + ex, nodal [i, j] runs along x then y
	X = np.broadcast_to(xs[None, :, :, None], (ny, nx, N + 1, N + 1))
	Y = np.broadcast_to(ys[:, None, None, :], (ny, nx, N + 1, N + 1))
	X = X.reshape(-1, N + 1, N + 1)
	Y = Y.reshape(-1, N + 1, N + 1)
	if mapping is not None:
		X, Y = mapping(X, Y)
	coords = np.stack([X, Y], axis=-1)

	faces = []
	index = lambda ex, ey: ey * nx + ex
	for ey in range(ny):
		for ex in range(nx):
			e = index(ex, ey)
			if ex < nx - 1:
				faces.append(Face(e, 1, index(ex + 1, ey), 0))
			elif periodic_x:
				faces.append(Face(e, 1, index(0, ey), 0))
			else:
				faces.append(Face(e, 1, tag=tags['right']))
			if ex == 0 and not periodic_x:
				faces.append(Face(e, 0, tag=tags['left']))

			if ey < ny - 1:
				faces.append(Face(e, 3, index(ex, ey + 1), 2))
			elif periodic_y:
				faces.append(Face(e, 3, index(ex, 0), 2))
			else:
				faces.append(Face(e, 3, tag=tags['top']))
			if ey == 0 and not periodic_y:
				faces.append(Face(e, 2, tag=tags['bottom']))

	return Mesh(coords, faces, refops)


def sinusoidal_mapping(
	alpha: float,
	amplitude: tuple[float, float] = (.05, .1)
) -> Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:

	ax, ay = amplitude
	def mapping(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
		kx, ky = alpha * np.pi * x, alpha * np.pi * y
		return (
			x + ax * np.sin(kx) * np.cos(ky),
			y + ay * np.cos(kx) * np.sin(ky)
		)
	return mapping


def build_sinusoidal(
	M: int,
	domain: tuple[float, float],
	alpha: float,
	N: int,
	amplitude: tuple[float, float] = (.05, .1),
	periodic: bool = True
) -> Mesh:
	'''
	M x M grid on the square [a, b]^2 with nodes displaced by
	x' = x + 0.05 sin(a pi x) cos(a pi y), y' = y + 0.1 cos(a pi x) sin(a pi y).
	'''
	if M < 2:
		raise GeometryError(f'sinusoidal mesh needs M >= 2, got {M}')
	a, b = domain
	return build_cartesian(
		M, M, (a, b, a, b), N, periodic=periodic,
		mapping=sinusoidal_mapping(alpha, amplitude)
	)


def save_mesh(
	mesh: Mesh,
	path: str
) -> None:

	N, E = mesh.degree, mesh.num_elements
	lines = [f'esdg-mesh v1 N={N} elements={E}']
	for e in range(E):
		for j in range(N + 1):
			for i in range(N + 1):
				x, y = mesh.coords[e, i, j]
				lines.append(f'{x:.17g} {y:.17g}')

	lines.append('faces')
	for face in mesh.faces:
		if face.is_boundary:
			lines.append(f'{face.left_elem} {face.left_side} {BOUNDARY} {face.tag}')
		else:
			lines.append(
				f'{face.left_elem} {face.left_side} {face.right_elem} '
				f'{face.right_side} {int(face.reversed)}'
			)

	with open(path, 'w') as file:
		file.write('\n'.join(lines) + '\n')


def load_mesh(path: str) -> Mesh:
	'''
	Reads a mesh written by `save_mesh` (or by hand in the same format).
	'''
	with open(path) as file:
		lines = file.read().splitlines()

	if not lines:
		raise MeshParseError('empty mesh file', line_number=1)
	match = HEADER_PATTERN.match(lines[0].strip())
	if match is None:
		raise MeshParseError(f'malformed header {lines[0]!r}', line_number=1)
	N, E = int(match.group(1)), int(match.group(2))
	try:
		refops = reference_operators(N)
	except ConfigurationError as exc:
		raise MeshParseError(str(exc), line_number=1) from exc
	if E < 1:
		raise MeshParseError('mesh must contain at least one element', line_number=1)

	n = N + 1
	num_coords = E * n * n
	coords = np.empty((E, n, n, 2))
	for k in range(num_coords):
		line_number = k + 2
		if line_number > len(lines):
			raise MeshParseError(
				f'expected {num_coords} coordinate lines, file ended',
				line_number=line_number
			)
		text = lines[line_number - 1].split()
		if len(text) != 2 or text[0] == 'faces':
			raise MeshParseError(
				f'expected "x y" (mismatched element count?), got {lines[line_number - 1]!r}',
				line_number=line_number
			)
		try:
			xy = [float(value) for value in text]
		except ValueError:
			raise MeshParseError(
				f'invalid coordinate {lines[line_number - 1]!r}',
				line_number=line_number
			) from None
		e, rest = divmod(k, n * n)
		j, i = divmod(rest, n)
		coords[e, i, j] = xy

	faces_line = num_coords + 2
	if faces_line > len(lines) or lines[faces_line - 1].strip() != 'faces':
		raise MeshParseError(
			'expected "faces" section (mismatched element count?)',
			line_number=faces_line
		)

	faces, face_lines = [], []
	owner_lines = {}
	for line_number in range(faces_line + 1, len(lines) + 1):
		text = lines[line_number - 1].split()
		if not text:
			continue
		face = _parse_face(text, E, line_number)
		owners = [(face.left_elem, face.left_side)]
		if not face.is_boundary:
			owners.append((face.right_elem, face.right_side))
		for owner in owners:
			if owner in owner_lines:
				raise MeshParseError(
					f'element {owner[0]} side {owner[1]} already owned by the '
					f'face on line {owner_lines[owner]}', line_number=line_number
				)
			owner_lines[owner] = line_number
		faces.append(face)
		face_lines.append(line_number)

	for e in range(E):
		for side in range(4):
			if (e, side) not in owner_lines:
				raise MeshParseError(
					f'element {e} side {side} has no face record',
					line_number=len(lines)
				)

	mesh = Mesh(coords, faces, refops, validate=False)
	bad = nonconforming_faces(mesh)
	if bad:
		raise MeshParseError(
			f'non-conforming face between elements {faces[bad[0]].left_elem} '
			f'and {faces[bad[0]].right_elem}',
			line_number=face_lines[bad[0]]
		)
	return mesh


def _parse_face(
	text: list[str],
	num_elements: int,
	line_number: int
) -> Face:

	def parse_index(value: str, upper: int, name: str) -> int:
		try:
			index = int(value)
		except ValueError:
			raise MeshParseError(
				f'invalid {name} {value!r}', line_number=line_number
			) from None
		if not 0 <= index < upper:
			raise MeshParseError(
				f'{name} {index} out of range [0, {upper})', line_number=line_number
			)
		return index

	if len(text) == 4 and text[2] == BOUNDARY:
		if not TAG_PATTERN.match(text[3]):
			raise MeshParseError(f'bad boundary tag {text[3]!r}', line_number=line_number)
		return Face(
			parse_index(text[0], num_elements, 'element'),
			parse_index(text[1], 4, 'side'),
			tag=text[3]
		)

	if len(text) != 5:
		raise MeshParseError(
			f'expected "left_elem left_side right_elem right_side reversed" '
			f'or "left_elem left_side {BOUNDARY} tag", got {" ".join(text)!r}',
			line_number=line_number
		)
	if text[4] not in ('0', '1'):
		raise MeshParseError(
			f'reversed flag must be 0 or 1, got {text[4]!r}', line_number=line_number
		)
	return Face(
		parse_index(text[0], num_elements, 'element'),
		parse_index(text[1], 4, 'side'),
		parse_index(text[2], num_elements, 'element'),
		parse_index(text[3], 4, 'side'),
		text[4] == '1'
	)
