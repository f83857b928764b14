'''
Contains the run configuration, config file parsing and mesh spec parsing.
'''

import dataclasses
from argparse import ArgumentParser, Namespace
from dataclasses import dataclass
from typing import Any, NamedTuple

from configs import (
	CASES, DEFAULT_MESHES, DEFAULT_T_END, DEGREE, MIN_DEGREE, MAX_DEGREE,
	OE_SCALE, INDICATOR_THRESHOLD, OE_MODE, OE_MODES, FLUX, FLUX_CHOICES,
	OUTPUT_DIR, SNAPSHOT_EVERY, SEED, FREESTREAM_MACH, FREESTREAM_ANGLE,
	VORTEX_ALPHA
)
from utils.errors import ConfigurationError

MESH_KINDS = ('cartesian', 'sinusoidal', 'file')



class MeshSpec(NamedTuple):
	'''
	Parsed mesh description. `ny` is None when the grid follows the aspect
	ratio of the case domain.
	'''
	kind: str
	nx: int | None = None
	ny: int | None = None
	alpha: float | None = None
	path: str | None = None

	def __str__(self) -> str:
		match self.kind:
			case 'file':
				return f'file:{self.path}'
			case 'sinusoidal':
				return f'sinusoidal:{self.nx}:{self.alpha}'
			case _:
				size = self.nx if self.ny is None else f'{self.nx}x{self.ny}'
				return f'cartesian:{size}'



def _parse_count(
	text: str,
	spec: str
) -> int:

	try:
		count = int(text)
	except ValueError:
		raise ConfigurationError(f'mesh: bad element count {text!r} in {spec!r}')
	if count < 1:
		raise ConfigurationError(f'mesh: element count must be positive in {spec!r}')
	return count


def parse_mesh_spec(spec: str) -> MeshSpec:
	'''
	Parses `cartesian:M`, `cartesian:NXxNY`, `sinusoidal:M[:alpha]` or
	`file:path`.
	'''
	kind, _, rest = spec.strip().partition(':')
	kind = kind.lower()
	if kind not in MESH_KINDS or not rest:
		raise ConfigurationError(
			f'mesh: expected cartesian:M, sinusoidal:M[:alpha] or file:path, '
			f'got {spec!r}'
		)

	match kind:

		case 'file':
			return MeshSpec('file', path=rest)

		case 'sinusoidal':
			parts = rest.split(':')
			if len(parts) > 2:
				raise ConfigurationError(f'mesh: too many fields in {spec!r}')
			M = _parse_count(parts[0], spec)
			alpha = VORTEX_ALPHA
			if len(parts) == 2:
				try:
					alpha = float(parts[1])
				except ValueError:
					raise ConfigurationError(f'mesh: bad alpha {parts[1]!r}')
			return MeshSpec('sinusoidal', nx=M, alpha=alpha)

		case _:
			nx, _, ny = rest.lower().partition('x')
			return MeshSpec(
				'cartesian', nx=_parse_count(nx, spec),
				ny=_parse_count(ny, spec) if ny else None
			)



@dataclass(frozen=True)
class RunConfig:
	'''
	Validated configuration of one run. `mesh` and `t_end` default to the
	catalog values of the case.
	'''
	case: str
	order: int = DEGREE
	mesh: str | None = None
	t_end: float | None = None
	cfl: float | None = None
	oe_scale: float = OE_SCALE
	indicator_threshold: float = INDICATOR_THRESHOLD
	flux: str = FLUX
	oe_mode: str = OE_MODE
	out: str = OUTPUT_DIR
	snapshot_every: int = SNAPSHOT_EVERY
	seed: int | None = SEED
	mach: float = FREESTREAM_MACH
	angle: float = FREESTREAM_ANGLE

	def __post_init__(self) -> None:
		if self.case not in CASES:
			raise ConfigurationError(
				f'case: expected one of {CASES}, got {self.case!r}'
			)
		if self.mesh is None:
			if self.case not in DEFAULT_MESHES:
				raise ConfigurationError(
					f'mesh: case {self.case!r} needs --mesh file:<path>'
				)
			object.__setattr__(self, 'mesh', DEFAULT_MESHES[self.case])
		if self.t_end is None:
			object.__setattr__(self, 't_end', DEFAULT_T_END[self.case])
		parse_mesh_spec(self.mesh)

		if not (isinstance(self.order, int) and MIN_DEGREE <= self.order <= MAX_DEGREE):
			raise ConfigurationError(
				f'order: must be an integer in [{MIN_DEGREE}, {MAX_DEGREE}], '
				f'got {self.order!r}'
			)
		if not self.t_end > 0:
			raise ConfigurationError(f't_end: must be positive, got {self.t_end}')
		if self.cfl is not None and not self.cfl > 0:
			raise ConfigurationError(f'cfl: must be positive, got {self.cfl}')
		if not 0 < self.oe_scale <= 1:
			raise ConfigurationError(
				f'oe_scale: must lie in (0, 1], got {self.oe_scale}'
			)
		if not self.indicator_threshold >= 0:
			raise ConfigurationError(
				f'indicator_threshold: must be non-negative, '
				f'got {self.indicator_threshold}'
			)
		if self.flux not in FLUX_CHOICES:
			raise ConfigurationError(
				f'flux: expected one of {FLUX_CHOICES}, got {self.flux!r}'
			)
		if self.oe_mode not in OE_MODES:
			raise ConfigurationError(
				f'oe_mode: expected one of {OE_MODES}, got {self.oe_mode!r}'
			)
		if self.snapshot_every < 0:
			raise ConfigurationError(
				f'snapshot_every: must be non-negative, got {self.snapshot_every}'
			)
		if not self.mach >= 0:
			raise ConfigurationError(f'mach: must be non-negative, got {self.mach}')

	@property
	def mesh_spec(self) -> MeshSpec:
		return parse_mesh_spec(self.mesh)

	def as_dict(self) -> dict[str, Any]:
		return dataclasses.asdict(self)

	def replace(self, **changes) -> 'RunConfig':
		return dataclasses.replace(self, **changes)



# Type of every RunConfig field, for config file values
FIELD_TYPES = {
	'case': str,
	'order': int,
	'mesh': str,
	't_end': float,
	'cfl': float,
	'oe_scale': float,
	'indicator_threshold': float,
	'flux': str,
	'oe_mode': str,
	'out': str,
	'snapshot_every': int,
	'seed': int,
	'mach': float,
	'angle': float
}


def normalize_key(key: str) -> str:
	return key.strip().lower().replace('-', '_')


def read_config_file(path: str) -> dict[str, Any]:
	'''
	Reads a flat `key = value` file. Blank lines and text after `#` are
	ignored; keys are long flag names with '-' or '_'.
	'''
	values = {}
	with open(path) as file:
		for line_number, line in enumerate(file, start=1):
			line = line.split('#', 1)[0].strip()
			if not line:
				continue
			key, sep, value = line.partition('=')
			key = normalize_key(key)
			if not sep or not key:
				raise ConfigurationError(
					f'{path}, line {line_number}: expected key = value'
				)
			if key not in FIELD_TYPES:
				raise ConfigurationError(
					f'{path}, line {line_number}: unknown key {key!r}'
				)
			values[key] = convert_value(key, value.strip())
	return values


def convert_value(
	key: str,
	value: Any
) -> Any:

	if value is None or not isinstance(value, str):
		return value
	if value.lower() == 'none':
		return None
	try:
		return FIELD_TYPES[key](value)
	except ValueError:
		raise ConfigurationError(f'{key}: cannot parse {value!r}')


def make_config(
	flags: dict[str, Any],
	config_path: str | None = None
) -> RunConfig:
	'''
	Merges command line flags over config file values over defaults.

	Flags left at None are treated as unset.
	'''
	values = read_config_file(config_path) if config_path else {}
	for key, value in flags.items():
		key = normalize_key(key)
		if key in FIELD_TYPES and value is not None:
			values[key] = convert_value(key, value)

	if 'case' not in values:
		raise ConfigurationError('case: no case given')
	return RunConfig(**values)


def add_run_arguments(parser: ArgumentParser) -> None:
	'''
	Flags shared by the solver and convergence scripts. Defaults are left
	unset so that config file values are not overridden.
	'''
	parser.add_argument(
		'--case', action='store', type=str, choices=CASES,
		help='test case to run'
	)
	parser.add_argument(
		'--order', action='store', type=int,
		help='polynomial degree N of the elements'
	)
	parser.add_argument(
		'--t-end', action='store', type=float,
		help='final time of the run'
	)
	parser.add_argument(
		'--cfl', action='store', type=float,
		help='CFL constant K, defaults to 0.5 / (2N + 1)'
	)
	parser.add_argument(
		'--oe-scale', action='store', type=float,
		help='scale factor s of the oscillation-eliminating filter'
	)
	parser.add_argument(
		'--indicator-threshold', action='store', type=float,
		help='shock indicator threshold C'
	)
	parser.add_argument(
		'--flux', action='store', type=str, choices=FLUX_CHOICES,
		help='interface flux'
	)
	parser.add_argument(
		'--oe-mode', action='store', type=str, choices=OE_MODES,
		help='damping formula of the filter, off to disable it'
	)
	parser.add_argument(
		'--out', action='store', type=str,
		help='output directory'
	)
	parser.add_argument(
		'--seed', action='store', type=int,
		help='use a manual seed for output reproducibility'
	)
	parser.add_argument(
		'--mach', action='store', type=float,
		help='freestream Mach number of the freestream and custom-mesh cases'
	)
	parser.add_argument(
		'--angle', action='store', type=float,
		help='freestream angle of attack in degrees'
	)
	parser.add_argument(
		'--config', action='store', type=str,
		help='flat key = value config file, overridden by flags'
	)


def config_from_arguments(args: Namespace) -> RunConfig:
	'''
	Builds the run configuration from parsed flags and their `--config` file.
	'''
	flags = {
		key: value for key, value in vars(args).items() if key in FIELD_TYPES
	}
	return make_config(flags, args.config)
