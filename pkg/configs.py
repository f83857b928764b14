'''
Contains default constants and configurations for the project.

Values here are the lowest-precedence layer of a run configuration:
command line flags override a config file, which overrides these defaults.
'''

inf = float('inf')

# Ratio of specific heats of the ideal gas
GAMMA = 1.4

# Default polynomial degree and the admissible range for runs
DEGREE = 3
MIN_DEGREE = 1
MAX_DEGREE = 8

# Largest degree the reference operators can be built for
MAX_OPERATOR_DEGREE = 16

# LGL Newton iteration controls
LGL_TOLERANCE = 1e-15
LGL_MAX_ITERATIONS = 100

# CFL constant is K = CFL_NUMERATOR / (2N + 1) unless overridden
CFL_NUMERATOR = .5

# Oscillation-eliminating filter defaults
OE_SCALE = .2
INDICATOR_THRESHOLD = .02
OE_MODE = 'auto'
OE_MODES = ('auto', 'cartesian', 'curvilinear', 'off')

# Relative tolerance of the "U equals its cell average" test in the filter
FLAT_TOLERANCE = 1e-12

# Positivity floors of the scaling limiter
DENSITY_FLOOR = 1e-13
PRESSURE_FLOOR = 1e-13
LIMITER_BISECTIONS = 50

# Interface flux used by the surface terms
FLUX = 'llf'
FLUX_CHOICES = ('llf', 'ec')

# Number of elements processed per vectorized volume kernel call
ELEMENT_CHUNK = 2048

# Output configurations
OUTPUT_DIR = './runs'
SNAPSHOT_EVERY = 0

# Test cases available to the command line
CASES = ('vortex', 'riemann12', 'riemann13', 'dmr', 'freestream', 'custom-mesh')

# Mesh used when a run gives none ('custom-mesh' always needs a file)
DEFAULT_MESHES = {
	'vortex': 'sinusoidal:20:1.5',
	'riemann12': 'cartesian:40',
	'riemann13': 'cartesian:40',
	'dmr': 'cartesian:30',
	'freestream': 'sinusoidal:8:1'
}

# Final times used when a run gives none
DEFAULT_T_END = {
	'vortex': 2.,
	'riemann12': .2,
	'riemann13': .3,
	'dmr': .2,
	'freestream': 1.,
	'custom-mesh': 1.
}

# Isentropic vortex strength and background velocity
VORTEX_STRENGTH = 5.
VORTEX_VELOCITY = (1., 1.)
VORTEX_ALPHA = 1.5

# Freestream state for imported meshes
FREESTREAM_MACH = .8
FREESTREAM_ANGLE = 5.

# Seed for reproducibility, set to None for random seed
SEED = None

# Float precision on the console
FLT_PREC = 4

# Number of spaces to clear stdout
SPACES = 120

# Environment variable capping native worker threads
THREADS_ENV_VAR = 'ESDG_THREADS'
