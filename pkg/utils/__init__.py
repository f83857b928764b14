from .helpers import (
	get_num_threads, limit_threads, format_duration, show_exception,
	clear_stdout
)

from .errors import (
	SolverError, ConfigurationError, GeometryError, MeshParseError,
	AdmissibilityError
)

from .config_utils import (
	MeshSpec, RunConfig, parse_mesh_spec, read_config_file, make_config,
	add_run_arguments, config_from_arguments
)

from .io_utils import (
	read_csv, clip_mask, write_snapshot, write_indicator, write_time_series,
	write_table, write_summary
)
