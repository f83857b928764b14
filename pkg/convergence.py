'''
Script to measure L2 convergence orders of a case with an exact solution.

DO NOT IMPORT THIS SCRIPT DIRECTLY. IT IS INTENDED TO BE RUN AS A SCRIPT.
'''

from argparse import ArgumentParser, Namespace

from configs import FLT_PREC, THREADS_ENV_VAR
from runner import (
	convergence_study, COMPONENTS, EXIT_SUCCESS, EXIT_CONFIG_ERROR,
	EXIT_ADMISSIBILITY_ERROR
)
from utils import (
	ConfigurationError, GeometryError, AdmissibilityError, add_run_arguments,
	config_from_arguments, get_num_threads, limit_threads, show_exception
)



def main() -> int:

	args = get_arguments()

	try:
		config = config_from_arguments(args)
		with limit_threads(get_num_threads(THREADS_ENV_VAR)):
			rows = convergence_study(config, args.meshes)
	except AdmissibilityError as e:
		show_exception(e)
		return EXIT_ADMISSIBILITY_ERROR
	except (ConfigurationError, GeometryError, OSError) as e:
		show_exception(e)
		return EXIT_CONFIG_ERROR

	print('\nh', *(f'order_{name}' for name in COMPONENTS), sep='\t')
	for row in rows:
		orders = [row[f'order_{name}'] for name in COMPONENTS]
		print(
			round(row['h'], FLT_PREC),
			*('' if order is None else round(order, 2) for order in orders),
			sep='\t'
		)
	print(f'Table written to {config.out}/convergence.csv')
	return EXIT_SUCCESS



def get_arguments() -> Namespace:
	parser = ArgumentParser(description='Convergence study')

	# Command line arguments
	add_run_arguments(parser)
	parser.add_argument(
		'--meshes', action='store', type=str, nargs='+', required=True,
		help='mesh specs from coarse to fine, e.g. sinusoidal:10 sinusoidal:20'
	)

	args = parser.parse_args()
	return args



if __name__ == '__main__':
	exit(main())
