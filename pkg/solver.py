'''
Script to run a test case of the entropy stable solver.

DO NOT IMPORT THIS SCRIPT DIRECTLY. IT IS INTENDED TO BE RUN AS A SCRIPT.
'''

from argparse import ArgumentParser, Namespace

from runner import run, EXIT_CONFIG_ERROR
from utils import (
	ConfigurationError, add_run_arguments, config_from_arguments,
	show_exception
)



def main() -> int:

	# Get command line arguments
	# See function get_arguments for descriptions
	args = get_arguments()

	try:
		config = config_from_arguments(args)
	except (ConfigurationError, OSError) as e:
		show_exception(e)
		return EXIT_CONFIG_ERROR

	print(f'Running case {config.case} with order {config.order} on {config.mesh}')
	return run(config)



def get_arguments() -> Namespace:
	parser = ArgumentParser(description='Entropy stable DG solver')

	# Command line arguments
	add_run_arguments(parser)
	parser.add_argument(
		'--mesh', action='store', type=str,
		help='cartesian:M, cartesian:NXxNY, sinusoidal:M[:alpha] or file:path'
	)
	parser.add_argument(
		'--snapshot-every', action='store', type=int,
		help='write field snapshots every this many steps (0 for final only)'
	)

	args = parser.parse_args()
	return args



if __name__ == '__main__':
	exit(main())
