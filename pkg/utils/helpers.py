'''
Contains helper functions.
'''

import os

from threadpoolctl import threadpool_limits



def get_num_threads(env_var: str = 'ESDG_THREADS') -> int | None:
	'''
	Returns the worker cap from `env_var`, or None if it is unset.
	'''
	value = os.environ.get(env_var, '').strip()
	if not value:
		return None
	num_threads = int(value)
	return max(num_threads, 1)


def limit_threads(num_threads: int | None):
	'''
	Context manager capping native (BLAS/OpenMP) worker threads.
	'''
	return threadpool_limits(limits=num_threads)


def format_duration(seconds: float) -> str:
	seconds = int(seconds)
	minutes = seconds // 60
	hours = minutes // 60
	days = hours // 24

	duration = f'{seconds % 60}s'
	if minutes:
		duration = f'{minutes % 60}m {duration}'
	if hours:
		duration = f'{hours % 24}h {duration}'
	if days:
		duration = f'{days}d {duration}'
	return duration


def show_exception(exception: Exception) -> None:
	exc_class = exception.__class__.__name__
	exc_msg = str(exception)
	print(f'\nEncountered exception of type {exc_class}: {exc_msg}\n')


def clear_stdout(spaces: int = 100) -> None:
	print(f'\r{" " * spaces}', end='\r')
