"""This module includes all custom decorators used across retailflow."""


import functools


__all__ = [
    'operation_context'
]


def operation_context(module, operation):
    """Attaches the module and operation name to errors leaving a function.

    Only retailflow errors are annotated; the innermost context wins, so an
    error raised deep inside `econ.ols` keeps pointing at `ols` even when it
    propagates through `studies.prediction`.

    Parameters
    ----------
    module: str
        Name of the module the operation belongs to, e.g. 'classify'.

    operation: str
        Name of the operation, e.g. 'classify_qmp'.

    Returns
    -------
    decorator: callable

    """
    from .exceptions import RetailflowError

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except RetailflowError as e:
                if e.module is None:
                    e.module = module
                    e.operation = operation
                raise
        wrapper.module = module
        wrapper.operation = operation
        return wrapper

    return decorator
