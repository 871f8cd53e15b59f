# apps/lab/utils.py
"""
Utility functions for the verification lab
"""
import logging
import time
import zlib
from functools import wraps

import numpy as np

logger = logging.getLogger(__name__)


def performance_monitor(func_name=None):
    """Decorator to monitor function performance"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                duration = time.perf_counter() - start_time
                name = func_name or f"{func.__module__}.{func.__name__}"

                if duration > 1.0:
                    logger.warning(f"SLOW OPERATION: {name} took {duration:.2f}s")
                elif duration > 0.5:
                    logger.info(f"MODERATE: {name} took {duration:.2f}s")
                else:
                    logger.debug(f"FAST: {name} took {duration:.3f}s")
        return wrapper
    return decorator


def check_rng(seed, check_id):
    """Generator owned by one check; independent of scheduling order."""
    return np.random.default_rng([int(seed), zlib.crc32(check_id.encode('utf-8'))])


def parse_nodes(value):
    """'64,128' -> (64, 128)"""
    if isinstance(value, (list, tuple)):
        return tuple(int(item) for item in value)
    return tuple(int(item) for item in str(value).split(',') if item.strip())


def parse_filter(value):
    if not value:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return tuple(item.strip() for item in str(value).split(',') if item.strip())


def to_jsonable(value):
    """numpy scalars and arrays to plain Python for the report writer"""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if value != value or value in (float('inf'), float('-inf')):
            return str(value)
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    return value
