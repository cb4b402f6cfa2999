import logging
import os

import numba

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = 'SOGPLACE_THREADS'


def resolve_thread_count(requested=None, config_value=None):
    """
    Determine how many worker threads to use.
    Order: explicit request, SOGPLACE_THREADS, the run.threads config key,
    then numba's default (all cores).
    """
    for source, value in (('argument', requested),
                          (THREADS_ENV_VAR, os.environ.get(THREADS_ENV_VAR)),
                          ('config', config_value)):
        if value in (None, ''):
            continue
        try:
            count = int(value)
        except (TypeError, ValueError):
            logger.warning("Ignoring non-integer thread count %r from %s", value, source)
            continue
        if count >= 1:
            return min(count, numba.config.NUMBA_NUM_THREADS)
        logger.warning("Ignoring thread count %d from %s", count, source)
    return numba.config.NUMBA_NUM_THREADS


def apply_thread_count(count):
    """Cap numba's parallel kernels at `count` threads"""
    numba.set_num_threads(count)
    logger.debug("Using %d worker threads", count)
    return count
