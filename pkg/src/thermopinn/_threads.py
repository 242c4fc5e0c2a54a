"""BLAS thread control.

Every matrix product in this package is small enough that multi-threaded
BLAS loses far more to hand-off overhead than it gains, so hot loops pin
the thread pools to one thread. This also keeps reductions bit-reproducible
regardless of the ambient thread configuration.
"""

from contextlib import contextmanager

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None


@contextmanager
def single_thread_blas():
    if threadpool_limits is None:
        yield
        return
    with threadpool_limits(limits=1):
        yield
