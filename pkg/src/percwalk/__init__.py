"""Union of random walk range and percolation clusters.

Modules
-------
graph_core      lazy infinite graphs, vertex keys, schedules
percolation     deterministic bond percolation and cluster exploration
walk            simple random walk traces, boundary, hitting times
union_process   U_n, windows, sausages, averaged and intersected unions
capacity        capacity by Dirichlet solves and by escape walks
estimators      batch statistics and the c_p and scaling estimators
oracle          exact rational expectations for tiny instances
experiments     config-driven experiment runner behind the CLI
"""
import os

import numba

__version__ = "0.1.0"

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "omp"


def set_threads(count: int | None = None) -> int:
    """Cap the kernel worker pool (default: ``PERCWALK_THREADS`` if set)."""
    if count is None:
        env = os.environ.get("PERCWALK_THREADS")
        if not env:
            return numba.get_num_threads()
        count = int(env)
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    return count
