import numba

# Prefer OpenMP; skip the TBB probe, which warns on older TBB installs.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def set_threads(n: int | None) -> int:
    """Set numba's worker count, clamped to what the process was started with."""
    limit = numba.config.NUMBA_NUM_THREADS
    n = limit if not n else max(1, min(int(n), limit))
    numba.set_num_threads(n)
    return n
