"""Job counts for parallel chains, trajectory blocks and intervention cells."""
import os


def _affinity_cores():
    """Cores this process may run on, -1 if unknown."""
    try:
        import psutil

        return len(psutil.Process().cpu_affinity())
    except Exception:
        pass
    try:
        return len(os.sched_getaffinity(0))
    except Exception:
        return -1


def _physical_cores(logical: int):
    try:
        import psutil

        return psutil.cpu_count(logical=False) or -1
    except Exception:
        # assume two hardware threads per core
        return int(logical / 2)


def cpu_count(modifier: float = 1):
    """Smallest of logical, allowed and physical core counts, times modifier, at least 1.

    psutil gives better answers when installed.

    Args:
        modifier (float): multiple CPU count by this value
    """
    logical = os.cpu_count() or -1
    counts = [c for c in (logical, _affinity_cores(), _physical_cores(logical)) if c > 0]
    cores = min(counts) if counts else 1
    if modifier != 1:
        cores = int(modifier * cores)
    return max(cores, 1)


def set_n_jobs(n_jobs, verbose=0):
    """Resolve 'auto', None and negative n_jobs to a positive int."""
    if n_jobs == 'auto':
        n_jobs = cpu_count(modifier=0.75)
        if verbose > 0:
            print(f"Using {n_jobs} cpus for n_jobs.")
    elif n_jobs is None:
        n_jobs = 1
    else:
        try:
            n_jobs = int(n_jobs)
        except (TypeError, ValueError):
            raise ValueError(f"n_jobs should be 'auto' or an integer, got {n_jobs}")
        if n_jobs < 0:
            n_jobs = max(cpu_count() + 1 + n_jobs, 1)
    return n_jobs if n_jobs > 0 else 1
