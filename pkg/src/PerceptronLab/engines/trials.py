"""
Per-trial random streams and the process pool that runs trials.

Streams are numpy Generators over Philox, a counter-based bit generator, so a
trial's draws depend only on its seed. Trial seeds come from
SeedSequence([master_seed, trial_index]) and never from worker identity; results
are re-ordered by trial index, so output does not depend on the worker count.
"""
import multiprocessing
from concurrent.futures import ProcessPoolExecutor, as_completed

import numpy as np

from src.PerceptronLab.utils.errors import DomainError
from src.PerceptronLab.utils.logger import get_logger

log = get_logger("Trials")

SEED_MASK = (1 << 64) - 1


def _check_seed(seed):
    if int(seed) != seed or not (0 <= seed <= SEED_MASK):
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def make_generator(seed):
    return np.random.Generator(np.random.Philox(_check_seed(seed)))


def derive_seed(master_seed, trial_index):
    """64-bit seed of trial `trial_index` under `master_seed`."""
    master_seed = _check_seed(master_seed)
    if trial_index < 0:
        raise DomainError(f"trial_index must be >= 0, got {trial_index}")
    state = np.random.SeedSequence([master_seed, int(trial_index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def derive_seeds(master_seed, trials):
    return [derive_seed(master_seed, i) for i in range(trials)]


def run_trials(worker, tasks, workers=1, label="trials"):
    """
    Run `worker(task)` for every task and return the results in task order.

    Parameters:
        worker (callable): module-level function, picklable for the process pool.
        tasks (list): one argument per trial.
        workers (int): process count; 1 runs inline in this process.
        label (str): name used in progress lines.
    """
    tasks = list(tasks)
    if not tasks:
        return []
    workers = max(1, min(int(workers), len(tasks)))
    if workers == 1:
        return [worker(task) for task in tasks]

    log.info(f"{label}: {len(tasks)} tasks on {workers} workers")
    results = [None] * len(tasks)
    executor = ProcessPoolExecutor(max_workers=workers)
    try:
        future_to_index = {executor.submit(worker, task): i for i, task in enumerate(tasks)}
        done = 0
        for fut in as_completed(future_to_index):
            results[future_to_index[fut]] = fut.result()
            done += 1
            if done % max(1, len(tasks) // 10) == 0:
                log.debug(f"{label}: {done}/{len(tasks)} done")
    except KeyboardInterrupt:
        log.warn("KeyboardInterrupt! shutting down workers ...")
        executor.shutdown(wait=False, cancel_futures=True)
        for p in multiprocessing.active_children():
            try:
                p.terminate()
            except OSError:
                pass
        raise
    except BaseException:
        executor.shutdown(wait=False, cancel_futures=True)
        raise
    else:
        executor.shutdown()
    return results
