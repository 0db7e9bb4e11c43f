"""Shared Monte Carlo plumbing: keyed substreams and worker-split trial maps.

Per-trial generators depend only on the seed and the trial key, so any
partition of the trial range across workers yields bit-identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(tuple(int(k) for k in (seed, *key)))


def map_trials(worker, trials: int, workers: int) -> list:
    if workers <= 1:
        return [worker(b) for b in range(trials)]
    chunks = np.array_split(np.arange(trials), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda chunk: [worker(int(b)) for b in chunk], chunks)
        return [item for part in parts for item in part]
