import os

import numpy as np


def worker_count():
    """Worker cap from DUALMINK_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("DUALMINK_THREADS", "1")))
    except ValueError:
        return 1


def spawn_generators(seed, count):
    """Independent counter-based generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]
