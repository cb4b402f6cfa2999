"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by a
seed plus a tuple of integers (iteration, candidate, frame id, ...). Streams
with different keys are independent, so work can be split across threads in
any order without changing results.
"""
import numpy as np


def keyed_rng(seed, *key):
    """Return the Generator for stream `key` of `seed`"""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
