"""Counter-based random substreams.

Every stochastic draw in a run comes from a generator keyed by the run
seed plus a structural key (scan, radar, target, ...).  This makes noise
draws independent of the order in which agents act, so swapping one
selector for another never perturbs the measurement noise seen at an
unchanged (scan, radar, target) coordinate -- a requirement for paired
cross-algorithm comparisons.
"""

from __future__ import annotations

import numpy as np

# Domain tags keep substream keys from colliding across purposes.
TAG_TRUTH = 1       # process noise of the ground-truth targets
TAG_MEAS = 2        # measurement noise, keyed (seed, r, TAG, k, i, j, beam)
TAG_INIT = 3        # shared initial track guesses, keyed (seed, r, TAG, j)
TAG_SELECTOR = 4    # per-radar selector randomness, keyed (seed, r, TAG, i)
TAG_BMAT = 5        # range-accuracy coefficient sampling, keyed (seed, TAG)


def substream(*key: int) -> np.random.Generator:
    """Independent generator for an integer key tuple."""
    return np.random.default_rng(np.random.SeedSequence(list(key)))
