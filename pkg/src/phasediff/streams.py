"""Counter-based random-number substreams for reproducible ensembles.

Every parallel unit of work (an SDE trajectory, a sampling chunk) owns a
Philox stream keyed by (master_seed, index). Results therefore depend only
on the seed and the index, never on scheduling, chunking, or worker count.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Generator for unit-of-work ``index`` under ``master_seed``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def normal_block(master_seed: int, first_index: int, count: int,
                 n_per_stream: int) -> np.ndarray:
    """Standard-normal block of shape (count, n_per_stream).

    Row ``i`` is drawn entirely from substream ``first_index + i``, so the
    block decomposition of an ensemble cannot change its content.
    """
    out = np.empty((count, n_per_stream))
    for i in range(count):
        out[i] = substream(master_seed, first_index + i).standard_normal(n_per_stream)
    return out
