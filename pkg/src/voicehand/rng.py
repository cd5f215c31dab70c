"""Seeded random substreams.

All randomness in the package flows from one root seed through named
substreams, so components can be reseeded and tested in isolation and a
training run is fully determined by (seed, platform).
"""

import zlib

import numpy as np


def substream(seed, *path):
    """Return a Generator for the substream identified by `path` under `seed`.

    Path elements may be strings (hashed stably) or integers, e.g.
    substream(17, "augment", epoch, example_index).
    """
    keys = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence([int(seed), *keys]))
