"""Named, reproducible random substreams.

Every stochastic step in the pipeline draws from a generator derived from a
single master seed plus a component name, so identical seeds give identical
runs regardless of which components execute or in what order.

The derivation is fixed: child_seed = first 8 bytes (big endian) of
SHA-256("<seed>:<name>/<name>/..."). Changing it would silently change every
seeded artifact, so treat it as part of the file-format surface.
"""

import hashlib

import numpy as np


def substream_seed(seed: int, *names: object) -> int:
    """Derive the integer seed for the substream named by ``names``."""
    tag = "/".join(str(n) for n in names)
    digest = hashlib.sha256(f"{seed}:{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, *names: object) -> np.random.Generator:
    """A fresh generator for the substream named by ``names``."""
    return np.random.default_rng(substream_seed(seed, *names))
