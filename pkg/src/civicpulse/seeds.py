"""Named, independent random substreams derived from one master seed.

Every stochastic step (train/test split, oversampling, weight init, batch
shuffling, dropout) pulls its own generator via ``substream``.  Streams are
independent of each other and of the order in which they are created, so
adding a consumer never perturbs the others.
"""

from __future__ import annotations

import hashlib

import numpy as np

SUBSTREAMS = ("split", "smote", "init", "batching", "dropout")


def _stable_hash(name: str) -> int:
    # Platform-independent (PYTHONHASHSEED does not apply to sha256).
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, name: str) -> np.random.Generator:
    """Return a Generator for the named stream under the master seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, _stable_hash(name)]))
