from __future__ import annotations

import hashlib
from typing import Dict, Tuple

import numpy as np


class RngManager:
    """Deterministic PCG64 streams derived from one master seed.

    Each ``(stream_name, index)`` pair gets its own generator.  The seed of a
    stream is ``master_seed XOR sha256(stream_name)[:8] XOR index`` (64 bits),
    expanded by numpy's ``SeedSequence`` into the PCG64 state, so identical
    seeds give identical draws on every platform.
    """

    def __init__(self, master_seed: int) -> None:
        if master_seed < 0:
            raise ValueError("master_seed must be >= 0")
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
        self._streams: Dict[Tuple[str, int], np.random.Generator] = {}

    def stream_seed(self, stream_name: str, index: int = 0) -> int:
        # ``hash()`` is salted per interpreter, so derive the name hash by hand.
        digest = hashlib.sha256(stream_name.encode()).digest()
        name_hash = int.from_bytes(digest[:8], "little")
        return (self.master_seed ^ name_hash ^ index) & 0xFFFFFFFFFFFFFFFF

    def get_stream(self, stream_name: str, index: int = 0) -> np.random.Generator:
        """Return the generator for ``stream_name``/``index``, creating it once."""
        key = (stream_name, index)
        if key not in self._streams:
            seed = self.stream_seed(stream_name, index)
            self._streams[key] = np.random.Generator(np.random.PCG64(seed))
        return self._streams[key]
