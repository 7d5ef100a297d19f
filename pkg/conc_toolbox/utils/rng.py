"""Counter-based random substreams.

A stream is identified by a 64-bit seed and a 64-bit stream id which together
form the 128-bit Philox key. Independent blocks of draws are obtained by moving
the 256-bit counter to ``block << 128``, so block ``b`` of a stream yields the
same numbers no matter which worker asks for it or in which order.
"""
from dataclasses import dataclass

import numpy as np

from conc_toolbox.utils.errors import require

_UINT64 = 2 ** 64


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        require(0 <= int(self.seed) < _UINT64, f"seed {self.seed} is not a 64-bit integer")
        require(
            0 <= int(self.stream_id) < _UINT64,
            f"stream_id {self.stream_id} is not a 64-bit integer",
        )

    @property
    def key(self):
        return (int(self.stream_id) << 64) | int(self.seed)

    def generator(self, block=0):
        """numpy Generator positioned at the start of ``block``."""
        require(0 <= int(block) < _UINT64, f"block {block} out of range")
        bit_generator = np.random.Philox(counter=int(block) << 128, key=self.key)
        return np.random.Generator(bit_generator)

    def substream(self, stream_id):
        return RngStream(self.seed, stream_id)

    def to_dict(self):
        return {"seed": int(self.seed), "stream_id": int(self.stream_id)}


def as_generator(stream, block=0):
    """Accept an RngStream, a Generator or a bare integer seed."""
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, RngStream):
        return stream.generator(block)
    return RngStream(int(stream)).generator(block)
