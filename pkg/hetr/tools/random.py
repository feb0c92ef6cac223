"""Counter-based random streams.

Every random entry point takes an integer seed. Streams are addressed by a path
below that seed (region, window, chain or trajectory index, layer) so any stream
can be recreated on its own, and serial and parallel runs draw the same numbers.
"""
import zlib
import numpy as np

# layers of a single trajectory
R_LAYER = 0
POISSON_LAYER = 1


def _path_key(item):
    if isinstance(item, (int, np.integer)):
        if item < 0:
            raise ValueError("stream path integers must be non-negative")
        return int(item)
    return zlib.crc32(str(item).encode('utf-8'))


def seed_sequence(seed: int, *path):
    """SeedSequence for the stream at `path` below `seed`."""
    if seed is None:
        raise ValueError("a random seed is required")
    return np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=tuple(_path_key(x) for x in path),
    )


def stream(seed: int, *path):
    """Philox generator (counter-based) for the stream at `path` below `seed`."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *path)))


def child_seed(seed: int, *path):
    """Derive a plain integer seed, for handing a sub-tree to another entry point."""
    return int(seed_sequence(seed, *path).generate_state(1, dtype=np.uint64)[0] >> 1)
