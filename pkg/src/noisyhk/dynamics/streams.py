"""Seed derivation for replicate-owned random streams.

Replicate r of a run with master seed s draws from Philox generators seeded by
SeedSequence(s, spawn_key=(*mix, r, purpose)), purpose 0 for initial opinions
and 1 for noise. The noise value xi_i(t) is the transform of the
((t - 1) * n + i)-th double of the noise generator, so results do not depend
on block size and a shorter horizon is a prefix of a longer one.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict

from noisyhk.dynamics.noise import NoiseModel

INITIAL_PURPOSE = 0
NOISE_PURPOSE = 1
DEFAULT_BLOCK_STEPS = 4096


def derive_generator(
    master_seed: int, replicate: int, purpose: int, mix: tuple[int, ...] = ()
) -> np.random.Generator:
    """Build the Philox generator owned by (master_seed, mix, replicate, purpose)."""
    if master_seed < 0 or replicate < 0:
        raise ValueError(f"seed and replicate must be >= 0, got {master_seed}, {replicate}")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(*mix, replicate, purpose))
    return np.random.Generator(np.random.Philox(seq))


class ReplicateStreams(BaseModel):
    """The two generators one replicate consumes."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    master_seed: int
    replicate: int
    mix: tuple[int, ...] = ()
    initial: np.random.Generator
    noise: np.random.Generator


def replicate_streams(
    master_seed: int, replicate: int = 0, mix: tuple[int, ...] = ()
) -> ReplicateStreams:
    """Derive fresh initial-opinion and noise streams for one replicate.

    Args:
        master_seed: Master seed of the run
        replicate: Replicate index (0-based)
        mix: Extra spawn-key prefix, e.g. (ratio_index,) inside a sweep

    Returns:
        ReplicateStreams positioned at the start of both streams
    """
    return ReplicateStreams(
        master_seed=master_seed,
        replicate=replicate,
        mix=mix,
        initial=derive_generator(master_seed, replicate, INITIAL_PURPOSE, mix),
        noise=derive_generator(master_seed, replicate, NOISE_PURPOSE, mix),
    )


class NoiseBlocks:
    """Step-by-step noise vectors backed by block draws from one generator."""

    def __init__(
        self,
        model: NoiseModel,
        n: int,
        rng: np.random.Generator,
        block_steps: int = DEFAULT_BLOCK_STEPS,
    ) -> None:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if block_steps < 1:
            raise ValueError(f"block_steps must be >= 1, got {block_steps}")
        self.model = model
        self.n = n
        self.rng = rng
        self.block_steps = block_steps
        self._block = np.empty((0, n))
        self._cursor = 0

    def next(self) -> np.ndarray:
        """Return the noise vector of the next step."""
        if self._cursor >= self._block.shape[0]:
            self._block = self.model.transform(self.rng.random((self.block_steps, self.n)))
            self._cursor = 0
        row = self._block[self._cursor]
        self._cursor += 1
        return row
