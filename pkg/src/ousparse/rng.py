"""Seedable, splittable random state.

Every ``RngState`` carries four independent Philox4x64 streams (numpy's
counter-based bit generator) derived from one ``SeedSequence``:

* ``gauss``  - Brownian increments and Gaussian draws,
* ``counts`` - Poisson jump counts,
* ``sizes``  - jump magnitudes (and signs),
* ``aux``    - everything else (drift generation, position sampling).

Keeping the streams separate makes simulation results independent of how the
draws are chunked: drawing N values in one call or in several calls from the
same stream yields the same numbers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAMS = ("gauss", "counts", "sizes", "aux")


def _gen(ss: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class RngState:
    seed_seq: np.random.SeedSequence
    gauss: np.random.Generator
    counts: np.random.Generator
    sizes: np.random.Generator
    aux: np.random.Generator

    @classmethod
    def from_seed_sequence(cls, ss: np.random.SeedSequence) -> "RngState":
        children = ss.spawn(len(STREAMS))
        return cls(ss, *(_gen(c) for c in children))

    @classmethod
    def from_seed(cls, seed: int, *key: int) -> "RngState":
        """State for ``seed``; ``key`` selects an independent sub-stream."""
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
        return cls.from_seed_sequence(ss)

    def spawn(self, n: int) -> list["RngState"]:
        """``n`` independent child states (e.g. one per replicate)."""
        return [RngState.from_seed_sequence(c) for c in self.seed_seq.spawn(n)]


def as_rng_state(rng) -> RngState:
    if isinstance(rng, RngState):
        return rng
    if rng is None:
        return RngState.from_seed_sequence(np.random.SeedSequence())
    if isinstance(rng, (int, np.integer)):
        return RngState.from_seed(int(rng))
    raise TypeError(f"expected RngState or int seed, got {type(rng).__name__}")
