"""Deterministic random streams.

All randomness in the package flows through a 64-bit counter-based
generator (Philox) so that a given integer seed reproduces the exact same
values on every platform. Gaussian variates are produced by an explicit
Box-Muller transform over the generator's uniforms rather than a
platform-tuned sampler.
"""

from __future__ import annotations

import math

import numpy as np


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator for the given seed (int or SeedSequence)."""
    return np.random.Generator(np.random.Philox(seed))


def gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal samples via Box-Muller.

    Consumes 2*ceil(n/2) uniforms for n outputs; the stream is therefore a
    pure function of the generator state and the requested count.
    """
    if np.isscalar(shape):
        shape = (int(shape),)
    n = int(np.prod(shape)) if len(shape) else 1
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps log() finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * math.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n].reshape(shape)


def derive_seed(base: int, *parts: int) -> int:
    """Stable sub-seed for a labelled stream.

    Experiment drivers use this to give every (cell, replicate, purpose)
    combination its own independent, reproducible stream.
    """
    seq = np.random.SeedSequence([int(base), *(int(p) for p in parts)])
    return int(seq.generate_state(1, np.uint64)[0])
