"""
==========================
Methods - Sampling
==========================

Seedable random streams, uniform (SMC) sampling and Latin Hypercube Sampling restricted to a stratum.

Streams are derived from `(master_seed, purpose, keys...)` through `numpy.random.SeedSequence`
spawn keys, so every (stage, stratum) pair owns an independent, reproducible PCG64 stream
regardless of the order in which strata are processed.

Features:
- `RngStream`: a reproducible generator plus the seed material that produced it.
- `derive_stream`: stream for one (stage, stratum) task.
- `baseline_stream` / `replication_seed`: streams and seeds for the benchmark harness.
- `uniform_sample`: i.i.d. uniform points in a box.
- `lhs_sample`: jittered Latin Hypercube design in a box.

Usage:
>>> from app.methods.sampling import derive_stream, lhs_sample
>>> from app.methods.stratification import HyperRectangle
>>> batch = lhs_sample(HyperRectangle.unit(2), 50, derive_stream(7, 1, 0))
>>> batch.points.shape
(50, 2)

*Author: Sudharshan TK*\n
*Created: 2025-09-04*
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from app.helpers.errors import SamplingError
from app.methods.stratification import HyperRectangle

# Leading spawn-key component separating the stream families
STAGE_STREAM = 0
BASELINE_STREAM = 1
REPLICATION_SEED = 2

UINT64_MAX = 2**64 - 1


class SampleDesign(str, Enum):
    LHS = "LHS"
    SMC = "SMC"


@dataclass
class RngStream:
    """A PCG64 generator together with the seed material that reproduces it."""

    master_seed: int
    key: tuple[int, ...]
    generator: np.random.Generator = field(repr=False)

    @classmethod
    def from_key(cls, master_seed: int, *key: int) -> RngStream:
        if not 0 <= int(master_seed) <= UINT64_MAX:
            raise SamplingError(f"seed must be a 64-bit unsigned integer, got {master_seed}")
        seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
        return cls(int(master_seed), tuple(int(k) for k in key), np.random.Generator(np.random.PCG64(seq)))

    def random(self, size) -> np.ndarray:
        return self.generator.random(size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)


@dataclass(frozen=True)
class SampleBatch:
    """n points inside one stratum, tagged with the design that produced them."""

    points: np.ndarray
    stratum_id: int
    design: SampleDesign

    @property
    def size(self) -> int:
        return self.points.shape[0]


def derive_stream(master_seed: int, stage: int, stratum_id: int) -> RngStream:
    """
    Stream owned by one (stage, stratum) task.

    Args:
        master_seed (int): 64-bit run seed.
        stage (int): Stage index ℓ.
        stratum_id (int): Stratum id.

    Returns:
        RngStream: Independent reproducible stream.
    """
    return RngStream.from_key(master_seed, STAGE_STREAM, stage, stratum_id)


def baseline_stream(master_seed: int, tag: int = 0) -> RngStream:
    """Stream for a baseline (plain LHS / SMC) estimate."""
    return RngStream.from_key(master_seed, BASELINE_STREAM, tag)


def replication_seed(master_seed: int, replication: int) -> int:
    """Derive the 64-bit master seed of one benchmark replication."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(REPLICATION_SEED, int(replication)))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _check_size(n: int):
    if int(n) < 1:
        raise SamplingError(f"sample size must be >= 1, got {n}")


def _place(rect: HyperRectangle, unit: np.ndarray) -> np.ndarray:
    lo = rect.lower_array
    hi = rect.upper_array
    points = lo + unit * (hi - lo)
    # keep the half-open upper bound exact under rounding
    inner = np.where(hi < 1.0, np.nextafter(hi, lo), hi)
    return np.clip(points, lo, inner)


def uniform_sample(rect: HyperRectangle, n: int, rng: RngStream, stratum_id: int = -1) -> SampleBatch:
    """
    Draw n i.i.d. uniform points in `rect`.

    Args:
        rect (HyperRectangle): The stratum.
        n (int): Number of points (>= 1).
        rng (RngStream): Stream to draw from.
        stratum_id (int, optional): Id recorded on the batch.

    Raises:
        SamplingError: If n < 1.

    Returns:
        SampleBatch: SMC batch.
    """
    _check_size(n)
    unit = rng.random((int(n), rect.dimension))
    return SampleBatch(_place(rect, unit), stratum_id, SampleDesign.SMC)


def lhs_sample(rect: HyperRectangle, n: int, rng: RngStream, stratum_id: int = -1) -> SampleBatch:
    """
    Draw a jittered Latin Hypercube design of n points in `rect`.

    Per dimension k an independent permutation π_k of {0..n-1} and independent jitters
    u_jk in [0,1) are drawn; point j gets coordinate lower_k + (π_k(j) + u_jk)/n · extent_k,
    so every 1D marginal has exactly one point in each of the n equal cells.

    Args:
        rect (HyperRectangle): The stratum.
        n (int): Number of points (>= 1).
        rng (RngStream): Stream to draw from.
        stratum_id (int, optional): Id recorded on the batch.

    Raises:
        SamplingError: If n < 1.

    Returns:
        SampleBatch: LHS batch.
    """
    _check_size(n)
    n = int(n)
    d = rect.dimension
    perms = np.column_stack([rng.permutation(n) for _ in range(d)])
    jitter = rng.random((n, d))
    return SampleBatch(_place(rect, (perms + jitter) / n), stratum_id, SampleDesign.LHS)


def lhs_cell_indices(batch: SampleBatch, rect: HyperRectangle) -> np.ndarray:
    """
    LHS cell index ⌊n (y_k - lower_k) / extent_k⌋ of every coordinate of a batch.

    Returns:
        np.ndarray: (n, d) integer array; each column is a permutation for an LHS batch.
    """
    n = batch.size
    rel = (batch.points - rect.lower_array) / rect.extent
    return np.minimum(np.floor(n * rel).astype(int), n - 1)
