"""Seeded Gaussian vectors, Haar unitaries and random isometries.

Every sampler takes either a :class:`SeededRng` or a ready
``numpy.random.Generator``. A ``SeededRng`` is just a name for a stream:
``(master_seed, stream_id)`` plus optional sub-stream keys are fed to a
``SeedSequence`` spawn key, so streams never depend on the order in which
they are consumed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import BipartiteDims, DimensionError, _check_dim

GENERATOR_ID = f"numpy-{np.__version__}/PCG64/SeedSequence"


@dataclass(frozen=True)
class SeededRng:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self, *substream: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, *substream))
        return np.random.Generator(np.random.PCG64(seq))

    def stream(self, stream_id: int) -> "SeededRng":
        return SeededRng(self.master_seed, stream_id)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected SeededRng or numpy Generator, got {type(rng).__name__}")


def gaussian_vector(rng, dim: int, size: int | None = None) -> np.ndarray:
    """Complex Gaussian vector with E|z_i|^2 = 1 (variance 1/2 per real part).

    With ``size`` given, returns ``size`` independent vectors as rows.
    """
    if dim < 1:
        raise DimensionError("dim must be positive")
    gen = as_generator(rng)
    shape = (dim,) if size is None else (size, dim)
    z = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    return z / np.sqrt(2.0)


def random_pure_states(rng, dim: int, count: int) -> np.ndarray:
    """``count`` uniformly distributed unit vectors, one per row."""
    z = gaussian_vector(rng, dim, size=count)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_unitary(rng, d: int, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix.

    The columns of Q are rephased by ``r_ii / |r_ii|``; without this step
    the QR output is not Haar distributed. With ``size`` given a stack of
    shape ``(size, d, d)`` is returned.
    """
    if d < 1:
        raise DimensionError("d must be positive")
    _check_dim(d * d)
    gen = as_generator(rng)
    shape = (d, d) if size is None else (size, d, d)
    z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def random_isometry(rng, dim_s: int, dims: BipartiteDims) -> np.ndarray:
    """First ``dim_s`` columns of a Haar unitary on A (x) B."""
    if not 1 <= dim_s <= dims.total:
        raise DimensionError(f"dim_s={dim_s} must lie in [1, {dims.total}]")
    _check_dim(dims.total * dim_s)
    gen = as_generator(rng)
    shape = (dims.total, dim_s)
    z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
    # reduced QR of the leading columns has the same law as slicing a full Haar unitary
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))
