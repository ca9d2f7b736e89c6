"""Seeded, splittable sampling of Haar unitaries and uniform pure states.

A :class:`SeededStream` is a master seed plus a path of child indices. The
path is fed to :class:`numpy.random.SeedSequence` as its spawn key, so the
same stream always yields the same generator and distinct paths give
statistically independent generators regardless of the order in which they
are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master_seed <= _SEED_MASK:
            raise DomainError(f"master seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if any(i < 0 for i in self.path):
            raise DomainError("stream indices must be nonnegative")

    @property
    def stream_index(self) -> int:
        return self.path[-1] if self.path else 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


def derive_stream(master: SeededStream, index: int) -> SeededStream:
    """Deterministic child stream ``index`` of ``master``."""
    if index < 0:
        raise DomainError(f"stream index must be nonnegative, got {index}")
    return SeededStream(master.master_seed, master.path + (int(index),))


def _rng(source) -> np.random.Generator:
    if isinstance(source, np.random.Generator):
        return source
    return source.generator()


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. standard complex normals, ``E|z|^2 = 1``."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def _haar_from_ginibre(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    # zero diagonal has probability zero; guard anyway so the phase is defined
    phase = np.where(diag == 0, 1.0, diag / np.where(diag == 0, 1.0, np.abs(diag)))
    return q * phase[..., None, :]


def haar_unitary(d: int, stream) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary.

    QR of a complex Ginibre matrix, with each column of ``Q`` multiplied by
    the phase of the matching diagonal entry of ``R``. Without that correction
    the result is not Haar distributed.
    """
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    return _haar_from_ginibre(complex_gaussian(_rng(stream), (d, d)))


def haar_unitaries(d: int, count: int, stream) -> np.ndarray:
    """``count`` independent Haar unitaries stacked as ``(count, d, d)``."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    if count < 0:
        raise DomainError(f"count must be nonnegative, got {count}")
    return _haar_from_ginibre(complex_gaussian(_rng(stream), (count, d, d)))


def random_pure_state(d: int, stream) -> np.ndarray:
    """Unitarily invariant random unit vector in ``C^d``."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    z = complex_gaussian(_rng(stream), (d,))
    return z / np.linalg.norm(z)


def random_pure_states(d: int, count: int, stream) -> np.ndarray:
    """``count`` uniform pure states as rows of a ``(count, d)`` array."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    z = complex_gaussian(_rng(stream), (count, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_subspace_isometry(d_total: int, s: int, stream) -> np.ndarray:
    """Orthonormal basis of a uniformly random ``s``-dimensional subspace.

    Returns the first ``s`` columns of a Haar unitary on ``C^d_total``.
    """
    if d_total < 1 or not 1 <= s <= d_total:
        raise DomainError(f"need 1 <= s <= d_total, got s={s}, d_total={d_total}")
    return haar_unitary(d_total, stream)[:, :s]
