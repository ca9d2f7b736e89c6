"""Random unitary channels and their Stinespring dilations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError
from .linalg import as_density, as_pure_state, dagger
from .randgen import SeededStream, haar_unitaries

UNITARY_TOL = 1e-10
WEIGHT_TOL = 1e-12

PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class RandomUnitaryChannel:
    """``N(rho) = sum_i w_i U_i rho U_i^dagger``.

    ``unitaries`` has shape ``(dE, dA, dA)``; the output dimension equals the
    input dimension, so ``dB == dA``.
    """

    unitaries: np.ndarray
    weights: np.ndarray
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        u = np.asarray(self.unitaries, dtype=complex)
        w = np.asarray(self.weights, dtype=float)
        if u.ndim != 3 or u.shape[1] != u.shape[2] or u.shape[0] < 1:
            raise ShapeError(f"unitaries must have shape (dE, dA, dA), got {u.shape}")
        if w.shape != (u.shape[0],):
            raise ShapeError(f"{w.size} weights for {u.shape[0]} unitaries")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError("weights must be positive and sum to 1")
        eye = np.eye(u.shape[1])
        dev = np.max(np.abs(dagger(u) @ u - eye))
        if dev > UNITARY_TOL:
            raise DomainError(f"operator deviates from unitarity by {dev:.3g}")
        u.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "unitaries", u)
        object.__setattr__(self, "weights", w)

    @property
    def dA(self) -> int:
        return self.unitaries.shape[1]

    @property
    def dB(self) -> int:
        return self.unitaries.shape[1]

    @property
    def dE(self) -> int:
        return self.unitaries.shape[0]

    @classmethod
    def uniform(cls, unitaries, seed=None) -> "RandomUnitaryChannel":
        unitaries = np.asarray(unitaries, dtype=complex)
        n = unitaries.shape[0]
        return cls(unitaries, np.full(n, 1.0 / n), seed)


def sample_uniform_ruc(dA: int, dE: int, stream: SeededStream) -> RandomUnitaryChannel:
    """``dE`` i.i.d. Haar unitaries on ``C^dA`` with weights ``1/dE``."""
    if dA < 1 or dE < 1:
        raise DomainError(f"dimensions must be positive, got dA={dA}, dE={dE}")
    return RandomUnitaryChannel.uniform(haar_unitaries(dA, dE, stream), getattr(stream, "master_seed", None))


def pauli_channel() -> RandomUnitaryChannel:
    """Qubit channel averaging over ``I, X, Y, Z``; it maps every state to ``I/2``."""
    return RandomUnitaryChannel.uniform(PAULIS)


def identity_channel(d: int) -> RandomUnitaryChannel:
    return RandomUnitaryChannel.uniform(np.eye(d, dtype=complex)[None])


def _check_input(ch: RandomUnitaryChannel, dim: int):
    if dim != ch.dA:
        raise ShapeError(f"input dimension {dim} does not match channel dA={ch.dA}")


def apply_channel(ch: RandomUnitaryChannel, rho: np.ndarray) -> np.ndarray:
    rho = as_density(rho)
    _check_input(ch, rho.shape[0])
    return np.einsum("k,kab,bc,kdc->ad", ch.weights, ch.unitaries, rho, ch.unitaries.conj())


def output_on_pure(ch: RandomUnitaryChannel, phi: np.ndarray) -> np.ndarray:
    """``N(|phi><phi|)`` computed from the vectors ``U_i phi``."""
    phi = as_pure_state(phi)
    _check_input(ch, phi.size)
    w = ch.unitaries @ phi
    return (w.T * ch.weights) @ w.conj()


def stinespring_isometry(ch: RandomUnitaryChannel) -> np.ndarray:
    """``V phi = sum_i sqrt(w_i) (U_i phi) (x) |i>`` as a ``(dA dE) x dA`` matrix.

    Row ``b * dE + i`` holds ``sqrt(w_i) U_i[b, :]``.
    """
    scaled = np.sqrt(ch.weights)[:, None, None] * ch.unitaries
    return np.ascontiguousarray(scaled.transpose(1, 0, 2)).reshape(ch.dA * ch.dE, ch.dA)


def apply_conjugate(ch: RandomUnitaryChannel, phi: np.ndarray) -> np.ndarray:
    """Complementary channel output on a pure input.

    Entry ``(i, j)`` is ``sqrt(w_i w_j) <phi|U_j^dagger U_i|phi>``, the Gram
    matrix of the weighted vectors ``U_i phi``.
    """
    phi = as_pure_state(phi)
    _check_input(ch, phi.size)
    w = np.sqrt(ch.weights)[:, None] * (ch.unitaries @ phi)
    return w @ dagger(w)


def outputs_on_states(ch: RandomUnitaryChannel, states: np.ndarray, chunk: int = 64) -> np.ndarray:
    """``N(|phi_p><phi_p|)`` for every row ``phi_p`` of ``states``, shape ``(p, dA, dA)``."""
    states = np.asarray(states, dtype=complex)
    _check_input(ch, states.shape[1])
    dA, dE = ch.dA, ch.dE
    flat = ch.unitaries.reshape(dE * dA, dA)
    root_w = np.sqrt(ch.weights)[None, :, None]
    out = np.empty((len(states), dA, dA), dtype=complex)
    for lo in range(0, len(states), chunk):
        blk = states[lo:lo + chunk]
        # (p, dE, dA): row i of slice p is sqrt(w_i) U_i phi_p; contiguous copies keep matmul on BLAS
        w = np.ascontiguousarray((flat @ blk.T).reshape(dE, dA, len(blk)).transpose(2, 0, 1))
        w *= root_w
        out[lo:lo + chunk] = np.ascontiguousarray(np.swapaxes(w, 1, 2)) @ w.conj()
    return out


def conjugate_outputs_on_states(ch: RandomUnitaryChannel, states: np.ndarray) -> np.ndarray:
    """Complementary outputs for every row of ``states``, shape ``(p, dE, dE)``."""
    states = np.asarray(states, dtype=complex)
    _check_input(ch, states.shape[1])
    w = np.einsum("kab,pb->pka", ch.unitaries, states) * np.sqrt(ch.weights)[None, :, None]
    return w @ dagger(w)
