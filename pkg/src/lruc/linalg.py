"""Dense complex linear algebra for states and channels.

Matrices and state vectors are plain numpy arrays. Bipartite systems use a
B-major index convention throughout the package: the basis vector
``|b>|e>`` of ``C^dB (x) C^dE`` sits at flat index ``b * dE + e``, which is
what ``np.kron`` and a row-major reshape to ``(dB, dE)`` both produce.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidStateError, ShapeError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12


class BipartiteShape(NamedTuple):
    dB: int
    dE: int

    @property
    def dim(self) -> int:
        return self.dB * self.dE


class SchmidtDecomposition(NamedTuple):
    """``phi = sum_i coefficients[i] * kron(left[:, i], right[:, i])``."""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def projector(phi: np.ndarray) -> np.ndarray:
    """Return ``|phi><phi|``."""
    phi = np.asarray(phi, dtype=complex)
    return np.outer(phi, phi.conj())


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def as_matrix(m) -> np.ndarray:
    """Validate a finite 2-D complex array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("matrix has non-finite entries")
    return m


def as_pure_state(phi, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a unit vector and return it as a complex array."""
    phi = np.asarray(phi, dtype=complex)
    if phi.ndim != 1 or phi.size == 0:
        raise ShapeError(f"expected a state vector, got shape {phi.shape}")
    norm = np.linalg.norm(phi)
    if not np.isfinite(norm) or abs(norm - 1.0) > tol:
        raise InvalidStateError(f"state vector has norm {norm!r}, expected 1")
    return phi


def as_density(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Validate Hermiticity, positivity and unit trace."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho, tol):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density matrix has trace {tr!r}")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -tol:
        raise InvalidStateError(f"density matrix has eigenvalue {lo!r}")
    return rho


def _check_shape(dim: int, shape: BipartiteShape) -> BipartiteShape:
    shape = BipartiteShape(*shape)
    if shape.dB < 1 or shape.dE < 1:
        raise ShapeError(f"bipartite factors must be positive, got {tuple(shape)}")
    if dim != shape.dim:
        raise ShapeError(f"dimension {dim} does not factor as {shape.dB} x {shape.dE}")
    return shape


def partial_trace(rho: np.ndarray, shape: BipartiteShape, keep: str = "B") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``keep="B"`` returns ``tr_E rho`` and ``keep="E"`` returns ``tr_B rho``.
    """
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"operator must be square, got {rho.shape}")
    dB, dE = _check_shape(rho.shape[0], shape)
    r = rho.reshape(dB, dE, dB, dE)
    if keep == "B":
        return np.einsum("aebe->ab", r)
    if keep == "E":
        return np.einsum("aeaf->ef", r)
    raise ValueError(f"keep must be 'B' or 'E', got {keep!r}")


def reduced_state(phi: np.ndarray, shape: BipartiteShape, keep: str = "B") -> np.ndarray:
    """Reduced density matrix of a pure bipartite state without forming ``|phi><phi|``."""
    phi = np.asarray(phi, dtype=complex)
    dB, dE = _check_shape(phi.shape[-1], shape)
    m = phi.reshape(phi.shape[:-1] + (dB, dE))
    if keep == "B":
        return m @ dagger(m)
    if keep == "E":
        return np.swapaxes(m, -1, -2) @ np.conj(m)
    raise ValueError(f"keep must be 'B' or 'E', got {keep!r}")


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value of a square matrix.

    Hermitian input goes through a full eigensolve, anything else through
    the SVD.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"operator norm needs a square matrix, got {m.shape}")
    if is_hermitian(m):
        w = np.linalg.eigvalsh((m + dagger(m)) / 2)
        return float(max(abs(w[0]), abs(w[-1])))
    return float(np.linalg.svd(m, compute_uv=False)[0])


def trace_distance(phi: np.ndarray, psi: np.ndarray) -> float:
    """Trace norm ``|| |phi><phi| - |psi><psi| ||_1`` of two pure states."""
    phi = as_pure_state(phi)
    psi = as_pure_state(psi)
    if phi.shape != psi.shape:
        raise ShapeError(f"state dimensions differ: {phi.size} vs {psi.size}")
    fid = abs(np.vdot(phi, psi)) ** 2
    return float(2.0 * np.sqrt(max(0.0, 1.0 - fid)))


def entropy_of_spectrum(w: np.ndarray) -> float:
    """Shannon entropy in bits of an eigenvalue list, clamping noise at zero."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -PSD_TOL:
        raise InvalidStateError(f"eigenvalue {w.min()!r} below tolerance")
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-tr rho log2 rho`` with ``0 log 0 = 0``."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1] or not is_hermitian(rho):
        raise InvalidStateError("entropy needs a Hermitian square matrix")
    return entropy_of_spectrum(np.linalg.eigvalsh((rho + dagger(rho)) / 2))


def schmidt(phi: np.ndarray, shape: BipartiteShape) -> SchmidtDecomposition:
    phi = as_pure_state(phi)
    dB, dE = _check_shape(phi.size, shape)
    u, s, vh = np.linalg.svd(phi.reshape(dB, dE), full_matrices=False)
    return SchmidtDecomposition(s, u, vh.T)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def top_eigenpair(h: np.ndarray, degeneracy_tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a Hermitian matrix and a deterministic eigenvector.

    Degenerate top eigenvectors are phase-fixed so their first non-negligible
    amplitude is real positive, then the lexicographically largest is taken.
    """
    w, v = np.linalg.eigh(h)
    top = w[-1]
    cands = [v[:, k] for k in range(len(w)) if top - w[k] <= degeneracy_tol]
    fixed = [_fix_phase(c) for c in cands]
    if len(fixed) == 1:
        return float(top), fixed[0]
    key = lambda c: tuple(np.round(np.column_stack([c.real, c.imag]).ravel(), 12))
    return float(top), max(fixed, key=key)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size == 0:
        return v
    a = v[idx[0]]
    return v * (abs(a) / a)
