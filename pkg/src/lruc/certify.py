"""Checking the (local) randomizing inequalities for a given channel.

The forward deficit of an input ``phi`` is ``||N(phi)||_inf - 1/dB`` and the
conjugate deficit is ``||N^C(phi)||_inf - 1/dE``. A net only samples the
sphere, so the worst deficit over its points is a lower bound on the
supremum unless the net is a covering net, in which case adding half the
covering radius gives an upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    RandomUnitaryChannel,
    apply_conjugate,
    conjugate_outputs_on_states,
    output_on_pure,
    outputs_on_states,
)
from .errors import DomainError, ShapeError
from .linalg import as_pure_state, dagger, operator_norm, top_eigenpair
from .randgen import SeededStream, derive_stream, random_pure_states
from .spheregeo import COVERING_NET, MEASURE_NET, EpsilonNet

PASS = "pass"
FAIL = "fail"
COVERING_CERTIFIED = "coveringCertified"
STATISTICAL_ONLY = "statisticalOnly"


@dataclass(frozen=True)
class CertificationSpec:
    """Parameters of a certification run.

    ``require_conjugate`` adds the complementary-channel inequality to the
    verdict. Both outputs of a pure input share one spectrum, so the two
    inequalities can only hold together when ``dE/dB`` lies within
    ``[1/(1+eps), 1+eps]``; by default the verdict uses the forward
    inequality and the conjugate one is reported alongside.
    """

    epsilon: float
    net_kind: str = MEASURE_NET
    net_constant_c: float = 10.0
    adversarial_restarts: int = 0
    require_conjugate: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
        if self.net_kind not in (MEASURE_NET, COVERING_NET):
            raise DomainError(f"unknown net kind {self.net_kind!r}")
        if self.net_constant_c <= 0:
            raise DomainError("net constant must be positive")
        if self.adversarial_restarts < 0:
            raise DomainError("adversarial restarts must be nonnegative")


@dataclass
class DeficitReport:
    forward_deficit: float
    conjugate_deficit: float
    worst_state: np.ndarray
    net_correction: float
    verdict: str
    guarantee_kind: str
    forward_pass: bool
    conjugate_pass: bool
    epsilon: float
    dB: int
    dE: int
    net_points: int
    adversarial_value: float | None = None


def local_deficits(ch: RandomUnitaryChannel, phi: np.ndarray) -> tuple[float, float]:
    """Forward and conjugate deficits of one pure input."""
    phi = as_pure_state(phi)
    if phi.size != ch.dA:
        raise ShapeError(f"input dimension {phi.size} does not match dA={ch.dA}")
    fwd = operator_norm(output_on_pure(ch, phi)) - 1.0 / ch.dB
    conj = operator_norm(apply_conjugate(ch, phi)) - 1.0 / ch.dE
    return fwd, conj


def randomizing_deficit(ch: RandomUnitaryChannel, phi: np.ndarray) -> float:
    """``||N(phi) - I/dB||_inf``."""
    phi = as_pure_state(phi)
    if phi.size != ch.dA:
        raise ShapeError(f"input dimension {phi.size} does not match dA={ch.dA}")
    return operator_norm(output_on_pure(ch, phi) - np.eye(ch.dB) / ch.dB)


def net_deficits(
    ch: RandomUnitaryChannel, points: np.ndarray, gram_limit: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Forward and conjugate deficits at every row of ``points``.

    The complementary output is the Gram matrix ``M M^dagger`` of the weighted
    vectors ``M_i = sqrt(w_i) U_i phi`` while ``M^dagger M`` is the transpose
    of ``N(phi)``. Above ``gram_limit`` environment dimensions the ``dE x dE``
    Gram matrices are skipped and the shared top eigenvalue is reused.
    """
    outs = outputs_on_states(ch, points)
    top = np.linalg.eigvalsh(outs)[:, -1]
    if ch.dE <= gram_limit:
        gram_top = np.linalg.eigvalsh(conjugate_outputs_on_states(ch, points))[:, -1]
    else:
        # nonzero spectra of the two marginals of a pure state coincide
        gram_top = top
    return top - 1.0 / ch.dB, gram_top - 1.0 / ch.dE


def certify_over_net(
    ch: RandomUnitaryChannel,
    net: EpsilonNet,
    spec: CertificationSpec,
    stream: SeededStream | None = None,
) -> DeficitReport:
    """Evaluate the local deficits on every net point and issue a verdict.

    A covering net of trace-distance radius ``delta`` earns the correction
    ``delta/2``: for pure ``phi``, ``phi~`` and ``0 <= rho <= I``,
    ``tr (phi - phi~) rho <= ||phi - phi~||_1 / 2``. With
    ``delta = eps/(2 dB)`` that is ``eps/(4 dB)``. When
    ``spec.adversarial_restarts`` is positive the worst net points and random
    starts are also pushed uphill by :func:`adversarial_sup_estimate`.
    """
    if len(net.points) == 0:
        raise DomainError("cannot certify over an empty net")
    if net.dim != ch.dA:
        raise ShapeError(f"net dimension {net.dim} does not match dA={ch.dA}")
    eps = spec.epsilon
    fwd, conj = net_deficits(ch, net.points)
    i = int(np.argmax(fwd))
    worst_fwd, worst_state = float(fwd[i]), net.points[i]
    worst_conj = float(np.max(conj))
    adv_value = None
    if spec.adversarial_restarts > 0:
        n_seeded = (spec.adversarial_restarts + 1) // 2
        seeds = net.points[np.argsort(-fwd, kind="stable")[:n_seeded]]
        stream = stream if stream is not None else SeededStream(0)
        adv_value, adv_state = adversarial_sup_estimate(
            ch, spec.adversarial_restarts, stream, starts=seeds
        )
        if adv_value - 1.0 / ch.dB > worst_fwd:
            worst_fwd, worst_state = adv_value - 1.0 / ch.dB, adv_state
            worst_conj = max(worst_conj, adv_value - 1.0 / ch.dE)
    if net.kind == COVERING_NET:
        correction, kind = net.epsilon / 2.0, COVERING_CERTIFIED
    else:
        correction, kind = 0.0, STATISTICAL_ONLY
    fwd_ok = worst_fwd + correction <= eps / ch.dB
    conj_ok = worst_conj + correction <= eps / ch.dE
    ok = fwd_ok and (conj_ok or not spec.require_conjugate)
    return DeficitReport(
        forward_deficit=worst_fwd,
        conjugate_deficit=worst_conj,
        worst_state=worst_state,
        net_correction=correction,
        verdict=PASS if ok else FAIL,
        guarantee_kind=kind,
        forward_pass=bool(fwd_ok),
        conjugate_pass=bool(conj_ok),
        epsilon=eps,
        dB=ch.dB,
        dE=ch.dE,
        net_points=len(net.points),
        adversarial_value=adv_value,
    )


def _adjoint_on_pure(ch: RandomUnitaryChannel, v: np.ndarray) -> np.ndarray:
    # N^dagger(|v><v|) = sum_i w_i U_i^dagger |v><v| U_i
    w = dagger(ch.unitaries) @ v
    return (w.T * ch.weights) @ w.conj()


def ascent_path(
    ch: RandomUnitaryChannel, phi: np.ndarray, max_iter: int = 200, tol: float = 1e-13
) -> tuple[list[float], np.ndarray]:
    """Alternating maximization of ``<v|N(phi)|v>`` over ``v`` and ``phi``.

    For fixed ``phi`` the best ``v`` is the top eigenvector of ``N(phi)``; for
    fixed ``v`` the best ``phi`` is the top eigenvector of ``N^dagger(v)``.
    Each half-step can only increase the objective, so the recorded values
    ``||N(phi_k)||_inf`` are non-decreasing.
    """
    phi = as_pure_state(phi)
    val, v = top_eigenpair(output_on_pure(ch, phi))
    path = [val]
    for _ in range(max_iter):
        _, cand = top_eigenpair(_adjoint_on_pure(ch, v))
        new_val, new_v = top_eigenpair(output_on_pure(ch, cand))
        if new_val < val:
            break
        gain = new_val - val
        phi, val, v = cand, new_val, new_v
        path.append(val)
        if gain <= tol:
            break
    return path, phi


def adversarial_sup_estimate(
    ch: RandomUnitaryChannel,
    restarts: int,
    stream: SeededStream,
    starts: np.ndarray | None = None,
    max_iter: int = 200,
) -> tuple[float, np.ndarray]:
    """Lower bound on ``sup_phi ||N(phi)||_inf`` by restarted ascent.

    ``starts`` seeds the first restarts; the rest begin at uniform random
    states drawn from ``stream``.
    """
    if restarts < 1:
        raise DomainError(f"restarts must be positive, got {restarts}")
    inits = [] if starts is None else [np.asarray(s, dtype=complex) for s in starts]
    if len(inits) < restarts:
        extra = random_pure_states(ch.dA, restarts - len(inits), derive_stream(stream, 0))
        inits.extend(extra)
    best_val, best_phi = -np.inf, None
    for phi0 in inits:
        path, phi = ascent_path(ch, phi0, max_iter=max_iter)
        if path[-1] > best_val:
            best_val, best_phi = path[-1], phi
    return float(best_val), best_phi
