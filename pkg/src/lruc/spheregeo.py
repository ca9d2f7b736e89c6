"""Caps, nets and set-system bounds on the unit sphere of ``C^d``.

``C^d`` is identified with ``R^{2d}`` through ``x -> (Re x, Im x)``, so the
pure-state sphere is ``S^{2d-1}`` and a cap of height ``h`` around ``u`` is
``{x : Re<u|x> >= 1 - h}``, the sphere cut by a closed half-space.

Two kinds of net are built here. A *measure net* meets every cap of measure
at least ``eps``; it is a plain i.i.d. sample whose size grows like
``d/eps log(1/eps)``. A *covering net* puts every pure state within a given
trace distance of some net point; its size is exponential in ``d``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import betainc

from .errors import DomainError, NumericError, ResourceError, ShapeError
from .linalg import as_pure_state
from .randgen import SeededStream, _rng, derive_stream, random_pure_states

MEASURE_NET = "measureNet"
COVERING_NET = "coveringNet"


@dataclass(frozen=True)
class Cap:
    center: np.ndarray
    height: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_pure_state(self.center))
        if not 0.0 < self.height <= 2.0:
            raise DomainError(f"cap height must lie in (0, 2], got {self.height}")


@dataclass
class EpsilonNet:
    """Finite point set on the sphere.

    For a measure net ``epsilon`` is the measure threshold; for a covering
    net it is the covering radius in trace distance.
    """

    dim: int
    epsilon: float
    points: np.ndarray
    kind: str = MEASURE_NET
    constant_c: float = 10.0
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def covering_radius(self) -> float | None:
        return self.epsilon if self.kind == COVERING_NET else None


def real_inner(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``Re<u|x>``, the Euclidean inner product in ``R^{2d}``."""
    return np.real(np.asarray(x) @ np.conj(u))


def cap_contains(cap: Cap, x: np.ndarray) -> bool:
    x = np.asarray(x, dtype=complex)
    if x.shape != cap.center.shape:
        raise ShapeError(f"point has dimension {x.size}, cap has {cap.center.size}")
    return bool(real_inner(cap.center, x) >= 1.0 - cap.height)


def cap_measure(h: float, d: int) -> float:
    """Normalized surface measure of a height-``h`` cap on ``S^{2d-1}``.

    With ``n = 2d`` and ``t = 1 - h`` the cap ``{x_1 >= t}`` has measure
    ``I_{1-t^2}((n-1)/2, 1/2) / 2`` for ``t >= 0``, and the complement of the
    mirrored cap for ``t < 0``.
    """
    if not 0.0 < h <= 2.0:
        raise DomainError(f"cap height must lie in (0, 2], got {h}")
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    t = 1.0 - h
    a = (2 * d - 1) / 2.0
    if abs(t) < 0.5:
        # 1 - t^2 rounds to 1 near the equator; use the complementary form
        return 0.5 - 0.5 * math.copysign(1.0, t) * float(betainc(0.5, a, t * t))
    half = 0.5 * float(betainc(a, 0.5, 1.0 - t * t))
    return half if t >= 0 else 1.0 - half


def height_for_measure(eps: float, d: int, tol: float = 1e-9, max_steps: int = 200) -> float:
    """Height of the cap with measure ``eps``, by bisection on ``(0, 2]``."""
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"measure must lie in (0, 1], got {eps}")
    if eps == 1.0:
        return 2.0
    lo, hi = 0.0, 2.0
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if cap_measure(mid, d) < eps:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    h = 0.5 * (lo + hi)
    if abs(cap_measure(h, d) - eps) > tol:
        raise NumericError(f"bisection for eps={eps}, d={d} did not converge")
    return h


def measure_net_size(d: int, eps: float, c: float = 10.0) -> int:
    """``ceil(C d (1/eps) log2(1/eps))``."""
    return math.ceil(c * d * (1.0 / eps) * math.log2(1.0 / eps))


def build_net_probabilistic(d: int, eps: float, c: float, stream: SeededStream) -> EpsilonNet:
    """Measure net of i.i.d. uniform points; see :func:`measure_net_size`."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    if not 0.0 < eps <= 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {eps}")
    if c <= 0:
        raise DomainError(f"net constant must be positive, got {c}")
    t = measure_net_size(d, eps, c)
    pts = random_pure_states(d, t, stream)
    return EpsilonNet(d, eps, pts, MEASURE_NET, c, getattr(stream, "master_seed", None))


def verify_net_against_caps(net: EpsilonNet, eps: float, trials: int, stream) -> int:
    """Count random caps of measure ``eps`` that contain no net point.

    Centers are uniform on the sphere, so a zero count is statistical evidence
    for the net property, not a proof.
    """
    if trials <= 0:
        return 0
    h = height_for_measure(eps, net.dim)
    centers = random_pure_states(net.dim, trials, stream)
    if len(net.points) == 0:
        return trials
    misses = 0
    for lo in range(0, trials, 4096):
        best = np.max(np.real(centers[lo:lo + 4096].conj() @ net.points.T), axis=1)
        misses += int(np.count_nonzero(best < 1.0 - h))
    return misses


def _projector_embedding(states: np.ndarray) -> np.ndarray:
    # real vectors whose dot products are |<phi|psi>|^2
    outer = states[:, :, None] * states[:, None, :].conj()
    flat = outer.reshape(len(states), -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def covering_cardinality_estimate(d: int, delta: float) -> int:
    """Inverse measure of a trace-distance ball of radius ``delta``.

    ``|<e1|phi>|^2`` is Beta(1, d-1) for uniform ``phi``, so the ball has
    measure ``(delta^2/4)^(d-1)``.
    """
    return math.ceil((4.0 / min(delta, 2.0) ** 2) ** (d - 1))


def build_covering_net(
    d: int,
    delta: float,
    stream: SeededStream,
    *,
    max_points: int = 20000,
    streak: int = 2000,
    margin: float = 0.1,
    validation_probes: int = 20000,
    max_repairs: int = 20,
) -> EpsilonNet:
    """Random covering net in trace distance.

    Uniform states are drawn and kept when they are farther than
    ``(1 - margin) * delta`` from every kept point; drawing stops after
    ``streak`` consecutive rejections. A Monte Carlo validation pass then adds
    any probe left uncovered at radius ``delta`` and repeats until a pass
    comes back clean.
    """
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    if not 0.0 < delta <= 2.0:
        raise DomainError(f"covering radius must lie in (0, 2], got {delta}")
    rng = _rng(stream)
    seed = getattr(stream, "master_seed", None)
    if d == 1 or delta >= 2.0:
        pts = random_pure_states(d, 1, rng)
        return EpsilonNet(d, delta, pts, COVERING_NET, 0.0, seed)
    estimate = covering_cardinality_estimate(d, delta)
    if estimate > max_points:
        raise ResourceError(
            f"covering net for d={d}, delta={delta} needs about {estimate} points "
            f"(budget {max_points})",
            estimate=estimate,
        )

    keep_fid = 1.0 - ((1.0 - margin) * delta) ** 2 / 4.0
    cover_fid = 1.0 - delta ** 2 / 4.0
    kept = np.empty((0, d), dtype=complex)
    emb = np.empty((0, 2 * d * d))
    rejected = 0
    while rejected < streak:
        cand = random_pure_states(d, 1024, rng)
        cemb = _projector_embedding(cand)
        covered = (np.max(cemb @ emb.T, axis=1) >= keep_fid) if len(kept) else np.zeros(len(cand), bool)
        new_pts, new_emb = [], []
        for i in range(len(cand)):
            if not covered[i] and new_emb:
                covered[i] = np.max(np.array(new_emb) @ cemb[i]) >= keep_fid
            if covered[i]:
                rejected += 1
                if rejected >= streak:
                    break
            else:
                rejected = 0
                new_pts.append(cand[i])
                new_emb.append(cemb[i])
        if new_pts:
            kept = np.vstack([kept, new_pts])
            emb = np.vstack([emb, new_emb])
        if len(kept) > max_points:
            raise ResourceError(
                f"covering net exceeded {max_points} points", estimate=estimate
            )

    repairs = 0
    while True:
        probes = random_pure_states(d, validation_probes, rng)
        fid = _max_fidelity(_projector_embedding(probes), emb)
        holes = probes[fid < cover_fid]
        if len(holes) == 0:
            break
        repairs += 1
        if repairs > max_repairs:
            raise ResourceError(f"covering net still has holes after {max_repairs} repairs", estimate=estimate)
        for p in holes:
            pe = _projector_embedding(p[None, :])
            if np.max(emb @ pe[0]) < cover_fid:
                kept = np.vstack([kept, p[None, :]])
                emb = np.vstack([emb, pe])
    return EpsilonNet(d, delta, kept, COVERING_NET, 0.0, seed, {"repairs": repairs})


def _max_fidelity(probe_emb: np.ndarray, net_emb: np.ndarray, chunk: int = 1024) -> np.ndarray:
    out = np.empty(len(probe_emb))
    for lo in range(0, len(probe_emb), chunk):
        out[lo:lo + chunk] = np.max(probe_emb[lo:lo + chunk] @ net_emb.T, axis=1)
    return out


def covering_misses(net: EpsilonNet, delta: float, probes: int, stream) -> int:
    """Number of uniform probe states farther than ``delta`` from every net point."""
    pts = random_pure_states(net.dim, probes, stream)
    fid = _max_fidelity(_projector_embedding(pts), _projector_embedding(net.points))
    return int(np.count_nonzero(fid < 1.0 - delta ** 2 / 4.0 - 1e-15))


def shatter_bound(vc_dim: int, m: int, max_bits: int = 64) -> int:
    """Sauer-Shelah bound ``sum_{j=0}^{vc_dim} C(m, j)`` on the shatter function."""
    if vc_dim < 0 or m < 0:
        raise DomainError("vc_dim and m must be nonnegative")
    total = sum(math.comb(m, j) for j in range(min(vc_dim, m) + 1))
    if total.bit_length() > max_bits:
        raise ResourceError(f"shatter bound for m={m}, vc_dim={vc_dim} exceeds {max_bits} bits")
    return total


class ChernoffCheck(NamedTuple):
    probability: float
    passes: bool


def chernoff_floor_check(t: int, eps: float) -> ChernoffCheck:
    """Exact ``P[X >= ceil(t eps / 2)]`` for ``X ~ Binomial(t, eps)``.

    ``passes`` is whether the probability is at least 1/2; below ``t eps = 8``
    there is no claim to check and ``passes`` is vacuously true.
    """
    if t < 1:
        raise DomainError(f"t must be positive, got {t}")
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {eps}")
    k = math.ceil(t * eps / 2.0)
    if eps == 1.0:
        prob = 1.0 if k <= t else 0.0
    else:
        prob = math.fsum(math.comb(t, j) * eps ** j * (1.0 - eps) ** (t - j) for j in range(k, t + 1))
        prob = min(1.0, prob)
    applicable = t * eps >= 8
    return ChernoffCheck(prob, (prob >= 0.5) if applicable else True)


def _pattern_margins(proj: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """For each label mask, best ``min_in - max_out`` over candidate directions.

    ``proj`` is ``(directions, k)``; ``masks`` is ``(patterns, k)`` boolean.
    """
    inside = np.where(masks[:, None, :], proj[None, :, :], np.inf).min(axis=2)
    outside = np.where(masks[:, None, :], -np.inf, proj[None, :, :]).max(axis=2)
    inside = np.where(np.isinf(inside), 1.0, inside)
    outside = np.where(np.isinf(outside), -1.0, outside)
    return inside - outside


def _pattern_realized(points: np.ndarray, mask: np.ndarray, rng, directions: int, polish: int) -> bool:
    """Randomized search for a cap realizing ``mask`` on ``points`` (real coordinates)."""
    n = points.shape[1]
    if mask.all() or not mask.any():
        return True
    best_u, best = None, -np.inf
    for _ in range(2):
        u = rng.standard_normal((directions, n))
        # directions aimed at the inside set raise the hit rate a lot
        u[: directions // 2] += 2.0 * points[mask].mean(axis=0)
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        marg = _pattern_margins(u @ points.T, mask[None, :])[0]
        i = int(np.argmax(marg))
        if marg[i] > 0:
            return True
        if marg[i] > best:
            best, best_u = marg[i], u[i]
    step = 0.5
    for _ in range(polish):
        cand = best_u + step * rng.standard_normal((64, n))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        marg = _pattern_margins(cand @ points.T, mask[None, :])[0]
        i = int(np.argmax(marg))
        if marg[i] > 0:
            return True
        if marg[i] > best:
            best, best_u = marg[i], cand[i]
        else:
            step *= 0.7
    return False


def is_shattered(points: np.ndarray, rng, directions: int = 2048, polish: int = 60) -> bool:
    """Whether caps realize every labelling of ``points`` (rows in ``R^{2d}``)."""
    k = len(points)
    for bits in range(2 ** k):
        mask = np.array([(bits >> j) & 1 for j in range(k)], dtype=bool)
        if not _pattern_realized(points, mask, rng, directions, polish):
            return False
    return True


def to_real(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=complex)
    return np.concatenate([states.real, states.imag], axis=-1)


def empirical_shatter_search(
    d: int,
    m: int,
    samples: int,
    stream: SeededStream,
    *,
    directions: int = 2048,
    polish: int = 60,
) -> int:
    """Largest ``k <= m`` such that a ``k``-subset of some sampled configuration is shattered.

    Each of ``samples`` configurations draws ``m`` uniform points on
    ``S^{2d-1}``. A labelling counts as realized when randomized search finds
    a cap for it, so the answer is a lower bound on the VC dimension of caps.
    """
    if d > 2 or m > 6:
        raise ResourceError(f"shatter search is limited to d <= 2 and m <= 6, got d={d}, m={m}")
    if d < 1 or m < 1 or samples < 1:
        raise DomainError("d, m and samples must be positive")
    best = 0
    for s in range(samples):
        sub = derive_stream(stream, s)
        rng = sub.generator()
        pts = to_real(random_pure_states(d, m, rng))
        for k in range(m, best, -1):
            if any(is_shattered(pts[list(idx)], rng, directions, polish) for idx in itertools.combinations(range(m), k)):
                best = k
                break
        if best == m:
            break
    return best
