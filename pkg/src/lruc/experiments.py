"""Monte Carlo experiments comparing sampled channels with tail bounds.

Each experiment takes a master :class:`SeededStream`; trial ``t`` draws only
from its own derived child stream, so results depend on ``(config, seed)``
alone and not on the worker count. Tail bounds use the natural exponential.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .certify import CertificationSpec, adversarial_sup_estimate, certify_over_net
from .channel import sample_uniform_ruc
from .errors import DomainError, ResourceError
from .linalg import entropy_of_spectrum, reduced_state
from .parallel import trial_map
from .randgen import (
    SeededStream,
    derive_stream,
    haar_unitaries,
    haar_unitary,
    random_pure_state,
    random_pure_states,
    random_subspace_isometry,
)
from .spheregeo import build_net_probabilistic

LN2 = math.log(2.0)


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    seed: int
    dA: int
    dB: int
    dE: int
    epsilon: float
    statistic: float
    threshold: float
    exceeded: bool
    wall_time_ms: int = 0

    def __post_init__(self):
        if self.exceeded != (self.statistic >= self.threshold):
            raise ValueError("exceeded must equal statistic >= threshold")

    @classmethod
    def make(cls, experiment, seed, dA, dB, dE, epsilon, statistic, threshold, wall_time_ms=0):
        statistic, threshold = float(statistic), float(threshold)
        return cls(experiment, int(seed), int(dA), int(dB), int(dE), float(epsilon),
                   statistic, threshold, statistic >= threshold, int(wall_time_ms))


@dataclass
class ExperimentResult:
    records: list[TrialRecord]
    summary: dict = field(default_factory=dict)


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, int(round((time.perf_counter() - t0) * 1000))


def _exceed_summary(records, bound: float) -> dict:
    n = len(records)
    hits = sum(r.exceeded for r in records)
    frac = hits / n if n else 0.0
    b = min(1.0, bound)
    se = math.sqrt(b * (1.0 - b) / n) if n else 0.0
    return {
        "trials": n,
        "exceedances": hits,
        "exceed_fraction": frac,
        "bound": bound,
        "vacuous": bound >= 1.0,
        "standard_error_at_bound": se,
        "within_bound": frac <= b + 3.0 * se,
    }


# Rank-p projector tail -----------------------------------------------------


def lde_bound(dE: int, p: int, eps: float) -> float:
    """``2 exp(-dE p eps^2 / (6 ln 2))``."""
    return 2.0 * math.exp(-dE * p * eps * eps / (6.0 * LN2))


def _lde_trial(t, *, stream, dA, dE, p, phi, basis):
    u = haar_unitaries(dA, dE, derive_stream(stream, t))
    overlap = (u @ phi) @ basis.conj()
    mean = float(np.sum(np.abs(overlap) ** 2)) / dE
    return abs(mean - p / dA)


def lde_experiment(dA, dE, p, eps, trials, stream, *, workers=1, record_timing=False) -> ExperimentResult:
    """Deviation of ``(1/dE) sum_i tr(U_i phi U_i^dagger Pi)`` from ``p/dB``.

    ``phi`` and the rank-``p`` projector ``Pi`` are drawn once; every trial
    draws ``dE`` fresh Haar unitaries. Here ``dB = dA``.
    """
    if not 1 <= p <= dA:
        raise DomainError(f"projector rank must lie in [1, dA], got {p}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
    setup = derive_stream(stream, 0)
    phi = random_pure_state(dA, derive_stream(setup, 0))
    basis = random_subspace_isometry(dA, p, derive_stream(setup, 1))
    fn = functools.partial(_timed, functools.partial(
        _lde_trial, stream=derive_stream(stream, 1), dA=dA, dE=dE, p=p, phi=phi, basis=basis))
    outs = trial_map(fn, range(trials), workers)
    thr = eps * p / dA
    recs = [TrialRecord.make("lde", stream.master_seed, dA, dA, dE, eps, s, thr, ms if record_timing else 0)
            for s, ms in outs]
    bound = lde_bound(dE, p, eps)
    summary = {"experiment": "lde", "dA": dA, "dB": dA, "dE": dE, "rank": p, "epsilon": eps,
               "threshold": thr, "bound_formula": "2*exp(-dE*p*eps^2/(6*ln2))"}
    summary.update(_exceed_summary(recs, bound))
    return ExperimentResult(recs, summary)


# Reduced-state overlap tail ------------------------------------------------


def cramer_bound(dE: int, eps: float) -> float:
    """``exp(-dE eps^2 / (14 ln 2))``."""
    return math.exp(-dE * eps * eps / (14.0 * LN2))


def _cramer_trial(t, *, stream, dB, dE, probe, explicit_unitary):
    st = derive_stream(stream, t)
    if explicit_unitary:
        psi = random_pure_state(dB * dE, derive_stream(st, 0))
        chi = haar_unitary(dB * dE, derive_stream(st, 1)) @ psi
    else:
        chi = random_pure_state(dB * dE, st)
    m = chi.reshape(dB, dE)
    overlap = float(np.sum(np.abs(probe.conj() @ m) ** 2))
    return overlap - 1.0 / dB


def cramer_tail_experiment(dB, dE, eps, trials, stream, *, explicit_unitary=False, workers=1,
                           record_timing=False) -> ExperimentResult:
    """``tr(phi_B tr_E(U psi U^dagger)) - 1/dB`` for a fixed probe ``phi_B``.

    ``U psi`` with Haar ``U`` is itself a uniform pure state, so by default a
    uniform state is drawn directly. ``explicit_unitary=True`` samples both
    factors, which costs a ``dB dE``-dimensional QR per trial.
    """
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {eps}")
    if dB < 1 or dE < 1:
        raise DomainError("dimensions must be positive")
    probe = random_pure_state(dB, derive_stream(stream, 0))
    fn = functools.partial(_timed, functools.partial(
        _cramer_trial, stream=derive_stream(stream, 1), dB=dB, dE=dE, probe=probe,
        explicit_unitary=explicit_unitary))
    outs = trial_map(fn, range(trials), workers)
    thr = eps / dB
    recs = [TrialRecord.make("cramer", stream.master_seed, dB * dE, dB, dE, eps, s, thr,
                             ms if record_timing else 0) for s, ms in outs]
    bound = cramer_bound(dE, eps)
    stats = np.array([r.statistic for r in recs])
    summary = {"experiment": "cramer", "dB": dB, "dE": dE, "epsilon": eps, "threshold": thr,
               "bound_formula": "exp(-dE*eps^2/(14*ln2))",
               "explicit_unitary": explicit_unitary,
               "statistic_mean": float(stats.mean()) if len(stats) else 0.0,
               "statistic_std": float(stats.std(ddof=1)) if len(stats) > 1 else 0.0}
    summary.update(_exceed_summary(recs, bound))
    return ExperimentResult(recs, summary)


# Operator-norm concentration -----------------------------------------------


def concentration_bound(dB: int, dE: int, eps: float, c: float = 1.0) -> float:
    """``C dB^2/eps log2(dB/eps) exp(-dE eps^2/(14 ln 2))``."""
    return c * dB * dB / eps * math.log2(dB / eps) * cramer_bound(dE, eps)


def _concentration_trial(t, *, stream, dB, dE, restarts):
    st = derive_stream(stream, t)
    ch = sample_uniform_ruc(dB, dE, derive_stream(st, 0))
    value, _ = adversarial_sup_estimate(ch, restarts, derive_stream(st, 1))
    return value - 1.0 / dB


def concentration_experiment(dB, dE, eps, trials, c, stream, *, restarts=4, workers=1,
                             record_timing=False) -> ExperimentResult:
    """Worst output norm of a sampled channel against the union-bound tail.

    Each trial samples a uniform random unitary channel with ``dE`` Haar
    unitaries on ``C^dB`` (its Stinespring isometry embeds ``C^dB`` as a
    random subspace of ``C^{dB dE}``) and records
    ``sup_phi ||N(phi)||_inf - 1/dB`` as estimated by restarted ascent.
    """
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {eps}")
    if restarts < 1:
        raise DomainError("restarts must be positive")
    fn = functools.partial(_timed, functools.partial(
        _concentration_trial, stream=stream, dB=dB, dE=dE, restarts=restarts))
    outs = trial_map(fn, range(trials), workers)
    thr = eps / dB
    recs = [TrialRecord.make("concentration", stream.master_seed, dB, dB, dE, eps, s, thr,
                             ms if record_timing else 0) for s, ms in outs]
    bound = concentration_bound(dB, dE, eps, c)
    summary = {"experiment": "concentration", "dB": dB, "dE": dE, "epsilon": eps,
               "net_constant_c": c, "adversarial_restarts": restarts, "threshold": thr,
               "bound_formula": "C*dB^2/eps*log2(dB/eps)*exp(-dE*eps^2/(14*ln2))",
               "cramer_factor": cramer_bound(dE, eps),
               "max_statistic": max((r.statistic for r in recs), default=0.0)}
    summary.update(_exceed_summary(recs, bound))
    return ExperimentResult(recs, summary)


# Entanglement of random subspaces ------------------------------------------


def page_entropy(dB: int, dE: int) -> float:
    """Exact mean entanglement entropy (bits) of a uniform state on ``C^dB (x) C^dE``.

    ``sum_{k=n+1}^{mn} 1/k - (m-1)/(2n)`` nats with ``m = min``, ``n = max``.
    """
    m, n = min(dB, dE), max(dB, dE)
    nats = math.fsum(1.0 / k for k in range(n + 1, m * n + 1)) - (m - 1) / (2.0 * n)
    return nats / LN2


def page_entropy_approx(dB: int, dE: int) -> float:
    """``log2 dB - dB/(2 dE ln 2)`` for ``dB <= dE``."""
    return math.log2(dB) - dB / (2.0 * dE * LN2)


def entanglement_experiment(dB, dE, s, samples, stream, *, isometry=None) -> ExperimentResult:
    """Entropy of ``tr_E phi`` for random states inside one random ``s``-dimensional subspace.

    The sampled minimum only bounds the subspace minimum from above.
    ``implied_alpha`` solves ``min_entropy = log2 dB - alpha - dB/(dE ln 2)``.
    """
    if dB < 1 or dE < 1 or samples < 1:
        raise DomainError("dimensions and sample count must be positive")
    if not 1 <= s <= dB * dE:
        raise DomainError(f"subspace dimension must lie in [1, dB*dE], got {s}")
    if isometry is None:
        isometry = random_subspace_isometry(dB * dE, s, derive_stream(stream, 0))
    isometry = np.asarray(isometry, dtype=complex)
    if isometry.shape != (dB * dE, s):
        raise DomainError(f"isometry must have shape {(dB * dE, s)}, got {isometry.shape}")
    coeffs = random_pure_states(s, samples, derive_stream(stream, 1))
    states = coeffs @ isometry.T
    spectra = np.linalg.eigvalsh(reduced_state(states, (dB, dE), keep="B"))
    ent = np.array([entropy_of_spectrum(w) for w in spectra])
    floor = math.log2(dB) - (dB / dE) / LN2
    recs = [TrialRecord.make("entanglement", stream.master_seed, s, dB, dE, 0.0, e, floor) for e in ent]
    min_e = float(ent.min())
    summary = {
        "experiment": "entanglement", "dB": dB, "dE": dE, "subspace_dim": s, "samples": samples,
        "asymptotic_regime": dB >= dE >= 3,
        "min_entropy": min_e,
        "min_is_upper_bound_on_subspace_min": True,
        "mean_entropy": float(ent.mean()),
        "max_entropy": float(ent.max()),
        "implied_alpha": math.log2(dB) - min_e - (dB / dE) / LN2,
        "page_average_exact": page_entropy(dB, dE),
        "page_average_approx": page_entropy_approx(dB, dE),
        "alpha_free_floor": floor,
    }
    return ExperimentResult(recs, summary)


# Scaling of the minimal environment dimension ------------------------------


def _scaling_trial(seed_index, *, stream, d, dE, spec):
    # the net depends on (d, seed) only, the channel also on dE
    net_stream = SeededStream(stream.master_seed, stream.path + (d, 0, seed_index))
    ch_stream = SeededStream(stream.master_seed, stream.path + (d, 1, dE, seed_index))
    net = build_net_probabilistic(d, spec.epsilon, spec.net_constant_c, net_stream)
    ch = sample_uniform_ruc(d, dE, ch_stream)
    rep = certify_over_net(ch, net, spec)
    return rep.forward_deficit + rep.net_correction, rep.verdict == "pass"


SCALING_CHUNK = 5


def _pass_rate(d, dE, spec, target, seeds, stream, workers, records, record_timing):
    need = math.ceil(target * seeds - 1e-12)
    passed = evaluated = 0
    fn = functools.partial(_timed, functools.partial(_scaling_trial, stream=stream, d=d, dE=dE, spec=spec))
    for lo in range(0, seeds, SCALING_CHUNK):
        chunk = range(lo, min(seeds, lo + SCALING_CHUNK))
        for (stat, ok), ms in trial_map(fn, chunk, workers):
            passed += ok
            evaluated += 1
            records.append(TrialRecord.make("scaling", stream.master_seed, d, d, dE, spec.epsilon, stat,
                                            spec.epsilon / d, ms if record_timing else 0))
        remaining = seeds - evaluated
        if passed >= need or passed + remaining < need:
            break
    return passed >= need, passed, evaluated


def scaling_experiment(dims, eps, success_target, seeds_per_point, stream, *, c=10.0, max_de=8192,
                       workers=1, record_timing=False) -> ExperimentResult:
    """Smallest ``dE`` whose certification pass rate reaches ``success_target``, per ``d``.

    The search starts at ``ceil(d/(1+eps))``: below that ``N(phi)`` has rank
    under ``d/(1+eps)`` and its norm already exceeds ``(1+eps)/d``. It doubles
    until the target is met, then bisects. Seeds are evaluated in fixed
    chunks and stop once the decision is settled, so output does not depend
    on the worker count.
    """
    dims = list(dims)
    if dims != sorted(dims) or not dims or dims[0] < 1:
        raise DomainError("dims must be positive and sorted ascending")
    if not 0.0 < eps <= 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {eps}")
    if not 0.0 < success_target <= 1.0 or seeds_per_point < 1:
        raise DomainError("need 0 < success_target <= 1 and seeds_per_point >= 1")
    spec = CertificationSpec(eps, net_constant_c=c)
    records: list[TrialRecord] = []
    table: dict[int, int] = {}
    evaluations: dict[str, str] = {}

    def ok(d, dE):
        res, passed, n = _pass_rate(d, dE, spec, success_target, seeds_per_point, stream, workers, records,
                                    record_timing)
        evaluations[f"{d}:{dE}"] = f"{passed}/{n}"
        return res

    for d in dims:
        lo = math.ceil(d / (1.0 + eps)) - 1  # known failure (or zero)
        hi = lo + 1
        while not ok(d, hi):
            lo = hi
            hi *= 2
            if hi > max_de:
                raise ResourceError(f"no passing dE <= {max_de} for d={d}",
                                    partial=_scaling_summary(table, eps, success_target, seeds_per_point,
                                                             evaluations, records))
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(d, mid):
                hi = mid
            else:
                lo = mid
        table[d] = hi
    summary = _scaling_summary(table, eps, success_target, seeds_per_point, evaluations, records)
    return ExperimentResult(records, summary)


def _scaling_summary(table, eps, target, seeds, evaluations, records):
    ds = sorted(table)
    summary = {"experiment": "scaling", "epsilon": eps, "success_target": target, "seeds_per_point": seeds,
               "dims": " ".join(map(str, ds)),
               "minimal_dE": " ".join(str(table[d]) for d in ds)}
    for d in ds:
        summary[f"minimal_dE[{d}]"] = table[d]
    if len(ds) >= 2:
        x = np.log2(ds)
        slope, intercept = np.polyfit(x, [table[d] for d in ds], 1)
        summary["slope_vs_log2_d"] = float(slope)
        summary["intercept"] = float(intercept)
        ratios = [table[b] / table[a] for a, b in zip(ds, ds[1:])]
        summary["growth_ratios"] = " ".join(repr(r) for r in ratios)
        summary["dim_ratios"] = " ".join(repr(b / a) for a, b in zip(ds, ds[1:]))
        summary["non_decreasing"] = all(table[a] <= table[b] for a, b in zip(ds, ds[1:]))
        summary["sublinear"] = all(r < b / a for r, (a, b) in zip(ratios, zip(ds, ds[1:])))
    summary["evaluations"] = " ".join(f"{k}={v}" for k, v in evaluations.items())
    summary["records"] = len(records)
    return summary
