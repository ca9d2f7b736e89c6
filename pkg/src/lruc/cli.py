"""Command-line harness: ``lruc [global flags] <experiment> [flags]``.

Configuration is a flat ``key = value`` file; every key has a matching flag
(``net_constant_c`` <-> ``--net-constant-c``) and flags win over the file.
Each run writes ``<experiment>.csv`` and ``<experiment>.summary.txt`` into
the output directory.

Exit status: 0 complete or certified, 1 certification failed, 2 bad
configuration, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments as ex
from .certify import CertificationSpec, certify_over_net, net_deficits
from .channel import identity_channel, pauli_channel, sample_uniform_ruc
from .errors import ConfigError, LrucError, ResourceError
from .io import fmt_value, read_channel, read_net, write_channel, write_net, write_records, write_summary
from .randgen import SeededStream, derive_stream, random_pure_states
from .spheregeo import (
    COVERING_NET,
    MEASURE_NET,
    build_covering_net,
    build_net_probabilistic,
    chernoff_floor_check,
    empirical_shatter_search,
    height_for_measure,
    verify_net_against_caps,
)

EXPERIMENTS = ("certify", "net-build", "net-verify", "lde", "cramer", "concentration", "entanglement", "scaling",
               "chernoff", "shatter-search")
OUT_ENV = "LRUC_OUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    experiment: str = ""
    seed: int = 0
    out: str = ""
    workers: int = 1
    dA: int = 8
    dB: int = 8
    dE: int = 400
    epsilon: float = 0.5
    trials: int = 1000
    samples: int = 1000
    rank: int = 1
    subspace_dim: int = 64
    net_kind: str = MEASURE_NET
    net_constant_c: float | None = None
    covering_delta: float | None = None
    adversarial_restarts: int | None = None
    require_conjugate: bool = False
    channel: str = "haar"
    net_file: str | None = None
    dims: list = field(default_factory=lambda: [8, 16, 32])
    success_target: float = 0.9
    seeds_per_point: int = 20
    max_de: int = 8192
    points: int = 6
    t_max: int = 128
    epsilons: list = field(default_factory=lambda: [0.125, 0.25, 0.5, 1.0])
    explicit_unitary: bool = False
    record_timing: bool = False


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_LIST_FIELDS = {"dims": int, "epsilons": float}
# echoed in summaries; worker count and output location never affect results
_RESULT_KEYS = [k for k in _FIELDS if k not in ("out", "workers")]


def flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def _coerce(key: str, raw):
    if raw is None:
        return None
    if key in _LIST_FIELDS:
        items = raw if isinstance(raw, (list, tuple)) else str(raw).replace(",", " ").split()
        try:
            return [_LIST_FIELDS[key](x) for x in items]
        except ValueError:
            raise ConfigError(key, f"cannot parse list {raw!r}") from None
    f = _FIELDS[key]
    typ = f.type if isinstance(f.type, str) else f.type.__name__
    text = str(raw).strip()
    if text == "none" and "None" in typ:
        return None
    try:
        if typ.startswith("int"):
            return int(text)
        if typ.startswith("float"):
            return float(text)
        if typ.startswith("bool"):
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r} as {typ}") from None
    return text


def parse_config_text(text: str) -> dict:
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", "expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(key, "unknown configuration key")
        values[key] = _coerce(key, val.strip())
    return values


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical encoding: every key in declaration order."""
    lines = []
    for key in _FIELDS:
        v = getattr(cfg, key)
        if key in _LIST_FIELDS:
            v = " ".join(fmt_value(x) for x in v)
        lines.append(f"{key} = {fmt_value(v)}")
    return "\n".join(lines) + "\n"


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every field the chosen experiment reads; fill experiment-specific defaults."""
    e = cfg.experiment
    if e not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {e!r}; choose from {', '.join(EXPERIMENTS)}")

    def need(cond, key, msg):
        if not cond:
            raise ConfigError(key, msg)

    need(0 <= cfg.seed < 2 ** 64, "seed", "must be a 64-bit unsigned integer")
    need(cfg.workers >= 1, "workers", "must be at least 1")
    for key in ("dA", "dB", "dE", "trials", "samples", "rank", "subspace_dim", "seeds_per_point", "points",
                "t_max", "max_de"):
        need(getattr(cfg, key) >= 1, key, "must be a positive integer")
    need(cfg.net_kind in (MEASURE_NET, COVERING_NET), "net_kind", f"must be {MEASURE_NET} or {COVERING_NET}")
    if cfg.net_constant_c is None:
        cfg.net_constant_c = 1.0 if e == "concentration" else 10.0
    need(cfg.net_constant_c > 0, "net_constant_c", "must be positive")
    if cfg.adversarial_restarts is None:
        cfg.adversarial_restarts = 4 if e == "concentration" else 0
    need(cfg.adversarial_restarts >= 0, "adversarial_restarts", "must be nonnegative")
    if cfg.covering_delta is not None:
        need(0 < cfg.covering_delta <= 2, "covering_delta", "must lie in (0, 2]")

    if e in ("certify", "net-build", "net-verify", "scaling"):
        need(0 < cfg.epsilon <= 0.5, "epsilon", "must lie in (0, 1/2] (randomizing maps need eps <= 1/2)")
    elif e == "lde":
        need(0 < cfg.epsilon < 1, "epsilon", "must lie in (0, 1)")
        need(cfg.rank <= cfg.dA, "rank", "must not exceed dA")
    elif e in ("cramer", "concentration"):
        need(0 < cfg.epsilon <= 1, "epsilon", "must lie in (0, 1]")
    elif e == "entanglement":
        need(cfg.subspace_dim <= cfg.dB * cfg.dE, "subspace_dim", "must not exceed dB*dE")
    if e == "certify" and cfg.channel not in ("haar", "pauli", "identity"):
        need(Path(cfg.channel).is_file(), "channel", "must be haar, pauli, identity or a channel file")
    if e in ("certify", "net-verify") and cfg.net_file is not None:
        need(Path(cfg.net_file).is_file(), "net_file", "file does not exist")
    if e == "scaling":
        need(len(cfg.dims) >= 1 and all(d >= 1 for d in cfg.dims), "dims", "must be positive integers")
        need(list(cfg.dims) == sorted(cfg.dims), "dims", "must be sorted ascending")
        need(0 < cfg.success_target <= 1, "success_target", "must lie in (0, 1]")
    if e == "chernoff":
        need(all(0 < x <= 1 for x in cfg.epsilons), "epsilons", "must lie in (0, 1]")
    if not cfg.out:
        cfg.out = os.environ.get(OUT_ENV, "lruc-out")
    return cfg


def _add_globals(p, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", default=d, help="master seed (64-bit unsigned)")
    p.add_argument("--out", default=d, help=f"output directory (default ${OUT_ENV} or ./lruc-out)")
    p.add_argument("--workers", default=d, help="worker processes; never changes results")
    p.add_argument("--config", default=d, help="flat key = value configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lruc", description="Random unitary channel experiments")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        _add_globals(sp, suppress=True)
        for key in _FIELDS:
            if key in ("experiment", "seed", "out", "workers"):
                continue
            sp.add_argument(flag_name(key), dest=key, default=argparse.SUPPRESS)
    return parser


def load_config(argv=None, path=None, **overrides) -> ExperimentConfig:
    """Merge defaults, an optional config file, then flags; validate the result.

    ``argv`` is parsed with the CLI grammar. ``path`` and keyword overrides
    serve programmatic callers.
    """
    flags = {}
    if argv is not None:
        ns = vars(build_parser().parse_args(argv))
        path = ns.pop("config", None) or path
        flags = {k: v for k, v in ns.items() if v is not None}
    values = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from None
    for key, raw in {**flags, **overrides}.items():
        if key not in _FIELDS:
            raise ConfigError(key, "unknown configuration key")
        values[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    return validate(ExperimentConfig(**values))


# Experiment dispatch ---------------------------------------------------------


def _certify(cfg, root):
    if cfg.channel == "pauli":
        ch = pauli_channel()
    elif cfg.channel == "identity":
        ch = identity_channel(cfg.dA)
    elif cfg.channel == "haar":
        ch = sample_uniform_ruc(cfg.dA, cfg.dE, derive_stream(root, 0))
    else:
        ch = read_channel(cfg.channel)
    net = _net_for(cfg, ch.dA, root)
    spec = CertificationSpec(cfg.epsilon, net.kind, cfg.net_constant_c, cfg.adversarial_restarts,
                             cfg.require_conjugate)
    rep = certify_over_net(ch, net, spec, derive_stream(root, 2))
    fwd, _ = net_deficits(ch, net.points)
    recs = [ex.TrialRecord.make("certify", cfg.seed, ch.dA, ch.dB, ch.dE, cfg.epsilon, f + rep.net_correction,
                                cfg.epsilon / ch.dB) for f in fwd]
    summary = {
        "verdict": rep.verdict,
        "guarantee_kind": rep.guarantee_kind,
        "dA": ch.dA, "dB": ch.dB, "dE": ch.dE,
        "net_kind": net.kind,
        "net_points": rep.net_points,
        "net_correction": rep.net_correction,
        "forward_deficit": rep.forward_deficit,
        "forward_threshold": cfg.epsilon / ch.dB,
        "forward_pass": rep.forward_pass,
        "conjugate_deficit": rep.conjugate_deficit,
        "conjugate_threshold": cfg.epsilon / ch.dE,
        "conjugate_pass": rep.conjugate_pass,
        "require_conjugate": cfg.require_conjugate,
        "adversarial_value": rep.adversarial_value,
        "worst_state": " ".join(fmt_value(x) for x in np.column_stack([rep.worst_state.real,
                                                                      rep.worst_state.imag]).ravel()),
    }
    return ex.ExperimentResult(recs, summary), {"channel.txt": ch}, rep.verdict == "pass"


def _net_for(cfg, d, root):
    if cfg.net_file is not None:
        return read_net(cfg.net_file)
    if cfg.net_kind == COVERING_NET:
        delta = cfg.covering_delta if cfg.covering_delta is not None else cfg.epsilon / (2 * d)
        return build_covering_net(d, delta, derive_stream(root, 1))
    return build_net_probabilistic(d, cfg.epsilon, cfg.net_constant_c, derive_stream(root, 1))


def _net_build(cfg, root):
    net = _net_for(cfg, cfg.dA, root)
    summary = {"dim": net.dim, "kind": net.kind, "epsilon": net.epsilon, "net_constant_c": net.constant_c,
               "points": len(net.points)}
    return ex.ExperimentResult([], summary), {"net.txt": net}, True


def _net_verify(cfg, root):
    net = _net_for(cfg, cfg.dA, root)
    h = height_for_measure(cfg.epsilon, net.dim)
    stream = derive_stream(root, 3)
    misses = verify_net_against_caps(net, cfg.epsilon, cfg.trials, stream)
    # same centers as the miss count: the stream is replayed
    centers = random_pure_states(net.dim, cfg.trials, stream)
    reach = 1.0 - np.max(np.real(centers.conj() @ net.points.T), axis=1)
    recs = [ex.TrialRecord.make("net-verify", cfg.seed, net.dim, net.dim, 0, cfg.epsilon, r, h) for r in reach]
    summary = {"dim": net.dim, "kind": net.kind, "net_points": len(net.points), "cap_height": h,
               "caps": cfg.trials, "misses": misses, "miss_fraction": misses / cfg.trials,
               "guarantee": "statistical lower bound on net quality"}
    return ex.ExperimentResult(recs, summary), {}, True


def _chernoff(cfg, root):
    recs, worst = [], 1.0
    all_pass = True
    for eps in cfg.epsilons:
        for t in range(1, cfg.t_max + 1):
            prob, ok = chernoff_floor_check(t, eps)
            if t * eps >= 8:
                worst = min(worst, prob)
                all_pass &= ok
                recs.append(ex.TrialRecord.make("chernoff", cfg.seed, t, 0, 0, eps, prob, 0.5))
    summary = {"t_max": cfg.t_max, "epsilons": " ".join(fmt_value(e) for e in cfg.epsilons),
               "checked_points": len(recs), "min_probability": worst, "all_pass": all_pass}
    return ex.ExperimentResult(recs, summary), {}, True


def _shatter(cfg, root):
    best = empirical_shatter_search(cfg.dA, cfg.points, cfg.samples, root)
    claim = 2 * cfg.dA + 1
    rec = ex.TrialRecord.make("shatter-search", cfg.seed, cfg.dA, cfg.dA, 0, 0.0, best, claim)
    summary = {"d": cfg.dA, "m": cfg.points, "samples": cfg.samples, "largest_shattered": best,
               "claimed_vc_dim": claim, "is_lower_bound": True}
    return ex.ExperimentResult([rec], summary), {}, True


def dispatch(cfg: ExperimentConfig):
    root = SeededStream(cfg.seed)
    w, t = cfg.workers, cfg.record_timing
    e = cfg.experiment
    if e == "certify":
        return _certify(cfg, root)
    if e == "net-build":
        return _net_build(cfg, root)
    if e == "net-verify":
        return _net_verify(cfg, root)
    if e == "chernoff":
        return _chernoff(cfg, root)
    if e == "shatter-search":
        return _shatter(cfg, root)
    if e == "lde":
        res = ex.lde_experiment(cfg.dA, cfg.dE, cfg.rank, cfg.epsilon, cfg.trials, root, workers=w,
                                record_timing=t)
    elif e == "cramer":
        res = ex.cramer_tail_experiment(cfg.dB, cfg.dE, cfg.epsilon, cfg.trials, root,
                                        explicit_unitary=cfg.explicit_unitary, workers=w, record_timing=t)
    elif e == "concentration":
        res = ex.concentration_experiment(cfg.dB, cfg.dE, cfg.epsilon, cfg.trials, cfg.net_constant_c, root,
                                          restarts=max(1, cfg.adversarial_restarts), workers=w,
                                          record_timing=t)
    elif e == "entanglement":
        res = ex.entanglement_experiment(cfg.dB, cfg.dE, cfg.subspace_dim, cfg.samples, root)
    else:
        res = ex.scaling_experiment(cfg.dims, cfg.epsilon, cfg.success_target, cfg.seeds_per_point, root,
                                    c=cfg.net_constant_c, max_de=cfg.max_de, workers=w, record_timing=t)
    return res, {}, True


def _write_outputs(cfg, result, artifacts):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_records(result.records, out / f"{cfg.experiment}.csv")
    summary = {f"config.{k}": _echo(getattr(cfg, k)) for k in _RESULT_KEYS}
    summary.update(result.summary)
    write_summary(summary, out / f"{cfg.experiment}.summary.txt")
    for name, obj in artifacts.items():
        (write_net if name == "net.txt" else write_channel)(obj, out / name)


def _echo(v):
    return " ".join(fmt_value(x) for x in v) if isinstance(v, list) else v


def run(cfg: ExperimentConfig) -> int:
    """Run a validated configuration and write its outputs; return the exit status."""
    try:
        result, artifacts, ok = dispatch(cfg)
    except ResourceError as exc:
        partial = exc.partial if isinstance(exc.partial, dict) else {}
        summary = {"status": "resource_error", "message": str(exc), "estimate": exc.estimate, **partial}
        _write_outputs(cfg, ex.ExperimentResult([], summary), {})
        print(f"lruc: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    _write_outputs(cfg, result, artifacts)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(f"lruc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status = run(cfg)
    except ConfigError as exc:
        print(f"lruc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LrucError as exc:
        print(f"lruc: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(Path(cfg.out) / f"{cfg.experiment}.summary.txt")
    return status


if __name__ == "__main__":
    sys.exit(main())
