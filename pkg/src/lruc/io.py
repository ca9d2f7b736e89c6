"""Text formats for nets, channels, trial records and summaries.

Reals are written with 17 significant digits, which round-trips every
double exactly. Complex amplitudes are stored as interleaved ``re im`` pairs.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .channel import RandomUnitaryChannel
from .experiments import TrialRecord
from .spheregeo import EpsilonNet

CSV_COLUMNS = ["experiment", "seed", "dA", "dB", "dE", "epsilon", "statistic", "threshold", "exceeded",
               "wallTimeMs"]


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, (float, np.floating)):
        return fmt_real(v)
    return str(v)


def _complex_row(v: np.ndarray) -> str:
    pairs = np.column_stack([v.real, v.imag]).ravel()
    return " ".join(fmt_real(x) for x in pairs)


def _parse_row(line: str) -> np.ndarray:
    vals = np.array([float(x) for x in line.split()])
    return vals[0::2] + 1j * vals[1::2]


def _read_header(lines):
    header, body = {}, []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "=" in line:
                key, _, val = line[1:].partition("=")
                header[key.strip()] = val.strip()
        else:
            body.append(line)
    return header, body


def write_net(net: EpsilonNet, path) -> None:
    lines = [
        "# lruc-net v1",
        f"# d = {net.dim}",
        f"# epsilon = {fmt_real(net.epsilon)}",
        f"# kind = {net.kind}",
        f"# C = {fmt_real(net.constant_c)}",
        f"# seed = {fmt_value(net.seed)}",
        f"# points = {len(net.points)}",
    ]
    lines += [_complex_row(p) for p in net.points]
    Path(path).write_text("\n".join(lines) + "\n")


def read_net(path) -> EpsilonNet:
    header, body = _read_header(Path(path).read_text().splitlines())
    d = int(header["d"])
    pts = np.array([_parse_row(b) for b in body], dtype=complex).reshape(len(body), d)
    seed = None if header.get("seed", "none") == "none" else int(header["seed"])
    return EpsilonNet(d, float(header["epsilon"]), pts, header["kind"], float(header["C"]), seed)


def write_channel(ch: RandomUnitaryChannel, path) -> None:
    lines = [
        "# lruc-channel v1",
        f"# dA = {ch.dA}",
        f"# dE = {ch.dE}",
        f"# seed = {fmt_value(ch.seed)}",
        "# weights = " + " ".join(fmt_real(w) for w in ch.weights),
    ]
    for u in ch.unitaries:
        lines += [_complex_row(row) for row in u]
    Path(path).write_text("\n".join(lines) + "\n")


def read_channel(path) -> RandomUnitaryChannel:
    header, body = _read_header(Path(path).read_text().splitlines())
    dA, dE = int(header["dA"]), int(header["dE"])
    rows = np.array([_parse_row(b) for b in body], dtype=complex)
    weights = np.array([float(x) for x in header["weights"].split()])
    seed = None if header.get("seed", "none") == "none" else int(header["seed"])
    return RandomUnitaryChannel(rows.reshape(dE, dA, dA), weights, seed)


def write_records(records, path) -> None:
    """CSV with the fixed column order of :data:`CSV_COLUMNS`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([r.experiment, r.seed, r.dA, r.dB, r.dE, fmt_real(r.epsilon), fmt_real(r.statistic),
                        fmt_real(r.threshold), fmt_value(r.exceeded), r.wall_time_ms])


def read_records(path) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected CSV header")
    out = []
    for row in rows[1:]:
        exp, seed, dA, dB, dE, eps, stat, thr, exc, ms = row
        out.append(TrialRecord(exp, int(seed), int(dA), int(dB), int(dE), float(eps), float(stat), float(thr),
                               exc == "true", int(ms)))
    return out


def write_summary(summary: dict, path) -> None:
    """Flat ``key = value`` document in insertion order."""
    Path(path).write_text("".join(f"{k} = {fmt_value(v)}\n" for k, v in summary.items()))


def read_summary(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def parse_scalar(text: str):
    """Inverse of :func:`fmt_value` for scalar fields."""
    if text in ("true", "false"):
        return text == "true"
    if text == "none":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        x = float(text)
        return x if math.isfinite(x) or text.lower() in ("inf", "-inf", "nan") else text
    except ValueError:
        return text
