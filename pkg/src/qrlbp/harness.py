"""Seeded Monte Carlo frame-error evaluation and CSV output."""

from __future__ import annotations

import csv
import io
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .bp import BpConfig, decode_flooding, decode_svns, random_schedule
from .channel import L_MAX, NoiseParams, llr, sample, syndrome, trial_rng
from .codes import CssCode, Outcome, classify_binary, classify_quaternary
from .decimation import GdConfig, decode_gd, decode_quat_gd
from .fast import decode_fast, decode_quat_fast
from .graph import build_adjacency
from .quaternary import DepolPrior, decode_quat
from .rl import QTable, greedy_schedule, load_qtable

BINARY_DECODERS = ("bp", "svns", "rl-svns", "rl-svns-fast", "bpgd", "rl-svns-gd")
QUAT_DECODERS = ("qbp", "qsvns", "rl-qsvns", "rl-qsvns-fast", "qbpgd", "rl-qsvns-gd")
DECODERS = BINARY_DECODERS + QUAT_DECODERS
CSV_COLUMNS = (
    "code", "decoder", "p", "frames", "errors", "logical_errors", "nonconv",
    "fer", "fer_lo", "fer_hi", "avg_iters", "avg_decimations",
)
Z95 = 1.959963984540054


def is_quaternary(decoder: str) -> bool:
    return decoder in QUAT_DECODERS


def needs_qtable(decoder: str) -> bool:
    return decoder.startswith("rl-")


def is_gd(decoder: str) -> bool:
    return decoder.endswith("gd")


def wilson(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    # the bounds are exactly 0 and 1 at the ends; rounding would leave dust
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


@dataclass
class ExperimentSpec:
    code: CssCode
    decoder: str
    grid: tuple[float, ...]
    frames: int = 1000
    target_errors: int | None = None
    seed: int = 0
    max_iters: int = 100
    qtable: QTable | str | Path | None = None
    threads: int = 1
    llr_clip: float = L_MAX
    chunk: int = 256

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}; expected one of {DECODERS}")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.target_errors is not None and self.target_errors < 1:
            raise ValueError("target_errors must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        self.grid = tuple(float(p) for p in self.grid)
        kind = "depolarizing" if is_quaternary(self.decoder) else "bitflip"
        for p in self.grid:
            NoiseParams(kind, p)
        if isinstance(self.qtable, (str, Path)):
            self.qtable = load_qtable(self.qtable)
        if needs_qtable(self.decoder):
            if self.qtable is None:
                raise ValueError(f"decoder {self.decoder} needs a Q-table")
            want = "quat" if is_quaternary(self.decoder) else "binary"
            if self.qtable.variant != want:
                raise ValueError(
                    f"decoder {self.decoder} needs a {want!r} Q-table, got {self.qtable.variant!r}"
                )
            if self.qtable.n != self.code.n:
                raise ValueError(f"Q-table is for n={self.qtable.n}, code has n={self.code.n}")

    @property
    def channel(self) -> str:
        return "depolarizing" if is_quaternary(self.decoder) else "bitflip"


@dataclass
class PointSummary:
    p: float
    frames: int
    errors: int
    logical_errors: int
    nonconv: int
    fer: float
    fer_lo: float
    fer_hi: float
    avg_iters: float
    avg_decimations: float | None = None
    outcomes: list = field(default_factory=list, repr=False)

    @property
    def converged_ok(self) -> int:
        return self.frames - self.errors

    @property
    def pct_nonconvergence(self) -> float:
        return 100.0 * self.nonconv / self.errors if self.errors else 0.0

    def reconciles(self) -> bool:
        return self.errors == self.logical_errors + self.nonconv and 0 <= self.errors <= self.frames


# ---------------------------------------------------------------------------
# per-frame pipeline


def make_frame_decoder(spec: ExperimentSpec, p: float) -> Callable[[int], tuple]:
    """Return ``trial -> (outcome kind, iterations, decimations)`` for one point."""
    code, name = spec.code, spec.decoder
    cfg = BpConfig(spec.max_iters, spec.llr_clip)
    gd_cfg = GdConfig(spec.max_iters, "greedy" if needs_qtable(name) else "flooding", llr_clip=spec.llr_clip)
    q = spec.qtable
    params = NoiseParams(spec.channel, p)
    adj_a = build_adjacency(code.h_a)

    if is_quaternary(name):
        adj_b = build_adjacency(code.h_b)
        prior = DepolPrior.from_p(p)

        def run(trial: int):
            rng = trial_rng(spec.seed, trial)
            frame = sample(params, code.n, rng)
            syn = syndrome(code, frame)
            dec = 0
            if name == "qbp":
                r = decode_quat(adj_a, adj_b, syn, prior, cfg, "flooding")
            elif name == "qsvns":
                r = decode_quat(adj_a, adj_b, syn, prior, cfg, "random", rng=rng)
            elif name == "rl-qsvns":
                r = decode_quat(adj_a, adj_b, syn, prior, cfg, "greedy", q=q)
            elif name == "rl-qsvns-fast":
                r = decode_quat_fast(adj_a, adj_b, q, syn, prior, cfg)
            else:
                r = decode_quat_gd(adj_a, adj_b, syn, prior, gd_cfg, q)
                dec = r.decimations
            out = classify_quaternary(code, (frame.e_a, frame.e_b), r.e_hat, r.converged, r.iterations, dec)
            return out.kind, r.iterations, dec

        return run

    mu = llr(p)

    def run(trial: int):
        rng = trial_rng(spec.seed, trial)
        frame = sample(params, code.n, rng)
        (syn,) = syndrome(code, frame)
        dec = 0
        if name == "bp":
            r = decode_flooding(adj_a, syn, mu, cfg)
        elif name == "svns":
            r = decode_svns(adj_a, syn, mu, cfg, random_schedule(rng))
        elif name == "rl-svns":
            r = decode_svns(adj_a, syn, mu, cfg, greedy_schedule(q))
        elif name == "rl-svns-fast":
            r = decode_fast(adj_a, q, syn, mu, cfg)
        else:
            r = decode_gd(adj_a, syn, mu, gd_cfg, q)
            dec = r.decimations
        out = classify_binary(code, frame.e_a, r.e_hat, r.converged, r.iterations, dec)
        return out.kind, r.iterations, dec

    return run


_WORKER: dict = {}


def _init_worker(spec: ExperimentSpec, p: float) -> None:
    _WORKER["run"] = make_frame_decoder(spec, p)


def _run_range(bounds: tuple[int, int]) -> list[tuple]:
    run = _WORKER["run"]
    return [run(t) for t in range(*bounds)]


def _chunks(start: int, stop: int, size: int):
    for lo in range(start, stop, size):
        yield lo, min(lo + size, stop)


def run_trials(spec: ExperimentSpec, p: float) -> list[tuple]:
    """Per-trial records in trial order; ``target_errors`` truncates right
    after the trial producing the N-th failure, independent of chunking."""
    target = spec.target_errors
    step = spec.chunk * spec.threads if target is not None else spec.frames
    records: list[tuple] = []
    pool = None
    if spec.threads > 1:
        pool = ProcessPoolExecutor(spec.threads, initializer=_init_worker, initargs=(spec, p))
    else:
        _init_worker(spec, p)
    try:
        for lo, hi in _chunks(0, spec.frames, step):
            parts = list(_chunks(lo, hi, max(1, -(-(hi - lo) // spec.threads))))
            if pool is not None:
                for res in pool.map(_run_range, parts):
                    records.extend(res)
            else:
                for part in parts:
                    records.extend(_run_range(part))
            if target is not None:
                fails = 0
                for idx, rec in enumerate(records):
                    fails += rec[0] is not Outcome.CONVERGED
                    if fails >= target:
                        return records[: idx + 1]
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def summarize(p: float, records: list[tuple], gd: bool) -> PointSummary:
    frames = len(records)
    logical = sum(r[0] is Outcome.LOGICAL_ERROR for r in records)
    nonconv = sum(r[0] is Outcome.NONCONVERGENCE for r in records)
    errors = logical + nonconv
    lo, hi = wilson(errors, frames)
    return PointSummary(
        p=p,
        frames=frames,
        errors=errors,
        logical_errors=logical,
        nonconv=nonconv,
        fer=errors / frames if frames else 0.0,
        fer_lo=lo,
        fer_hi=hi,
        avg_iters=sum(r[1] for r in records) / frames if frames else 0.0,
        avg_decimations=(sum(r[2] for r in records) / frames if frames else 0.0) if gd else None,
        outcomes=[r[0] for r in records],
    )


def run_point(spec: ExperimentSpec, p: float) -> PointSummary:
    return summarize(p, run_trials(spec, p), is_gd(spec.decoder))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def csv_rows(spec: ExperimentSpec, points: list[PointSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in points:
        w.writerow([
            spec.code.name, spec.decoder, _fmt(s.p), s.frames, s.errors, s.logical_errors,
            s.nonconv, _fmt(s.fer), _fmt(s.fer_lo), _fmt(s.fer_hi), _fmt(s.avg_iters),
            _fmt(s.avg_decimations),
        ])
    return buf.getvalue()


def run_grid(spec: ExperimentSpec, out: str | Path | None = None, log=sys.stderr) -> list[PointSummary]:
    grid = sorted(set(spec.grid))
    if not grid:
        raise ValueError("noise grid is empty")
    points = []
    for p in grid:
        s = run_point(spec, p)
        points.append(s)
        if log is not None:
            print(
                f"[eval] code={spec.code.name} decoder={spec.decoder} p={p:g} frames={s.frames} "
                f"errors={s.errors} fer={s.fer:.4g} avg_iters={s.avg_iters:.3f}",
                file=log,
                flush=True,
            )
    for a, b in zip(points, points[1:]):
        if b.fer_hi < a.fer_lo:
            warnings.warn(f"FER drops from p={a.p:g} to p={b.p:g} beyond the 95% intervals", stacklevel=2)
    if out is not None:
        Path(out).write_text(csv_rows(spec, points))
    return points
