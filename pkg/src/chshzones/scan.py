"""Seeded Monte Carlo scans over measurement settings.

Random numbers come from the Philox-4x64 counter-based generator shipped with
numpy.  Setting ``i`` of a scan with seed ``s`` is::

    Philox(key=s, counter=i).random(4) * angle_span

i.e. exactly one Philox block per setting, so any contiguous index range can
be generated independently and the result never depends on how the range is
split between workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .measures import batch_functionals
from .quantum import DomainError, MeasurementSetting, StateParam, as_state
from .scenario import zones_of

BLOCK = 1 << 16
DEFAULT_SPAN = math.pi
EMIT_KINDS = ("points", "zone3_points", "correlators_e_violating", "correlators_c_violating")
POINT_HEADER = ("chsh", "chsh_e", "zone")
CORRELATOR_HEADER = ("e00", "e01", "e10", "e11", "chsh", "chsh_e")
SUMMARY_FIELDS = ("alpha", "samples", "seed", "zone1", "zone2", "zone3", "zone4")


class ScanIOError(OSError):
    pass


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def sample_angles(seed: int, start: int, count: int, span: float = DEFAULT_SPAN) -> np.ndarray:
    """Angles of settings ``start .. start+count-1`` as a (count, 4) array."""
    bitgen = np.random.Philox(key=_check_seed(seed), counter=start)
    return np.random.Generator(bitgen).random(4 * count).reshape(count, 4) * span


def sample_setting(seed: int, index: int, alpha=math.pi / 4,
                   span: float = DEFAULT_SPAN) -> MeasurementSetting:
    return MeasurementSetting.from_angles(sample_angles(seed, index, 1, span)[0], alpha)


@dataclass(frozen=True)
class ScanConfig:
    alpha: StateParam = StateParam(math.pi / 4)
    samples: int = 1_000_000
    seed: int = 0
    workers: int = 1
    emit: frozenset = frozenset()
    emit_every: int = 1
    emit_dir: Path | None = None
    angle_span: float = DEFAULT_SPAN

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_state(self.alpha))
        object.__setattr__(self, "emit", frozenset(self.emit))
        _check_seed(self.seed)
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if self.emit_every < 1:
            raise DomainError("emit_every must be >= 1")
        unknown = self.emit - set(EMIT_KINDS)
        if unknown:
            raise DomainError(f"unknown emit kinds: {sorted(unknown)}")
        if not 0 < self.angle_span <= 2 * math.pi:
            raise DomainError("angle_span must lie in (0, 2*pi]")


@dataclass(frozen=True)
class ScanSummary:
    alpha: float
    samples: int
    seed: int
    counts: tuple[int, int, int, int]
    max_chsh: float = field(default=float("nan"), compare=False)
    max_chsh_zone3: float = field(default=float("nan"), compare=False)

    @property
    def fractions(self) -> tuple[float, float, float, float]:
        return tuple(c / self.samples for c in self.counts)

    def row(self) -> dict:
        fr = self.fractions
        return {"alpha": f"{self.alpha:.6f}", "samples": str(self.samples),
                "seed": str(self.seed),
                **{f"zone{k + 1}": f"{fr[k]:.6f}" for k in range(4)}}


@dataclass
class ScanResult:
    summary: ScanSummary
    emitted: dict = field(default_factory=dict)  # kind -> array of rows
    files: dict = field(default_factory=dict)  # kind -> Path


def _scan_block(args):
    seed, start, count, alpha, span, emit, every = args
    ang = sample_angles(seed, start, count, span)
    corr, s1, t11 = batch_functionals(ang[:, 0], ang[:, 1], ang[:, 2], ang[:, 3], alpha)
    chsh = np.abs(s1)
    zone = zones_of(chsh, t11)
    counts = np.bincount(zone, minlength=5)[1:].astype(np.int64)
    z3 = zone == 3
    out = {"counts": counts,
           "max_chsh": float(chsh.max()),
           "max_chsh_zone3": float(chsh[z3].max()) if z3.any() else -math.inf}
    if emit:
        keep = (np.arange(start, start + count) % every) == 0
        pts = np.column_stack([chsh, t11, zone])
        cor = np.column_stack([corr.T, chsh, t11])
        if "points" in emit:
            out["points"] = pts[keep]
        if "zone3_points" in emit:
            out["zone3_points"] = pts[keep & z3]
        if "correlators_e_violating" in emit:
            out["correlators_e_violating"] = cor[keep & (t11 > 0)]
        if "correlators_c_violating" in emit:
            out["correlators_c_violating"] = cor[keep & (chsh > 2)]
    return out


def _blocks(cfg: ScanConfig):
    for start in range(0, cfg.samples, BLOCK):
        yield (cfg.seed, start, min(BLOCK, cfg.samples - start), cfg.alpha.alpha,
               cfg.angle_span, tuple(sorted(cfg.emit)), cfg.emit_every)


def _run_blocks(cfg: ScanConfig):
    if cfg.workers == 1:
        return [_scan_block(b) for b in _blocks(cfg)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_scan_block, _blocks(cfg)))


def scan(cfg: ScanConfig) -> ScanResult:
    """Classify ``cfg.samples`` random settings under class 1.

    Emitted point sets are kept every ``emit_every``-th global index and, when
    ``emit_dir`` is set, written there as CSV.
    """
    parts = _run_blocks(cfg)
    counts = np.sum([p["counts"] for p in parts], axis=0)
    summary = ScanSummary(cfg.alpha.alpha, cfg.samples, cfg.seed,
                          tuple(int(c) for c in counts),
                          max(p["max_chsh"] for p in parts),
                          max(p["max_chsh_zone3"] for p in parts))
    result = ScanResult(summary)
    for kind in sorted(cfg.emit):
        result.emitted[kind] = np.concatenate([p[kind] for p in parts])
    if cfg.emit_dir is not None:
        for kind, rows in result.emitted.items():
            path = Path(cfg.emit_dir) / f"{kind}.csv"
            header = POINT_HEADER if kind in ("points", "zone3_points") else CORRELATOR_HEADER
            write_rows(path, header, rows)
            result.files[kind] = path
    return result


def format_rows(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        cells = [repr(float(v)) for v in r]
        if header[-1] == "zone":
            cells[-1] = str(int(r[-1]))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def write_rows(path, header, rows) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(format_rows(header, rows))
    except OSError as exc:
        raise ScanIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_rows(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.array([[float(v) for v in row] for row in reader])


def format_summaries(summaries, fmt: str = "csv") -> str:
    rows = [s.row() for s in summaries]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    lines = []
    for row in rows:
        lines.extend(f"{k:<8} {row[k]}" for k in SUMMARY_FIELDS)
        lines.append("")
    return "\n".join(lines)


def alpha_sweep(alphas, samples: int, seed: int, workers: int = 1,
                angle_span: float = DEFAULT_SPAN) -> list[ScanSummary]:
    """One scan per alpha, all drawing the same angle stream."""
    return [scan(ScanConfig(alpha=a, samples=samples, seed=seed, workers=workers,
                            angle_span=angle_span)).summary
            for a in alphas]


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
