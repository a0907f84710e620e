"""Finite-statistics layer: per-run records (x, y, a, b), run-log I/O and
plug-in estimates of the functionals.

Run-log format: optional ``# key=value`` metadata lines, then the exact header
``x,y,a,b`` and one LF-terminated record per line.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .measures import ContextQuad, chsh_variants, entropic_variants
from .quantum import DomainError, JointDistribution, MeasurementSetting, joint_distribution
from .scenario import classify_zone

HEADER = "x,y,a,b"
FIELDS = ("x", "y", "a", "b")
JACKKNIFE_GROUPS = 10


class RunLogError(ValueError):
    def __init__(self, line: int, content: str, reason: str):
        super().__init__(f"line {line}: {reason}: {content!r}")
        self.line = line
        self.content = content
        self.reason = reason


class RunRecord(NamedTuple):
    x: int
    y: int
    a: int
    b: int


@dataclass
class RunLog:
    bits: np.ndarray  # (n, 4) uint8 columns x, y, a, b
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1, 4)
        if np.any(self.bits > 1):
            raise DomainError("run records must be bits")

    def __len__(self) -> int:
        return len(self.bits)

    def __eq__(self, other) -> bool:
        return (isinstance(other, RunLog) and self.metadata == other.metadata
                and np.array_equal(self.bits, other.bits))

    @property
    def records(self) -> list[RunRecord]:
        return [RunRecord(*map(int, r)) for r in self.bits]

    @classmethod
    def from_records(cls, records, metadata=None) -> "RunLog":
        return cls(np.array([tuple(r) for r in records], dtype=np.uint8).reshape(-1, 4),
                   dict(metadata or {}))


def simulate_runs(s: MeasurementSetting, n: int, seed: int) -> RunLog:
    """``n`` runs with uniform inputs and Born-rule outcomes for context (x, y)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    th = s.angles
    cdf = np.empty((4, 4))
    for x in (0, 1):
        for y in (0, 1):
            cdf[2 * x + y] = np.cumsum(joint_distribution(th[x], th[2 + y], s.state).p)
    cdf[:, 3] = 1.0
    xy = rng.integers(0, 4, size=n)
    u = rng.random(n)
    cell = (u[:, None] >= cdf[xy, :3]).sum(axis=1)
    bits = np.column_stack([xy >> 1, xy & 1, cell >> 1, cell & 1]).astype(np.uint8)
    meta = {"alpha": repr(s.alpha), "angles": ",".join(repr(a) for a in th),
            "seed": str(int(seed))}
    return RunLog(bits, meta)


def emit_runs(log: RunLog, stream=None) -> str | None:
    """Write ``log`` to ``stream`` (text mode), or return the text when no stream."""
    lines = [f"# {k}={v}" for k, v in log.metadata.items()]
    lines.append(HEADER)
    body = "\n".join(lines) + "\n"
    if len(log):
        digits = (log.bits + ord("0")).astype(np.uint8)
        rows = np.full((len(log), 8), ord(","), dtype=np.uint8)
        rows[:, 0:8:2] = digits
        rows[:, 7] = ord("\n")
        body += rows.tobytes().decode("ascii")
    if stream is None:
        return body
    stream.write(body)
    return None


def ingest_runs(source) -> RunLog:
    """Parse a run log from a text/byte stream or a string."""
    if isinstance(source, (str, bytes)):
        source = io.StringIO(source.decode() if isinstance(source, bytes) else source)
    metadata: dict = {}
    seen_header = False
    rows = []
    lineno = 0
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode()
        line = raw.rstrip("\n")
        if not seen_header:
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if not sep:
                    raise RunLogError(lineno, line, "metadata must be key=value")
                metadata[key.strip()] = value.strip()
                continue
            if line != HEADER:
                raise RunLogError(lineno, line, f"expected header {HEADER!r}")
            seen_header = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise RunLogError(lineno, line, f"expected 4 fields, got {len(parts)}")
        rec = []
        for name, p in zip(FIELDS, parts):
            if p not in ("0", "1"):
                raise RunLogError(lineno, line, f"field {name} out of range")
            rec.append(int(p))
        rows.append(rec)
    if not seen_header:
        raise RunLogError(max(lineno, 1), "", "empty run log")
    return RunLog(np.array(rows, dtype=np.uint8).reshape(-1, 4), metadata)


@dataclass(frozen=True)
class EmpiricalEstimate:
    distributions: dict  # (x, y) -> JointDistribution
    counts: dict  # (x, y) -> int
    chsh: float
    chsh_e: float
    signed_s1: float
    zone: int
    jackknife_se: float
    jackknife_bias: float


def _cell_counts(bits: np.ndarray) -> np.ndarray:
    code = (bits[:, 0].astype(np.int64) << 3) | (bits[:, 1] << 2) | (bits[:, 2] << 1) | bits[:, 3]
    return np.bincount(code, minlength=16).reshape(4, 4)


def _quad(counts: np.ndarray) -> ContextQuad:
    totals = counts.sum(axis=1)
    ns_tol = max(5.0 / math.sqrt(totals.min()), 1e-9)
    dists = [JointDistribution(tuple(counts[k] / totals[k])) for k in range(4)]
    return ContextQuad(*dists, ns_tol=ns_tol)


def _missing(counts: np.ndarray) -> list:
    return [(k >> 1, k & 1) for k in range(4) if counts[k].sum() == 0]


def estimate(log: RunLog) -> EmpiricalEstimate:
    """Plug-in chsh / chsh_e from empirical context frequencies.

    ``jackknife_se`` is the delete-a-group jackknife standard error of chsh_e
    over 10 groups (record index mod 10); it is ``inf`` when a reduced sample
    misses a context.
    """
    counts = _cell_counts(log.bits)
    missing = _missing(counts)
    if missing:
        raise DomainError(f"run log lacks contexts (x, y) = {missing}")
    q = _quad(counts)
    sv = chsh_variants(q)
    t11 = entropic_variants(q).t11
    chsh = abs(sv.s1)

    idx = np.arange(len(log)) % JACKKNIFE_GROUPS
    loo = []
    for g in range(JACKKNIFE_GROUPS):
        c = counts - _cell_counts(log.bits[idx == g])
        if _missing(c):
            loo = None
            break
        loo.append(entropic_variants(_quad(c)).t11)
    if loo is None:
        se, bias = math.inf, math.nan
    else:
        loo = np.array(loo)
        k = JACKKNIFE_GROUPS
        se = float(math.sqrt((k - 1) / k * np.sum((loo - loo.mean()) ** 2)))
        bias = float((k - 1) * (loo.mean() - t11))

    keys = [(x, y) for x in (0, 1) for y in (0, 1)]
    return EmpiricalEstimate(
        distributions=dict(zip(keys, q.contexts)),
        counts={k: int(counts[2 * k[0] + k[1]].sum()) for k in keys},
        chsh=chsh, chsh_e=t11, signed_s1=sv.s1,
        zone=classify_zone(chsh, t11),
        jackknife_se=se, jackknife_bias=bias)
