"""Command-line front end.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import empirical, figures, optimize as opt, scan as scanmod, scenario
from .quantum import DomainError, MeasurementSetting, StateParam

TABLE1 = [
    ((2.070, 1.466, 1.372, 0.769), 2.248, 0.2369),
    ((2.709, 2.106, 0.739, 0.125), 2.250, 0.2368),
    ((1.316, 2.894, 1.033, 2.606), 2.828, -1.205),
    ((2.050, 0.486, 1.877, 0.294), 2.828, -1.210),
]
TABLE2 = (82.5, 1.4, 2.9, 13.2)
TABLE3 = [
    (2, (0.40, 3.02, 2.72, 2.38), (1.71, 1.71, 1.42), (0.11, 0.07, 0.18)),
    (3, (1.97, 1.31, 1.22, 0.83), (2.22, 2.07, 2.29), (0.15, 0.01, 0.17)),
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CliConfig:
    alpha: float = math.pi / 4
    samples: int | None = None
    seed: int = 0
    workers: int = 1
    format: str = "text"
    output: str = "-"
    emit: str = ""
    emit_every: int = 1
    emit_dir: str = "."
    angle_span: float = math.pi
    starts: int = 256
    iterations: int = 500
    tolerance: float = 1e-10

    def validate(self) -> "CliConfig":
        StateParam(self.alpha)
        if self.samples is not None and self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.format not in ("csv", "text"):
            raise ConfigError(f"format must be csv or text, got {self.format!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        bad = set(self.emit_kinds) - set(scanmod.EMIT_KINDS)
        if bad:
            raise ConfigError(f"unknown emit kinds {sorted(bad)}")
        opt.Budget(self.starts, self.iterations, self.tolerance)
        return self

    @property
    def emit_kinds(self) -> tuple[str, ...]:
        return tuple(k for k in self.emit.split(",") if k)

    @property
    def budget(self) -> opt.Budget:
        return opt.Budget(self.starts, self.iterations, self.tolerance)


_CASTS = {"int": int, "int | None": int, "float": float, "str": str}
_TYPES = {f.name: _CASTS[f.type] for f in fields(CliConfig)}


def _cast(key: str, raw: str):
    typ = _TYPES[key]
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {raw!r}") from None


def load_config(path=None, overrides: dict | None = None) -> CliConfig:
    """Defaults, then ``key=value`` lines from ``path``, then ``overrides``."""
    values = {}
    if path is not None and Path(path).exists():
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            if key not in _TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _cast(key, raw.strip())
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    try:
        return CliConfig(**values).validate()
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _angles(text: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"angles must be four comma-separated radians: {text!r}")
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected four angles, got {len(vals)}")
    return vals


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chshzones",
        description="Correlative vs entropic CHSH: evaluation, zones, permutations, scans.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its values")
    common.add_argument("--alpha", type=float, help="state parameter in radians, [0, pi/4] (default pi/4)")
    common.add_argument("--seed", type=int, help="64-bit seed (default 0)")
    common.add_argument("--workers", type=int, help="worker processes (default 1)")
    common.add_argument("--format", choices=("csv", "text"), help="output format (default text)")
    common.add_argument("--output", help="output path, '-' for stdout (default -)")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, help="number of random settings")
    sampling.add_argument("--angle-span", type=float,
                          help="angles are drawn uniformly from [0, span) (default pi)")

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--starts", type=int, help="multi-start count (default 256)")
    budget.add_argument("--iterations", type=int, help="local iterations per start (default 500)")
    budget.add_argument("--tolerance", type=float, help="local convergence tolerance (default 1e-10)")

    setting = argparse.ArgumentParser(add_help=False)
    setting.add_argument("--angles", type=_angles, required=True,
                         help="theta0,theta1,theta0',theta1' in radians")

    s = sub.add_parser("scan", parents=[common, sampling], help="Monte Carlo zone statistics")
    s.add_argument("--emit", help=f"comma list of {','.join(scanmod.EMIT_KINDS)}")
    s.add_argument("--emit-every", type=int, help="keep every k-th setting in point files")
    s.add_argument("--emit-dir", help="directory for point files and figures (default .)")
    s.add_argument("--figures", action="store_true", help="render PNG figures beside the point files")

    s = sub.add_parser("sweep-alpha", parents=[common, sampling], help="zone fractions for several alphas")
    s.add_argument("--alphas", type=_floats, required=True, help="comma list of alphas in radians")

    s = sub.add_parser("optimize", parents=[common, budget], help="extremal settings")
    s.add_argument("--goal", choices=opt.GOALS, default="max_chsh")
    s.add_argument("--count", type=int, default=1, help="number of distinct maximizers to report")
    s.add_argument("--distinct", type=float, default=math.pi / 4,
                   help="minimum separation between reported maximizers (radians)")

    sub.add_parser("boundary", parents=[common, budget], help="largest chsh with chsh_e > 0")

    s = sub.add_parser("classify", parents=[common, setting], help="evaluate one setting")
    s.add_argument("--class", dest="class_id", type=int, choices=(1, 2, 3), default=1)
    s.add_argument("--verbose", action="store_true", help="include signed s1 and all variants")

    s = sub.add_parser("permute", parents=[common, setting], help="forbidden-permutation sweep")
    s.add_argument("--class", dest="class_id", type=int, choices=(1, 2, 3), default=1)

    sub.add_parser("classes", parents=[common, setting], help="evaluate all three party assignments")

    s = sub.add_parser("search-triple", parents=[common, sampling, budget],
                       help="settings e-contextual under all party assignments")
    s.add_argument("--mode", choices=("e_only", "both"), default="e_only")
    s.add_argument("--limit", type=int, default=20)
    s.add_argument("--seed-angles", type=_angles, action="append", default=[],
                   help="extra candidate setting (repeatable)")

    s = sub.add_parser("simulate-runs", parents=[common, setting], help="write a simulated run log")
    s.add_argument("--runs", type=int, required=True)

    s = sub.add_parser("estimate", parents=[common], help="plug-in estimates from a run log")
    s.add_argument("--input", required=True, help="run-log path, '-' for stdin")

    sub.add_parser("table1", parents=[common], help="reproduce Table 1 values")
    sub.add_parser("table2", parents=[common, sampling], help="reproduce Table 2 zone fractions")
    sub.add_parser("table3", parents=[common], help="reproduce Table 3 class values")
    return p


def _csv(header, rows) -> str:
    out = [",".join(header)]
    out += [",".join(str(c) for c in r) for r in rows]
    return "\n".join(out) + "\n"


def _table(header, rows, fmt) -> str:
    if fmt == "csv":
        return _csv(header, rows)
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
                     for r in cells) + "\n"


def _f(v, digits=4) -> str:
    return f"{v:.{digits}f}"


def _setting(args, cfg) -> MeasurementSetting:
    return MeasurementSetting.from_angles(args.angles, cfg.alpha)


def _report_row(r: scenario.ZoneReport, verbose=False):
    row = [_f(r.chsh), _f(r.chsh_e), r.zone]
    if verbose:
        row += [_f(v) for v in r.sign_variants.as_tuple()]
        row += [_f(v) for v in r.entropic_variants.as_tuple()]
    return row


REPORT_HEADER = ["chsh", "chsh_e", "zone"]
VERBOSE_HEADER = REPORT_HEADER + ["s1", "s2", "s3", "s4", "t11", "t10", "t01", "t00"]


def cmd_classify(args, cfg):
    r = scenario.evaluate(_setting(args, cfg), args.class_id)
    header = VERBOSE_HEADER if args.verbose else REPORT_HEADER
    row = _report_row(r, args.verbose)
    if cfg.format == "csv":
        return _csv(header, [row])
    return " ".join(f"{h}={v}" for h, v in zip(header, row)) + "\n"


def cmd_permute(args, cfg):
    sweep = scenario.forbidden_sweep(_setting(args, cfg), args.class_id)
    rows = [[p.label(), *_report_row(r)] for p, r in sweep.entries]
    text = _table(["relabeling", *REPORT_HEADER], rows, cfg.format)
    if cfg.format == "text" and sweep.original.zone == 2:
        z4 = sweep.zone2_to_zone4
        text += f"zone 2 -> zone 4 relabeling: {z4.label() if z4 else 'none unique'}\n"
    return text


def cmd_classes(args, cfg):
    chk = scenario.triple_violation_check(_setting(args, cfg))
    rows = [[c, *_report_row(r)] for c, r in chk.reports.items()]
    text = _table(["class", *REPORT_HEADER], rows, cfg.format)
    if cfg.format == "text":
        text += (f"all_e_contextual={chk.all_e_contextual} "
                 f"all_both_contextual={chk.all_both_contextual}\n")
    return text


def cmd_scan(args, cfg):
    emit_dir = Path(cfg.emit_dir)
    kinds = cfg.emit_kinds
    sc = scanmod.ScanConfig(alpha=cfg.alpha, samples=cfg.samples or 1_000_000, seed=cfg.seed,
                            workers=cfg.workers, emit=kinds, emit_every=cfg.emit_every,
                            emit_dir=emit_dir if kinds else None, angle_span=cfg.angle_span)
    res = scanmod.scan(sc)
    if args.figures and kinds:
        try:
            figures.render_all(res.emitted, emit_dir)
        except OSError as exc:
            raise scanmod.ScanIOError(f"cannot write figures to {emit_dir}: {exc}") from exc
    return scanmod.format_summaries([res.summary], cfg.format)


def cmd_sweep(args, cfg):
    rows = scanmod.alpha_sweep(args.alphas, cfg.samples or 1_000_000, cfg.seed,
                               cfg.workers, cfg.angle_span)
    return scanmod.format_summaries(rows, cfg.format)


def _opt_rows(results):
    rows = []
    for r in results:
        if not r.feasible:
            rows.append(["no feasible point", "", "", "", ""])
            continue
        rows.append([_f(r.value, 6), " ".join(_f(a) for a in r.setting.angles),
                     _f(r.report.chsh), _f(r.report.chsh_e), r.report.zone])
    return rows


OPT_HEADER = ["value", "angles", "chsh", "chsh_e", "zone"]


def cmd_optimize(args, cfg):
    goal = opt.OptimizeGoal(args.goal, cfg.alpha)
    if args.count > 1:
        res = opt.find_extremal_settings(goal, args.count, args.distinct, cfg.seed,
                                         cfg.budget, workers=cfg.workers)
        if not res:
            res = [opt.OptimizeResult(None, math.nan, None, cfg.starts, False)]
    else:
        res = [opt.optimize(goal, cfg.budget, cfg.seed, cfg.workers)]
    return _table(OPT_HEADER, _opt_rows(res), cfg.format)


def cmd_boundary(args, cfg):
    res = opt.zone3_boundary(cfg.alpha, cfg.budget, cfg.seed, cfg.workers)
    return _table(OPT_HEADER, _opt_rows([res]), cfg.format)


def cmd_search_triple(args, cfg):
    found = opt.find_triple_violations(args.mode, cfg.budget, cfg.seed, cfg.alpha,
                                       samples=cfg.samples or 100_000,
                                       seeds=args.seed_angles, limit=args.limit,
                                       span=cfg.angle_span)
    rows = []
    for s in found:
        chk = scenario.triple_violation_check(s)
        rows.append([" ".join(_f(a) for a in s.angles),
                     *(_f(chk.reports[c].chsh) for c in (1, 2, 3)),
                     *(_f(chk.reports[c].chsh_e) for c in (1, 2, 3))])
    header = ["angles", "chsh_1", "chsh_2", "chsh_3", "chsh_e_1", "chsh_e_2", "chsh_e_3"]
    return _table(header, rows, cfg.format)


def cmd_simulate(args, cfg):
    log = empirical.simulate_runs(_setting(args, cfg), args.runs, cfg.seed)
    return empirical.emit_runs(log)


def cmd_estimate(args, cfg):
    try:
        if args.input == "-":
            log = empirical.ingest_runs(sys.stdin)
        else:
            with open(args.input) as fh:
                log = empirical.ingest_runs(fh)
    except OSError as exc:
        raise OSError(f"cannot read {args.input}: {exc.strerror or exc}") from None
    est = empirical.estimate(log)
    header = ["chsh", "chsh_e", "zone", "s1", "jackknife_se", "jackknife_bias",
              "n00", "n01", "n10", "n11"]
    row = [_f(est.chsh), _f(est.chsh_e), est.zone, _f(est.signed_s1),
           _f(est.jackknife_se, 6), _f(est.jackknife_bias, 6),
           *(est.counts[k] for k in sorted(est.counts))]
    return _table(header, [row], cfg.format)


TABLE_HEADER = ["row", "quantity", "reproduced", "reference", "deviation"]


def cmd_table1(args, cfg):
    rows = []
    for i, (angles, chsh, che) in enumerate(TABLE1, start=1):
        r = scenario.evaluate(MeasurementSetting.from_angles(angles, math.pi / 4))
        rows.append([i, "chsh", _f(r.chsh), chsh, _f(abs(r.chsh - chsh))])
        rows.append([i, "chsh_e", _f(r.chsh_e), che, _f(abs(r.chsh_e - che))])
    return _table(TABLE_HEADER, rows, cfg.format)


def cmd_table2(args, cfg):
    sc = scanmod.ScanConfig(alpha=math.pi / 4, samples=cfg.samples or 10_000_000,
                            seed=cfg.seed, workers=cfg.workers, angle_span=cfg.angle_span)
    fr = scanmod.scan(sc).summary.fractions
    rows = [[1, f"zone{k + 1}_percent", _f(100 * fr[k], 3), TABLE2[k],
             _f(abs(100 * fr[k] - TABLE2[k]), 3)] for k in range(4)]
    return _table(TABLE_HEADER, rows, cfg.format)


def cmd_table3(args, cfg):
    rows = []
    for i, (zone, angles, chsh, che) in enumerate(TABLE3, start=1):
        s = MeasurementSetting.from_angles(angles, math.pi / 4)
        for c in (1, 2, 3):
            r = scenario.evaluate(s, c)
            rows.append([i, f"chsh_class{c}", _f(r.chsh), chsh[c - 1], _f(abs(r.chsh - chsh[c - 1]))])
            rows.append([i, f"chsh_e_class{c}", _f(r.chsh_e), che[c - 1],
                         _f(abs(r.chsh_e - che[c - 1]))])
        z = scenario.evaluate(s, 1).zone
        rows.append([i, "zone_class1", z, zone, abs(z - zone)])
    return _table(TABLE_HEADER, rows, cfg.format)


COMMANDS = {
    "scan": cmd_scan, "sweep-alpha": cmd_sweep, "optimize": cmd_optimize,
    "boundary": cmd_boundary, "classify": cmd_classify, "permute": cmd_permute,
    "classes": cmd_classes, "search-triple": cmd_search_triple,
    "simulate-runs": cmd_simulate, "estimate": cmd_estimate,
    "table1": cmd_table1, "table2": cmd_table2, "table3": cmd_table3,
}
_CONFIG_FLAGS = [f.name for f in fields(CliConfig)]


def _write(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {output}: {exc.strerror or exc}") from None


def run_command(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    overrides = {k: getattr(args, k) for k in _CONFIG_FLAGS if hasattr(args, k)}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    try:
        text = COMMANDS[args.command](args, cfg)
        _write(text, cfg.output)
    except (OSError, empirical.RunLogError, DomainError, RuntimeError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
