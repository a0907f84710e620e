"""Multi-start derivative-free searches over the four measurement angles."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .measures import batch_functionals
from .quantum import TWO_PI, DomainError, MeasurementSetting, as_state
from .scan import sample_angles
from .scenario import CLASS_PARTIES, ZoneReport, evaluate, scenario_preserving

GOALS = ("max_chsh", "max_chsh_e", "max_chsh_in_zone3", "min_chsh_e_at_max_chsh")
EPS_SCHEDULE = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
# chsh_e below this is rounding noise (e.g. deterministic marginals at alpha=0)
FEASIBILITY_FLOOR = 1e-10


@dataclass(frozen=True)
class OptimizeGoal:
    kind: str
    alpha: float = math.pi / 4

    def __post_init__(self):
        if self.kind not in GOALS:
            raise DomainError(f"unknown goal {self.kind!r}; expected one of {GOALS}")
        object.__setattr__(self, "alpha", as_state(self.alpha).alpha)


@dataclass(frozen=True)
class Budget:
    starts: int = 256
    iterations: int = 500
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.starts < 1 or self.iterations < 1:
            raise DomainError("optimization budget must allow at least one start and iteration")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")


@dataclass(frozen=True)
class OptimizeResult:
    setting: MeasurementSetting | None
    value: float
    report: ZoneReport | None
    starts: int
    converged: bool

    @property
    def feasible(self) -> bool:
        return self.setting is not None


def _h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _hjoint(cells) -> float:
    return -sum(c * math.log2(c) for c in cells if c > 0.0)


def functionals(angles, alpha: float, class_id: int = 1) -> tuple[float, float]:
    """Signed s1 and t11 for one setting under one class (scalar fast path)."""
    pa, pb = CLASS_PARTIES[class_id]
    a = [angles[i] for i in pa]
    b = [angles[j] for j in pb]
    s2a, c2a = math.sin(2 * alpha), math.cos(2 * alpha)
    ma = [c2a * math.cos(t) for t in a]
    mb = [c2a * math.cos(t) for t in b]
    e = [[math.cos(a[i]) * math.cos(b[j]) - s2a * math.sin(a[i]) * math.sin(b[j])
          for j in (0, 1)] for i in (0, 1)]
    h = [[_hjoint((max(0.0, (1 + ma[i] + mb[j] + e[i][j]) / 4),
                   max(0.0, (1 + ma[i] - mb[j] - e[i][j]) / 4),
                   max(0.0, (1 - ma[i] + mb[j] - e[i][j]) / 4),
                   max(0.0, (1 - ma[i] - mb[j] + e[i][j]) / 4)))
          for j in (0, 1)] for i in (0, 1)]
    s1 = e[0][0] + e[0][1] + e[1][0] - e[1][1]
    t11 = (h[1][1] + _h2((1 + ma[0]) / 2) + _h2((1 + mb[0]) / 2)
           - h[0][0] - h[0][1] - h[1][0])
    return s1, t11


def _chsh(x, alpha):
    return abs(functionals(x, alpha)[0])


def _chsh_e(x, alpha):
    return functionals(x, alpha)[1]


def goal_value(kind: str, angles, alpha: float) -> float:
    s1, t11 = functionals(angles, alpha)
    if kind in ("max_chsh", "max_chsh_in_zone3"):
        return abs(s1)
    return t11


def start_points(seed: int, count: int) -> np.ndarray:
    """Uniform starts on [0, 2pi)^4; start k is a pure function of (seed, k)."""
    return sample_angles(seed, 0, count, TWO_PI)


def _nm_options(budget):
    return {"maxiter": budget.iterations, "xatol": budget.tolerance,
            "fatol": budget.tolerance}


def _local(args):
    """Run one local search; returns (value or None, angles, converged)."""
    kind, x0, alpha, budget = args
    if kind == "max_chsh":
        r = minimize(lambda x: -_chsh(x, alpha), x0, method="Nelder-Mead",
                     options=_nm_options(budget))
        return -r.fun, r.x, bool(r.success)
    if kind == "max_chsh_e":
        r = minimize(lambda x: -_chsh_e(x, alpha), x0, method="Nelder-Mead",
                     options=_nm_options(budget))
        return -r.fun, r.x, bool(r.success)
    if kind == "max_chsh_in_zone3":
        x, ok = np.asarray(x0, float), True
        for k, eps in enumerate(EPS_SCHEDULE):
            r = minimize(lambda y: -_chsh(y, alpha), x, method="COBYLA",
                         constraints=[{"type": "ineq", "fun": lambda y, e=eps: _chsh_e(y, alpha) - e}],
                         options={"maxiter": budget.iterations,
                                  "rhobeg": 0.5 if k == 0 else 0.05,
                                  "tol": budget.tolerance})
            if _chsh_e(r.x, alpha) <= FEASIBILITY_FLOOR:
                break
            x, ok = r.x, bool(r.success)
        if _chsh_e(x, alpha) <= FEASIBILITY_FLOOR:
            return None, x, False
        return _chsh(x, alpha), x, ok
    if kind == "min_chsh_e_at_max_chsh":
        top, x, _ = _local(("max_chsh", x0, alpha, budget))
        floor = top - 1e-7
        r = minimize(lambda y: _chsh_e(y, alpha), x, method="COBYLA",
                     constraints=[{"type": "ineq", "fun": lambda y: _chsh(y, alpha) - floor}],
                     options={"maxiter": budget.iterations, "rhobeg": 0.01,
                              "tol": budget.tolerance})
        y = r.x if _chsh(r.x, alpha) >= floor else x
        return -_chsh_e(y, alpha), y, bool(r.success)
    raise DomainError(f"unknown goal {kind!r}")


def _run_starts(goal: OptimizeGoal, budget: Budget, seed: int, workers: int):
    jobs = [(goal.kind, x0, goal.alpha, budget) for x0 in start_points(seed, budget.starts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_local, jobs, chunksize=8))
    else:
        runs = [_local(j) for j in jobs]
    out = []
    for val, x, ok in runs:
        if val is None:
            continue
        x = np.mod(x, TWO_PI)
        out.append((val, tuple(float(v) for v in x), ok))
    if goal.kind == "min_chsh_e_at_max_chsh" and out:
        # only runs that reached the global chsh maximum compete on chsh_e
        top = max(_chsh(x, goal.alpha) for _, x, _ in out)
        out = [r for r in out if _chsh(r[1], goal.alpha) >= top - 1e-6]
    # best first; ties by lexicographically smallest angles
    out.sort(key=lambda t: (-t[0], t[1]))
    return out


def _result(goal: OptimizeGoal, angles, starts: int, converged: bool) -> OptimizeResult:
    s = MeasurementSetting.from_angles(angles, goal.alpha)
    value = goal_value(goal.kind, s.angles, goal.alpha)
    return OptimizeResult(s, value, evaluate(s, 1), starts, converged)


def _infeasible(starts: int) -> OptimizeResult:
    return OptimizeResult(None, float("nan"), None, starts, False)


def optimize(goal: OptimizeGoal, budget: Budget = Budget(), seed: int = 0,
             workers: int = 1) -> OptimizeResult:
    """Best of ``budget.starts`` seeded local searches.

    ``max_chsh_in_zone3`` only accepts points with chsh_e > 0 and returns a
    result with ``setting=None`` when none is found.  For
    ``min_chsh_e_at_max_chsh`` the reported value is chsh_e itself.
    """
    runs = _run_starts(goal, budget, seed, workers)
    if not runs:
        return _infeasible(budget.starts)
    _, angles, ok = runs[0]
    return _result(goal, angles, budget.starts, ok)


def zone3_boundary(alpha=math.pi / 4, budget: Budget = Budget(), seed: int = 0,
                   workers: int = 1) -> OptimizeResult:
    """Supremum of chsh over e-contextual settings (approached as chsh_e > eps, eps -> 1e-6)."""
    return optimize(OptimizeGoal("max_chsh_in_zone3", alpha), budget, seed, workers)


def _wrap(d):
    d = np.mod(d, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def quotient_distance(x, y) -> float:
    """Max per-angle wrapped distance, minimized over the 8 class-1 relabelings of ``y``."""
    x = np.asarray(x, float)
    best = math.inf
    for p in scenario_preserving(1):
        gy = np.empty(4)
        for i in range(4):
            gy[p(i)] = y[i]
        best = min(best, float(np.max(_wrap(x - gy))))
    return best


def find_extremal_settings(goal: OptimizeGoal, count: int, distinctness_tolerance: float,
                           seed: int = 0, budget: Budget = Budget(),
                           value_window: float = 5e-3, workers: int = 1) -> list[OptimizeResult]:
    """Up to ``count`` mutually distinct near-optimal local optima.

    Candidates must lie within ``value_window`` of the best value found.  For
    ``max_chsh_e`` the optimum is shared by settings with different chsh (the
    entropies only see |E|); those with the larger chsh are listed first.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    runs = _run_starts(goal, budget, seed, workers)
    if not runs:
        return []
    top = runs[0][0]
    runs = [r for r in runs if r[0] >= top - value_window]
    if goal.kind == "max_chsh_e":
        runs.sort(key=lambda r: (-round(_chsh(r[1], goal.alpha), 3), -r[0], r[1]))
    chosen = []
    for val, angles, ok in runs:
        if all(quotient_distance(angles, c[1]) >= distinctness_tolerance for c in chosen):
            chosen.append((val, angles, ok))
            if len(chosen) == count:
                break
    return [_result(goal, a, budget.starts, ok) for _, a, ok in chosen]


def _class_margins(ang: np.ndarray, alpha: float):
    """Per-class (chsh, chsh_e) arrays, shape (3, n) each."""
    chsh, che = [], []
    for c in (1, 2, 3):
        (i0, i1), (j0, j1) = CLASS_PARTIES[c]
        _, s1, t11 = batch_functionals(ang[:, i0], ang[:, i1], ang[:, j0], ang[:, j1], alpha)
        chsh.append(np.abs(s1))
        che.append(t11)
    return np.array(chsh), np.array(che)


def _triple_score(x, alpha, mode):
    vals = [functionals(x, alpha, c) for c in (1, 2, 3)]
    score = min(t for _, t in vals)
    if mode == "both":
        score = min(score, min(abs(s) - 2.0 for s, _ in vals))
    return score


def find_triple_violations(mode: str = "e_only", budget: Budget = Budget(), seed: int = 0,
                           alpha=math.pi / 4, samples: int = 100_000, seeds=(),
                           limit: int = 20, span: float = math.pi,
                           margin: float = 0.05) -> list[MeasurementSetting]:
    """Settings that are e-contextual under all three classes.

    Candidates are the explicit ``seeds`` followed by ``samples`` random
    settings.  Candidates passing the filter are kept as they are; near misses
    (score above ``-margin``) get a local refinement of the worst-class score,
    at most ``budget.starts`` of them.  ``both`` also demands chsh > 2 in every
    class.
    """
    if mode not in ("e_only", "both"):
        raise DomainError(f"mode must be 'e_only' or 'both', got {mode!r}")
    alpha = as_state(alpha).alpha
    parts = [np.atleast_2d(np.asarray(seeds, float)).reshape(-1, 4)]
    if samples > 0:
        parts.append(sample_angles(seed, 0, samples, span))
    cand = np.concatenate(parts)
    if len(cand) == 0:
        return []
    chsh, che = _class_margins(cand, alpha)
    score = che.min(axis=0)
    if mode == "both":
        score = np.minimum(score, (chsh - 2.0).min(axis=0))
    found = [tuple(x) for x in cand[score > 0]]
    near = cand[(score <= 0) & (score > -margin)]
    for x0 in near[: budget.starts]:
        if len(found) >= limit:
            break
        r = minimize(lambda x: -_triple_score(x, alpha, mode), x0, method="Nelder-Mead",
                     options=_nm_options(budget))
        if _triple_score(r.x, alpha, mode) > 0:
            found.append(tuple(r.x))
    out = []
    for x in found:
        s = MeasurementSetting.from_angles(x, alpha)
        if all(quotient_distance(s.angles, o.angles) > 1e-6 for o in out):
            out.append(s)
        if len(out) >= limit:
            break
    return out
