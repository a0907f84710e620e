"""Party assignments, zone classification, observable permutations and the
local hidden-variable (LHV) oracle.

Observables are labelled X1..X4 = A_0, A_1, B_0, B_1 and addressed by the
indices 0..3.  The three ways of splitting them into two parties:

    class 1: {X1, X2 | X3, X4}
    class 2: {X1, X4 | X2, X3}
    class 3: {X1, X3 | X2, X4}

Under a class, each observable keeps its angle and is measured on the qubit
of the party it belongs to.  The listed order fixes A'_0, A'_1, B'_0, B'_1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .measures import (ContextQuad, EntropicVariants, SignVariants,
                       batch_functionals, chsh_variants, entropic_variants)
from .quantum import DomainError, MeasurementSetting, joint_distribution

CLASS_PARTIES = {
    1: ((0, 1), (2, 3)),
    2: ((0, 3), (1, 2)),
    3: ((0, 2), (1, 3)),
}

BOUNDARY_TOL = 1e-9


def _check_class(class_id: int) -> int:
    if class_id not in CLASS_PARTIES:
        raise DomainError(f"class id must be 1, 2 or 3, got {class_id!r}")
    return int(class_id)


def _partition(parties) -> frozenset:
    return frozenset(frozenset(p) for p in parties)


def class_of_partition(parties) -> int:
    key = _partition(parties)
    for cid, cp in CLASS_PARTIES.items():
        if _partition(cp) == key:
            return cid
    raise DomainError(f"{parties!r} is not a split into two pairs")


@dataclass(frozen=True)
class PartyAssignment:
    class_id: int
    party_a: tuple[int, int]
    party_b: tuple[int, int]

    def __post_init__(self):
        _check_class(self.class_id)
        if sorted(self.party_a + self.party_b) != [0, 1, 2, 3]:
            raise DomainError("parties must partition the four observables")
        if class_of_partition((self.party_a, self.party_b)) != self.class_id:
            raise DomainError(f"parties do not match class {self.class_id}")

    @classmethod
    def canonical(cls, class_id: int) -> "PartyAssignment":
        a, b = CLASS_PARTIES[_check_class(class_id)]
        return cls(class_id, a, b)


@dataclass(frozen=True)
class ObservablePermutation:
    """Relabeling that sends the observable at label i to label ``sigma[i]``."""

    sigma: tuple[int, int, int, int]

    def __post_init__(self):
        sigma = tuple(int(s) for s in self.sigma)
        if sorted(sigma) != [0, 1, 2, 3]:
            raise DomainError(f"{self.sigma!r} is not a permutation of 0..3")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def identity(cls) -> "ObservablePermutation":
        return cls((0, 1, 2, 3))

    @classmethod
    def swap(cls, i: int, j: int) -> "ObservablePermutation":
        s = [0, 1, 2, 3]
        s[i], s[j] = s[j], s[i]
        return cls(tuple(s))

    def __call__(self, i: int) -> int:
        return self.sigma[i]

    def compose(self, other: "ObservablePermutation") -> "ObservablePermutation":
        """``self after other``."""
        return ObservablePermutation(tuple(self.sigma[other.sigma[i]] for i in range(4)))

    @property
    def is_identity(self) -> bool:
        return self.sigma == (0, 1, 2, 3)

    def apply(self, setting: MeasurementSetting) -> MeasurementSetting:
        old = setting.angles
        new = [0.0] * 4
        for i, a in enumerate(old):
            new[self.sigma[i]] = a
        return setting.with_angles(new)

    def image_class(self, class_id: int) -> int:
        a, b = CLASS_PARTIES[_check_class(class_id)]
        return class_of_partition(([self(i) for i in a], [self(i) for i in b]))

    def label(self) -> str:
        """Cycle notation on X1..X4, e.g. ``(X3 X4)``; ``id`` for identity."""
        seen, cycles = set(), []
        for start in range(4):
            if start in seen or self.sigma[start] == start:
                continue
            cyc, i = [], start
            while i not in seen:
                seen.add(i)
                cyc.append(f"X{i + 1}")
                i = self.sigma[i]
            cycles.append("(" + " ".join(cyc) + ")")
        return "".join(cycles) or "id"


def all_permutations() -> list[ObservablePermutation]:
    return [ObservablePermutation(p) for p in itertools.permutations(range(4))]


@dataclass(frozen=True)
class PermutationKind:
    kind: str  # "scenario_preserving" or "exotic"
    target: int

    @property
    def exotic(self) -> bool:
        return self.kind == "exotic"


def classify_permutation(sigma: ObservablePermutation, class_id: int) -> PermutationKind:
    target = sigma.image_class(class_id)
    if target == class_id:
        return PermutationKind("scenario_preserving", class_id)
    return PermutationKind("exotic", target)


def scenario_preserving(class_id: int) -> list[ObservablePermutation]:
    """The 8 relabelings that keep the party split of ``class_id``; identity first."""
    return [p for p in all_permutations() if p.image_class(class_id) == class_id]


def party_exchange(class_id: int) -> ObservablePermutation:
    a, b = CLASS_PARTIES[_check_class(class_id)]
    s = [0] * 4
    s[a[0]], s[a[1]], s[b[0]], s[b[1]] = b[0], b[1], a[0], a[1]
    return ObservablePermutation(tuple(s))


def classify_zone(chsh: float, chsh_e: float) -> int:
    """1: neither violated, 2: entropic only, 3: both, 4: correlative only."""
    if not (math.isfinite(chsh) and math.isfinite(chsh_e)):
        raise DomainError(f"non-finite functional values ({chsh!r}, {chsh_e!r})")
    if chsh <= 2.0:
        return 1 if chsh_e <= 0.0 else 2
    return 3 if chsh_e > 0.0 else 4


def zones_of(chsh, chsh_e):
    """Vectorized :func:`classify_zone` for arrays (no finiteness check)."""
    chsh = np.asarray(chsh)
    chsh_e = np.asarray(chsh_e)
    return np.where(chsh <= 2.0, np.where(chsh_e <= 0.0, 1, 2),
                    np.where(chsh_e > 0.0, 3, 4)).astype(np.int8)


@dataclass(frozen=True)
class ZoneReport:
    chsh: float
    chsh_e: float
    zone: int
    sign_variants: SignVariants
    entropic_variants: EntropicVariants

    @property
    def signed_s1(self) -> float:
        return self.sign_variants.s1


def report_for_quad(q: ContextQuad) -> ZoneReport:
    sv = chsh_variants(q)
    ev = entropic_variants(q)
    chsh = abs(sv.s1)
    return ZoneReport(chsh, ev.t11, classify_zone(chsh, ev.t11), sv, ev)


def contexts_for_assignment(s: MeasurementSetting, pa: PartyAssignment) -> ContextQuad:
    th = s.angles
    a = [th[i] for i in pa.party_a]
    b = [th[j] for j in pa.party_b]
    return ContextQuad(*(joint_distribution(a[i], b[j], s.state)
                         for i in (0, 1) for j in (0, 1)))


def evaluate_assignment(s: MeasurementSetting, pa) -> ZoneReport:
    if not isinstance(pa, PartyAssignment):
        pa = PartyAssignment.canonical(pa)
    return report_for_quad(contexts_for_assignment(s, pa))


def evaluate(s: MeasurementSetting, class_id: int = 1) -> ZoneReport:
    return evaluate_assignment(s, PartyAssignment.canonical(class_id))


@dataclass(frozen=True)
class ForbiddenSweep:
    class_id: int
    entries: tuple[tuple[ObservablePermutation, ZoneReport], ...]

    @property
    def original(self) -> ZoneReport:
        return self.entries[0][1]

    def landings(self, zone: int) -> list[ObservablePermutation]:
        """Non-identity relabelings whose canonical evaluation is in ``zone``."""
        return [p for p, r in self.entries if not p.is_identity and r.zone == zone]

    def distinct_landings(self, zone: int) -> list[ObservablePermutation]:
        """Landings counted once per party-exchange orbit.

        Exchanging the parties transposes every context and leaves both
        canonical functionals unchanged, so relabelings differing only by it
        are not distinct.  The representative keeps each party's observables
        on that party's side.
        """
        a, _ = CLASS_PARTIES[self.class_id]
        return [p for p in self.landings(zone) if {p(a[0]), p(a[1])} == set(a)]

    @property
    def zone2_to_zone4(self) -> ObservablePermutation | None:
        """The relabeling taking a zone-2 setting to zone 4, when unique."""
        if self.original.zone != 2:
            return None
        found = self.distinct_landings(4)
        return found[0] if len(found) == 1 else None


def forbidden_sweep(s: MeasurementSetting, class_id: int = 1) -> ForbiddenSweep:
    """Relabel within the class's marginal scenario, keep the canonical inequalities."""
    pa = PartyAssignment.canonical(class_id)
    entries = tuple((p, evaluate_assignment(p.apply(s), pa))
                    for p in scenario_preserving(class_id))
    return ForbiddenSweep(class_id, entries)


@dataclass(frozen=True)
class TripleCheck:
    reports: dict
    all_e_contextual: bool
    all_both_contextual: bool


def triple_violation_check(s: MeasurementSetting) -> TripleCheck:
    reports = {c: evaluate(s, c) for c in (1, 2, 3)}
    all_e = all(r.chsh_e > 0 for r in reports.values())
    all_both = all_e and all(r.chsh > 2 for r in reports.values())
    return TripleCheck(reports, all_e, all_both)


# Local hidden-variable oracle.

STRATEGIES = np.array(list(itertools.product((0, 1), repeat=4)), dtype=int)  # (a0, a1, b0, b1)


def _strategy_matrix() -> np.ndarray:
    """Column lambda holds the deterministic P(a,b|x,y) flattened as [x, y, a, b]."""
    m = np.zeros((16, 16))
    for lam, (a0, a1, b0, b1) in enumerate(STRATEGIES):
        for x, y in itertools.product((0, 1), repeat=2):
            a = (a0, a1)[x]
            b = (b0, b1)[y]
            m[8 * x + 4 * y + 2 * a + b, lam] = 1.0
    return m


DETERMINISTIC = _strategy_matrix()


@dataclass(frozen=True)
class HiddenVariableModel:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (16,) or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise DomainError("weights must be 16 non-negative numbers summing to 1")
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))

    def distribution(self) -> np.ndarray:
        """Reconstructed P(a,b|x,y) indexed [x, y, a, b]."""
        return (DETERMINISTIC @ self.weights).reshape(2, 2, 2, 2)


@dataclass(frozen=True)
class LhvResult:
    feasible: bool
    model: HiddenVariableModel | None
    boundary: bool
    visibility: float


def facet_check(q: ContextQuad) -> tuple[bool, float]:
    """Membership via the 8 CHSH facets; returns (local, 2 - max |s_i|).

    Only valid for no-signalling quads with binary outcomes.
    """
    margin = 2.0 - chsh_variants(q).max_abs
    return margin >= 0.0, margin


def lhv_feasible(q: ContextQuad, max_visibility: float = 2.0) -> LhvResult:
    """Decide whether the 16 deterministic strategies can reproduce ``q``.

    Solves ``max v`` such that ``v p + (1 - v) u`` is a convex mixture of
    deterministic strategies, where ``u`` is the uniform quad.  The quad is
    local iff ``v >= 1``; ``|v - 1| < 1e-9`` is reported as a boundary case.
    A witness for ``p`` itself follows by mixing the solution with uniform
    weights.
    """
    p = q.as_array().reshape(16)
    u = np.full(16, 0.25)
    # unknowns: 16 weights, then v
    a_eq = np.zeros((17, 17))
    a_eq[:16, :16] = DETERMINISTIC
    a_eq[:16, 16] = -(p - u)
    a_eq[16, :16] = 1.0
    b_eq = np.concatenate([u, [1.0]])
    c = np.zeros(17)
    c[16] = -1.0
    bounds = [(0.0, None)] * 16 + [(0.0, max_visibility)]
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LHV linear program failed: {res.message}")
    v = float(res.x[16])
    boundary = abs(v - 1.0) < BOUNDARY_TOL
    feasible = v >= 1.0 - BOUNDARY_TOL
    model = None
    if feasible:
        scale = min(v, max_visibility)
        w = res.x[:16] / scale + (1.0 - 1.0 / scale) / 16.0
        w = np.clip(w, 0.0, None)
        model = HiddenVariableModel(w / w.sum())
    return LhvResult(feasible, model, boundary, v)


def forbidden_sweep_batch(angles, alpha: float, class_id: int = 1):
    """Vectorized :func:`forbidden_sweep` for an (n, 4) angle array.

    Returns ``(perms, chsh, chsh_e, zones)`` with arrays of shape (n, 8); column
    k belongs to ``perms[k]`` (identity first).
    """
    angles = np.asarray(angles, dtype=float).reshape(-1, 4)
    (i0, i1), (j0, j1) = CLASS_PARTIES[_check_class(class_id)]
    perms = scenario_preserving(class_id)
    chsh, che = [], []
    for p in perms:
        relabeled = np.empty_like(angles)
        for i in range(4):
            relabeled[:, p(i)] = angles[:, i]
        _, s1, t11 = batch_functionals(relabeled[:, i0], relabeled[:, i1],
                                       relabeled[:, j0], relabeled[:, j1], alpha)
        chsh.append(np.abs(s1))
        che.append(t11)
    chsh = np.array(chsh).T
    che = np.array(che).T
    return perms, chsh, che, zones_of(chsh, che)
