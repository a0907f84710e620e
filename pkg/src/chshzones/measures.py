"""Shannon entropies and the correlative/entropic CHSH functionals.

A marginal scenario is represented by a :class:`ContextQuad` of four joint
distributions ``d_ij`` for the jointly measurable pairs (A'_i, B'_j).

Sign variants of the correlative expression::

    s1 = E00 + E01 + E10 - E11
    s2 = E00 + E01 - E10 + E11
    s3 = E00 - E01 + E10 + E11
    s4 = -E00 + E01 + E10 + E11

Entropic variants: ``T_(i,j)`` puts a plus sign on H(A'_i, B'_j), adds the
single entropies of the two observables not in that context and subtracts the
other three joint entropies.  ``t11`` is the canonical entropic CHSH.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quantum import (DomainError, JointDistribution, cell_probabilities,
                      PROB_TOL)

NS_TOL = 1e-9


def binary_entropy(p):
    """Entropy in bits of a Bernoulli(p) variable, with 0 log 0 = 0."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -PROB_TOL) or np.any(arr > 1 + PROB_TOL) or np.any(np.isnan(arr)):
        raise DomainError(f"probability outside [0, 1]: {p!r}")
    arr = np.clip(arr, 0.0, 1.0)
    h = entropy_cells(np.stack([arr, 1.0 - arr]))
    return float(h) if h.ndim == 0 else h


def entropy_cells(cells):
    """Shannon entropy in bits summed over axis 0; zero cells contribute 0."""
    cells = np.asarray(cells, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(cells > 0.0, cells * np.log2(cells), 0.0)
    return -terms.sum(axis=0)


def joint_entropy(d: JointDistribution) -> float:
    return float(entropy_cells(d.p))


def marginal_entropy(d: JointDistribution, party: str) -> float:
    if party == "A":
        return float(entropy_cells(d.marginal_a))
    if party == "B":
        return float(entropy_cells(d.marginal_b))
    raise ValueError(f"party must be 'A' or 'B', got {party!r}")


@dataclass(frozen=True)
class ContextQuad:
    d00: JointDistribution
    d01: JointDistribution
    d10: JointDistribution
    d11: JointDistribution
    ns_tol: float = field(default=NS_TOL, compare=False)

    def __post_init__(self):
        pairs = [
            ("A'_0", self.d00.marginal_a, self.d01.marginal_a),
            ("A'_1", self.d10.marginal_a, self.d11.marginal_a),
            ("B'_0", self.d00.marginal_b, self.d10.marginal_b),
            ("B'_1", self.d01.marginal_b, self.d11.marginal_b),
        ]
        for name, m1, m2 in pairs:
            if abs(m1[0] - m2[0]) > self.ns_tol:
                raise DomainError(
                    f"signalling marginal for {name}: {m1[0]!r} vs {m2[0]!r}")

    @property
    def contexts(self) -> tuple[JointDistribution, ...]:
        return (self.d00, self.d01, self.d10, self.d11)

    @property
    def correlators(self) -> tuple[float, float, float, float]:
        return tuple(d.correlator for d in self.contexts)

    def as_array(self) -> np.ndarray:
        """Probabilities P(a,b|x,y) indexed [x, y, a, b]."""
        return np.array([d.p for d in self.contexts]).reshape(2, 2, 2, 2)

    @classmethod
    def from_array(cls, p, ns_tol: float = NS_TOL) -> "ContextQuad":
        p = np.asarray(p, dtype=float).reshape(2, 2, 4)
        return cls(*(JointDistribution(tuple(p[x, y])) for x in (0, 1) for y in (0, 1)),
                   ns_tol=ns_tol)

    def transpose(self) -> "ContextQuad":
        """Exchange the roles of the two parties."""
        return ContextQuad(self.d00.transpose(), self.d10.transpose(),
                           self.d01.transpose(), self.d11.transpose(),
                           ns_tol=self.ns_tol)


@dataclass(frozen=True)
class SignVariants:
    s1: float
    s2: float
    s3: float
    s4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.s1, self.s2, self.s3, self.s4)

    @property
    def max_abs(self) -> float:
        return max(abs(s) for s in self.as_tuple())


@dataclass(frozen=True)
class EntropicVariants:
    t11: float
    t10: float
    t01: float
    t00: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.t11, self.t10, self.t01, self.t00)

    def get(self, i: int, j: int) -> float:
        return getattr(self, f"t{i}{j}")


def sign_variants_from_correlators(e00, e01, e10, e11):
    """The four sign variants; works elementwise on arrays."""
    total = e00 + e01 + e10 + e11
    return (total - 2 * e11, total - 2 * e10, total - 2 * e01, total - 2 * e00)


def chsh_variants(q: ContextQuad) -> SignVariants:
    return SignVariants(*(float(s) for s in sign_variants_from_correlators(*q.correlators)))


def chsh_value(q: ContextQuad) -> float:
    """|s1|, the reported correlative CHSH value."""
    return abs(chsh_variants(q).s1)


def _singles(q: ContextQuad):
    # A'_i from d_i0, B'_j from d_0j
    h_a = (marginal_entropy(q.d00, "A"), marginal_entropy(q.d10, "A"))
    h_b = (marginal_entropy(q.d00, "B"), marginal_entropy(q.d01, "B"))
    return h_a, h_b


def entropic_variants(q: ContextQuad) -> EntropicVariants:
    joint = {(i, j): joint_entropy(getattr(q, f"d{i}{j}")) for i in (0, 1) for j in (0, 1)}
    h_a, h_b = _singles(q)
    total = sum(joint.values())
    t = {k: 2 * joint[k] - total + h_a[1 - k[0]] + h_b[1 - k[1]] for k in joint}
    return EntropicVariants(t[1, 1], t[1, 0], t[0, 1], t[0, 0])


def chsh_e_value(q: ContextQuad) -> float:
    """Canonical entropic CHSH t11 in bits; positive means violation."""
    return entropic_variants(q).t11


def batch_functionals(a0, a1, b0, b1, alpha: float):
    """Vectorized canonical functionals for many angle quadruples.

    Context (i, j) pairs the angle of A'_i with that of B'_j.  Returns
    ``(correlators, s1, t11)`` where ``correlators`` has shape (4, n) in
    E00, E01, E10, E11 order.
    """
    s2a, c2a = math.sin(2 * alpha), math.cos(2 * alpha)
    ca = (np.cos(a0), np.cos(a1))
    sa = (np.sin(a0), np.sin(a1))
    cb = (np.cos(b0), np.cos(b1))
    sb = (np.sin(b0), np.sin(b1))
    corr = []
    joint = []
    for i in (0, 1):
        for j in (0, 1):
            e = ca[i] * cb[j] - s2a * sa[i] * sb[j]
            p = cell_probabilities(c2a * ca[i], c2a * cb[j], e)
            np.clip(p, 0.0, 1.0, out=p)
            corr.append(e)
            joint.append(entropy_cells(p))
    h_a0 = binary_entropy(np.clip(0.5 * (1 + c2a * ca[0]), 0.0, 1.0))
    h_b0 = binary_entropy(np.clip(0.5 * (1 + c2a * cb[0]), 0.0, 1.0))
    s1 = corr[0] + corr[1] + corr[2] - corr[3]
    t11 = joint[3] + h_a0 + h_b0 - joint[0] - joint[1] - joint[2]
    return np.stack(corr), s1, t11
