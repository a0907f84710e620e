"""Closed-form two-qubit model.

The state is ``cos(alpha)|00> + sin(alpha)|11>`` and every observable is
``sin(theta) sigma_Y + cos(theta) sigma_Z``.  Outcome bit 0 corresponds to
eigenvalue +1 and bit 1 to eigenvalue -1.

The scalar functions also accept numpy arrays of angles, which is what the
scan kernel relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

TWO_PI = 2.0 * math.pi
PROB_TOL = 1e-12


class DomainError(ValueError):
    """Raised for inputs outside the mathematical domain of an operation."""


def _check_finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite input: {v!r}")


@dataclass(frozen=True)
class StateParam:
    alpha: float

    def __post_init__(self):
        _check_finite(self.alpha)
        if not 0.0 <= self.alpha <= math.pi / 4 + 1e-12:
            raise DomainError(f"alpha={self.alpha!r} outside [0, pi/4]")

    @property
    def sin2a(self) -> float:
        return math.sin(2.0 * self.alpha)

    @property
    def cos2a(self) -> float:
        return math.cos(2.0 * self.alpha)


def as_state(state) -> StateParam:
    if isinstance(state, StateParam):
        return state
    return StateParam(float(state))


@dataclass(frozen=True)
class Observable:
    theta: float

    def __post_init__(self):
        _check_finite(self.theta)
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)


@dataclass(frozen=True)
class MeasurementSetting:
    """Four measurement angles (A_0, A_1, B_0, B_1) and the state."""

    theta_a0: Observable
    theta_a1: Observable
    theta_b0: Observable
    theta_b1: Observable
    state: StateParam

    @classmethod
    def from_angles(cls, angles, alpha=math.pi / 4) -> "MeasurementSetting":
        angles = tuple(float(a) for a in angles)
        if len(angles) != 4:
            raise DomainError(f"expected four angles, got {len(angles)}")
        return cls(*(Observable(a) for a in angles), as_state(alpha))

    @property
    def angles(self) -> tuple[float, float, float, float]:
        """Angles of X1..X4 = A_0, A_1, B_0, B_1."""
        return (self.theta_a0.theta, self.theta_a1.theta,
                self.theta_b0.theta, self.theta_b1.theta)

    @property
    def alpha(self) -> float:
        return self.state.alpha

    def with_angles(self, angles) -> "MeasurementSetting":
        return MeasurementSetting.from_angles(angles, self.state)


@dataclass(frozen=True)
class JointDistribution:
    """Outcome table for one context, ordered P(0,0), P(0,1), P(1,0), P(1,1)."""

    p: tuple[float, float, float, float]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        if len(p) != 4:
            raise DomainError("a joint distribution has exactly four cells")
        _check_finite(*p)
        for v in p:
            if v < -PROB_TOL or v > 1.0 + PROB_TOL:
                raise DomainError(f"probability {v!r} outside [0, 1]")
        if abs(sum(p) - 1.0) > PROB_TOL:
            raise DomainError(f"probabilities sum to {sum(p)!r}, not 1")
        object.__setattr__(self, "p", tuple(min(max(v, 0.0), 1.0) for v in p))

    def __iter__(self) -> Iterator[float]:
        return iter(self.p)

    def cell(self, a: int, b: int) -> float:
        return self.p[2 * a + b]

    @property
    def marginal_a(self) -> tuple[float, float]:
        p00, p01, p10, p11 = self.p
        return (p00 + p01, p10 + p11)

    @property
    def marginal_b(self) -> tuple[float, float]:
        p00, p01, p10, p11 = self.p
        return (p00 + p10, p01 + p11)

    @property
    def correlator(self) -> float:
        p00, p01, p10, p11 = self.p
        return p00 + p11 - p01 - p10

    def transpose(self) -> "JointDistribution":
        p00, p01, p10, p11 = self.p
        return JointDistribution((p00, p10, p01, p11))


def correlator(phi_a, phi_b, state):
    """<A (x) B> = cos(phi_a) cos(phi_b) - sin(2 alpha) sin(phi_a) sin(phi_b)."""
    st = as_state(state)
    _check_finite(phi_a, phi_b)
    return (np.cos(phi_a) * np.cos(phi_b)
            - st.sin2a * np.sin(phi_a) * np.sin(phi_b))


def marginal_expectation(phi, state):
    """Single-qubit expectation cos(2 alpha) cos(phi); identical on both qubits."""
    st = as_state(state)
    _check_finite(phi)
    return st.cos2a * np.cos(phi)


def cell_probabilities(m_a, m_b, e):
    """Born-rule cells from marginal expectations and the correlator.

    Works elementwise on arrays; the leading axis of the result indexes the
    cells in P(0,0), P(0,1), P(1,0), P(1,1) order.
    """
    return 0.25 * np.stack([1 + m_a + m_b + e, 1 + m_a - m_b - e,
                            1 - m_a + m_b - e, 1 - m_a - m_b + e])


def joint_distribution(phi_a, phi_b, state) -> JointDistribution:
    st = as_state(state)
    e = float(correlator(phi_a, phi_b, st))
    m_a = float(marginal_expectation(phi_a, st))
    m_b = float(marginal_expectation(phi_b, st))
    return JointDistribution(tuple(cell_probabilities(m_a, m_b, e)))
