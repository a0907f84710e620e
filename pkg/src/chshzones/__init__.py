"""Correlative and entropic CHSH inequalities on bipartite qubit settings."""

from .measures import (ContextQuad, EntropicVariants, SignVariants, binary_entropy,
                       chsh_e_value, chsh_value, chsh_variants, entropic_variants,
                       joint_entropy, marginal_entropy)
from .quantum import (DomainError, JointDistribution, MeasurementSetting, Observable,
                      StateParam, correlator, joint_distribution, marginal_expectation)
from .scenario import (ObservablePermutation, PartyAssignment, ZoneReport,
                       classify_permutation, classify_zone, contexts_for_assignment,
                       evaluate, evaluate_assignment, forbidden_sweep, lhv_feasible,
                       triple_violation_check)

__version__ = "0.1.0"
