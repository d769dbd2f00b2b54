"""Invariant traces for actions that are ergodic on the center.

A weighted sum of block traces tau(a) = sum_i w_i tr(a_i) is invariant
exactly when the weights are constant along the orbits of the block
permutations.  Ergodicity of the center action is transitivity of that
permutation action, and then the invariant trace is unique up to scale.
The density of a state phi with respect to tau is c_i = rho_i / w_i and
satisfies the predual relations g(c) = c x_{g^-1} and x_g* c = c x_g.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, State, evaluate, matrix_unit_basis, require_faithful
from .actions import FiniteGroup, apply
from .cocycle import CocycleTable
from .matcore import PreconditionError, TOL_EQ, TOL_POS
from .reporting import Check, CheckSet, residual_check


@dataclass
class TraceFunctional:
    """tau(a) = sum_i weights[i] tr(a_i), all weights positive."""

    descriptor: object
    weights: np.ndarray

    def __call__(self, a: AlgebraElement) -> complex:
        return complex(sum(w * np.trace(b) for w, b in zip(self.weights, a.blocks)))

    def density_of(self, phi: State) -> AlgebraElement:
        return trace_density(phi, self)


def is_center_ergodic(group: FiniteGroup) -> bool:
    """True iff the block-permutation action is transitive."""
    return len(group.block_orbits()) == 1


def _invariance_solution_space(group: FiniteGroup):
    """Kernel of the weight constraints w_{perm(i)} = w_i over all g."""
    k = group.descriptor.num_blocks
    rows = []
    for g in group.elements:
        p = np.zeros((k, k))
        for j in range(k):
            p[g.perm[j], j] = 1.0
        rows.append(p - np.eye(k))
    stacked = np.vstack(rows)
    _, s, vh = np.linalg.svd(stacked)
    tol = 1e-12 * max(1.0, s[0] if len(s) else 1.0)
    rank = int(np.sum(s > tol))
    return vh.T[:, rank:]


def invariant_trace(group: FiniteGroup, tol_eq: float = TOL_EQ) -> TraceFunctional:
    """The invariant trace with weight 1 on block 0; requires ergodicity.

    Uniqueness is certified by the invariance-constraint system having a
    one-dimensional solution space.
    """
    space = _invariance_solution_space(group)
    dim = space.shape[1]
    if not is_center_ergodic(group) or dim != 1:
        raise PreconditionError(f"trace not unique: solution space has dimension {dim}")
    w = np.real(space[:, 0])
    w = w / w[0]
    if np.min(w) <= 0:
        raise PreconditionError("invariant weight vector is not positive")
    if np.max(np.abs(w - 1.0)) <= tol_eq:
        # Transitivity forces equal weights; snap away the SVD roundoff.
        w = np.ones_like(w)
    return TraceFunctional(group.descriptor, w)


def trace_density(phi: State, tau: TraceFunctional, tol_eq: float = TOL_EQ,
                  tol_pos: float = TOL_POS) -> AlgebraElement:
    """c with phi(a) = tau(c a): c_i = rho_i / w_i, verified on a basis."""
    require_faithful(phi, tol_pos)
    c = AlgebraElement(phi.descriptor,
                       [b / w for b, w in zip(phi.density.blocks, tau.weights)])
    worst = max(abs(evaluate(phi, a) - tau(c @ a)) for a in matrix_unit_basis(phi.descriptor))
    if worst > tol_eq:
        raise PreconditionError(f"density defect {worst:.3e} against the trace pairing")
    return c


def verify_density_relations(phi: State, table: CocycleTable, tau: TraceFunctional,
                             tol_eq: float = TOL_EQ) -> CheckSet:
    """Predual and intertwining relations of the trace density with the cocycle."""
    c = trace_density(phi, tau, tol_eq=tol_eq)
    group = table.group
    checks = CheckSet()
    scale = max(1.0, table.lambda_bound * c.op_norm())
    w_pred, w_int = 0.0, 0.0
    for i, g in enumerate(group.elements):
        x_inv_g = table.entries[group.inv[i]]
        # predual of g^-1 acting on densities is g itself
        w_pred = max(w_pred, (apply(g, c) - c @ x_inv_g).op_norm())
        x = table.entries[i]
        w_int = max(w_int, (x.adjoint() @ c - c @ x).op_norm())
    checks.add(residual_check("trace_density_predual", "(g^-1)^*(c) = c x_{g^-1}",
                              w_pred, tol_eq, scale))
    checks.add(residual_check("trace_density_intertwine", "x_g* c = c x_g",
                              w_int, tol_eq, scale))
    return checks


def trace_invariance_check(tau: TraceFunctional, group: FiniteGroup, probes,
                           tol_eq: float = TOL_EQ) -> Check:
    worst = 0.0
    for a in probes:
        base = tau(a)
        for g in group.elements:
            worst = max(worst, abs(tau(apply(g, a)) - base))
    return residual_check("trace_invariance", "tau(g(a)) = tau(a)", worst, tol_eq)
