"""Fixed-point algebra, averaging conditional expectation, and the two
projections that characterize it on the Hilbert-Schmidt space.

The fixed-point algebra B is the joint kernel of (g - id) over the group;
the conditional expectation is the uniform group average, which is the
unique invariant mean for a finite group.  E0 projects onto the vectors
fixed by every implementing unitary U_g, and F0 projects onto the span of
B' E0; for a strongly quasi-invariant state with bounded cocycle F0 is
the identity.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import (AlgebraDescriptor, AlgebraElement, State, evaluate,
                      from_block, left_mult_matrix, matrix_unit_basis,
                      require_faithful, unvec, vec)
from .actions import FiniteGroup, apply, predual
from .cocycle import build_table, is_strongly_qi
from .invariant import invariant_state
from .matcore import PreconditionError, TOL_EQ, TOL_POS, dagger
from .reporting import Check, CheckSet, residual_check
from .standard_form import L2Operator, group_unitaries


def _action_matrix(g, descriptor) -> np.ndarray:
    """Matrix of a |-> g(a) on Hilbert-Schmidt coordinates."""
    n = descriptor.dim
    out = np.zeros((n, n), dtype=complex)
    offsets = np.cumsum([0] + [d * d for d in descriptor.block_dims])
    for j, d in enumerate(descriptor.block_dims):
        i = g.perm[j]
        u = g.unitaries[i]
        # column-major vec: vec(u a u*) = (conj(u) kron u) vec(a)
        out[offsets[i]:offsets[i] + d * d, offsets[j]:offsets[j] + d * d] = \
            np.kron(np.conj(u), u)
    return out


def _kernel_onb(stacked: np.ndarray, dim: int, cutoff: float) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of a stacked constraint map."""
    if stacked.size == 0:
        return np.eye(dim)
    _, s, vh = np.linalg.svd(stacked)
    tol = cutoff * max(1.0, s[0] if len(s) else 1.0)
    rank = int(np.sum(s > tol))
    return dagger(vh)[:, rank:]


@dataclass
class FixedAlgebra:
    """Hilbert-Schmidt orthonormal basis of the fixed points of the action."""

    descriptor: AlgebraDescriptor
    basis: list
    closure_residual: float

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def project(self, a: AlgebraElement) -> AlgebraElement:
        out = 0.0 * a
        for b in self.basis:
            out = out + complex(np.vdot(vec(b), vec(a))) * b
        return out

    def span_distance(self, a: AlgebraElement) -> float:
        return (a - self.project(a)).hs_norm()


def fixed_algebra(group: FiniteGroup, tol_eq: float = TOL_EQ,
                  tol_pos: float = TOL_POS) -> FixedAlgebra:
    """Joint kernel of (g - id) over the group, with closure verification."""
    desc = group.descriptor
    n = desc.dim
    rows = [_action_matrix(g, desc) - np.eye(n) for g in group.elements[1:]]
    basis_mat = _kernel_onb(np.vstack(rows) if rows else np.empty((0, n)), n, tol_pos)
    basis = [unvec(desc, basis_mat[:, j]) for j in range(basis_mat.shape[1])]

    fa = FixedAlgebra(desc, basis, 0.0)
    worst = 0.0
    for b in basis:
        worst = max(worst, fa.span_distance(b.adjoint()))
        for c in basis:
            worst = max(worst, fa.span_distance(b @ c))
    if worst > tol_eq * max(1.0, max((b.op_norm() for b in basis), default=1.0) ** 2):
        raise PreconditionError(f"fixed space is not closed under product/adjoint: {worst:.3e}")
    fa.closure_residual = worst
    return fa


@dataclass
class ConditionalExpectation:
    """Uniform group average onto the fixed-point algebra."""

    group: FiniteGroup
    fixed: FixedAlgebra

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        out = 0.0 * a
        for g in self.group.elements:
            out = out + apply(g, a)
        return (1.0 / self.group.order) * out


def cond_expectation(psi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                     tol_pos: float = TOL_POS) -> ConditionalExpectation:
    """The averaging expectation, admissible only for an invariant faithful psi."""
    require_faithful(psi, tol_pos)
    worst = max((predual(g, psi.density) - psi.density).op_norm()
                for g in group.elements)
    if worst > tol_eq * max(1.0, psi.density.op_norm()):
        raise PreconditionError(f"state is not invariant: residual {worst:.3e}")
    return ConditionalExpectation(group, fixed_algebra(group, tol_eq, tol_pos))


def expectation_checks(psi: State, Phi: ConditionalExpectation, rng=None,
                       tol_eq: float = TOL_EQ, n_probes: int = 4) -> CheckSet:
    """Defining properties: range, idempotence, unitality, positivity,
    invariance of psi, bimodule law over the fixed basis."""
    rng = rng or np.random.default_rng(0)
    desc = psi.descriptor
    checks = CheckSet()

    def probe():
        blocks = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                  for n in desc.block_dims]
        return AlgebraElement(desc, blocks)

    probes = [probe() for _ in range(n_probes)]
    ident = AlgebraElement(desc, [np.eye(n) for n in desc.block_dims])

    checks.add(residual_check("range", "Phi(a) is a fixed point",
                              max(Phi.fixed.span_distance(Phi(a)) for a in probes),
                              tol_eq))
    checks.add(residual_check("idempotent", "Phi(Phi(a)) = Phi(a)",
                              max((Phi(Phi(a)) - Phi(a)).op_norm() for a in probes),
                              tol_eq))
    checks.add(residual_check("unital", "Phi(1) = 1",
                              (Phi(ident) - ident).op_norm(), tol_eq))
    pos_defect = 0.0
    for a in probes:
        p = a @ a.adjoint()
        pos_defect = max(pos_defect, max(0.0, -Phi(p).min_eig() / max(1.0, p.op_norm())))
    checks.add(residual_check("positive", "Phi(a* a) >= 0", pos_defect, tol_eq))
    checks.add(residual_check(
        "state_invariance", "psi(Phi(a)) = psi(a)",
        max(abs(evaluate(psi, Phi(a)) - evaluate(psi, a))
            for a in matrix_unit_basis(desc)), tol_eq))
    worst = 0.0
    for b in Phi.fixed.basis:
        for c in Phi.fixed.basis:
            for a in probes[:2]:
                worst = max(worst, (Phi(b @ a @ c) - b @ Phi(a) @ c).op_norm()
                            / max(1.0, a.op_norm()))
    checks.add(residual_check("bimodule", "Phi(b a c) = b Phi(a) c for fixed b, c",
                              worst, tol_eq))
    return checks


def e0_projection(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                  tol_pos: float = TOL_POS, unitaries=None) -> L2Operator:
    """Orthogonal projection onto the joint fixed vectors of all U_g."""
    require_faithful(phi, tol_pos)
    us = unitaries or group_unitaries(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    n = phi.descriptor.dim
    rows = [u.matrix - np.eye(n) for u in us[1:]]
    q = _kernel_onb(np.vstack(rows) if rows else np.empty((0, n)), n, tol_pos)
    e0 = q @ dagger(q)
    res = float(np.linalg.norm(e0 @ e0 - e0, 2))
    return L2Operator(phi.descriptor, e0, projection_residual=res)


def verify_ks(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
              tol_pos: float = TOL_POS) -> CheckSet:
    """Characterizations of the expectation in the strong bounded case:
    the compression law Phi(b) E0 = E0 L_b E0, the state decomposition
    phi(a) = psi(Phi(d^-1 a)), and the group-mean formula."""
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    strong, _ = is_strongly_qi(table, tol_eq=tol_eq, tol_pos=tol_pos)
    if not strong:
        raise PreconditionError("state is not strongly quasi-invariant")
    cert = invariant_state(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    psi, d = cert.psi, cert.d
    if d.min_sv() <= tol_pos * max(1.0, d.op_norm()):
        raise PreconditionError("invariant-state element d is singular")
    Phi = cond_expectation(psi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    us = group_unitaries(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    e0 = e0_projection(phi, group, tol_eq=tol_eq, tol_pos=tol_pos, unitaries=us)

    checks = CheckSet()
    basis = matrix_unit_basis(phi.descriptor)

    worst = 0.0
    for b in basis:
        lhs = left_mult_matrix(Phi(b)) @ e0.matrix
        rhs = e0.matrix @ left_mult_matrix(b) @ e0.matrix
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    checks.add(residual_check("compression", "Phi(b) E0 = E0 b E0", worst, tol_eq))

    d_inv = d.inv()
    worst = max(abs(evaluate(phi, a) - evaluate(psi, Phi(d_inv @ a))) for a in basis)
    checks.add(residual_check("state_decomposition",
                              "phi(a) = psi(Phi(d^-1 a))", worst, tol_eq))

    worst = 0.0
    for b in basis:
        mean = np.zeros((phi.descriptor.dim,) * 2, dtype=complex)
        for i in range(group.order):
            mean += us[group.inv[i]].matrix @ left_mult_matrix(b) @ us[i].matrix
        mean /= group.order
        worst = max(worst, float(np.linalg.norm(mean - left_mult_matrix(Phi(b)), 2)))
    checks.add(residual_check("mean_formula",
                              "Phi(b) = mean_g U_{g^-1} b U_g on the Hilbert-Schmidt space",
                              worst, tol_eq))
    return checks


def uniqueness_probe(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                     tol_pos: float = TOL_POS) -> Check:
    """Solve the compression law for each basis element and compare with the
    averaging expectation; unique solution within the linear class."""
    Phi = cond_expectation(invariant_state(phi, group).psi, group,
                           tol_eq=tol_eq, tol_pos=tol_pos)
    e0 = e0_projection(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    basis = matrix_unit_basis(phi.descriptor)
    n = phi.descriptor.dim
    design = np.column_stack([(left_mult_matrix(b) @ e0.matrix).ravel()
                              for b in basis])
    worst = 0.0
    for b in basis:
        target = (e0.matrix @ left_mult_matrix(b) @ e0.matrix).ravel()
        coeff, *_ = np.linalg.lstsq(design, target, rcond=None)
        m = 0.0 * b
        for c, bb in zip(coeff, basis):
            m = m + complex(c) * bb
        worst = max(worst, (m - Phi(b)).op_norm())
    return residual_check("expectation_unique",
                          "the compression law determines Phi", worst, tol_eq)


@dataclass
class CommutantReport:
    f0: L2Operator
    commutant_dim: int
    is_identity: bool
    identity_residual: float
    commutation_residual: float


def commutant_f0(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                 tol_pos: float = TOL_POS, n_cap: int = 256) -> CommutantReport:
    """Projection onto span(B' E0 L2) for B the fixed-point algebra.

    B' inside all operators on the Hilbert-Schmidt space is solved from the
    commutator constraints blockwise: an operator commuting with every left
    multiplication from B is built from intertwiners between the B-actions
    on the block column spaces, tensored with arbitrary column-index maps.
    """
    desc = phi.descriptor
    n = desc.dim
    if n > n_cap:
        raise PreconditionError(f"commutant computation too large: dim {n} > cap {n_cap}")
    fa = fixed_algebra(group, tol_eq=tol_eq, tol_pos=tol_pos)
    e0 = e0_projection(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)

    dims = desc.block_dims
    k = len(dims)
    # Intertwiner spaces between the row actions of the fixed algebra.
    homs = {}
    commutant_dim = 0
    for i in range(k):
        for j in range(k):
            ni, nj = dims[i], dims[j]
            rows = []
            for b in fa.basis:
                rows.append(np.kron(np.eye(nj), b.blocks[i])
                            - np.kron(b.blocks[j].T, np.eye(ni)))
            basis_mat = _kernel_onb(np.vstack(rows), ni * nj, tol_pos)
            qs = [basis_mat[:, t].reshape((ni, nj), order="F")
                  for t in range(basis_mat.shape[1])]
            homs[(i, j)] = qs
            commutant_dim += ni * nj * len(qs)

    # Accumulate span{T xi : T in B', xi in ran E0} by incremental
    # orthonormalization; images of the structured basis of B' are
    # Q xi_j P^T placed in block i.
    w, v = np.linalg.eigh(e0.matrix)
    range_vecs = [v[:, m] for m in range(n) if w[m] > 0.5]
    onb = []

    def absorb(vector):
        u = vector.astype(complex)
        for q in onb:
            u = u - np.vdot(q, u) * q
        nr = np.linalg.norm(u)
        if nr > 1e-10:
            onb.append(u / nr)
        return len(onb)

    done = False
    for r in range_vecs:
        xi = unvec(desc, r)
        for i in range(k):
            for j in range(k):
                for q in homs[(i, j)]:
                    img = q @ xi.blocks[j]              # columns span the reachable set
                    for col in range(img.shape[1]):
                        for pos in range(dims[i]):
                            block = np.zeros((dims[i], dims[i]), dtype=complex)
                            block[:, pos] = img[:, col]
                            if absorb(vec(from_block(desc, i, block))) == n:
                                done = True
                                break
                        if done:
                            break
                    if done:
                        break
                if done:
                    break
            if done:
                break
        if done:
            break

    f0_mat = np.zeros((n, n), dtype=complex)
    for q in onb:
        f0_mat += np.outer(q, np.conj(q))
    res = float(np.linalg.norm(f0_mat @ f0_mat - f0_mat, 2))
    f0 = L2Operator(desc, f0_mat, projection_residual=res)
    id_res = float(np.linalg.norm(f0_mat - np.eye(n), 2))

    # Spot-check that the structured commutant really commutes with L_B.
    comm_res = 0.0
    for (i, j), qs in homs.items():
        for q in qs[:2]:
            for b in fa.basis:
                comm_res = max(comm_res, float(np.linalg.norm(
                    b.blocks[i] @ q - q @ b.blocks[j])))
    return CommutantReport(f0, commutant_dim, id_res <= tol_eq * 1.0, id_res, comm_res)
