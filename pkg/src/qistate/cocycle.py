"""Radon-Nikodym cocycles of a quasi-invariant state under a finite group.

For a faithful state phi with density rho and an automorphism g, the
cocycle element x_g is the unique solution of phi(g(a)) = phi(x_g a); at
finite dimension x_g = rho^-1 g^-1(rho).  The table of all x_g carries the
uniform bound lambda = max_g max(||x_g||, ||x_g^-1||), the chain rule
x_{hg} = x_g g^-1(x_h), the inverse formula, and the adjoint relation
rho x_g = x_g* rho.  A state is strongly quasi-invariant when every x_g is
self-adjoint; then the x_g are positive, commute pairwise, lie in the
centralizer of phi, and their spectra sit in [1/lambda, lambda].
"""

from dataclasses import dataclass

from . import matcore
from .algebra import (AlgebraElement, State, evaluate, matrix_unit_basis,
                      require_faithful)
from .actions import Automorphism, FiniteGroup, apply, inverse, predual
from .matcore import PreconditionError, TOL_EQ, TOL_POS
from .reporting import Check, CheckSet, residual_check


def rn_cocycle(phi: State, g: Automorphism, tol_pos: float = TOL_POS,
               tol_eq: float = TOL_EQ, verify: bool = True) -> AlgebraElement:
    """x_g = rho^-1 g^-1(rho), checked against phi(g(a)) = phi(x_g a)."""
    require_faithful(phi, tol_pos)
    rho = phi.density
    x = rho.inv() @ predual(g, rho)
    if verify:
        worst = 0.0
        for a in matrix_unit_basis(phi.descriptor):
            worst = max(worst, abs(evaluate(phi, apply(g, a)) - evaluate(phi, x @ a)))
        if worst > tol_eq * max(1.0, x.op_norm()):
            raise PreconditionError(
                f"cocycle defect {worst:.3e}: state/automorphism pair is inconsistent"
            )
    return x


@dataclass
class CocycleTable:
    """All cocycle elements of a group, indexed like the group elements."""

    phi: State
    group: FiniteGroup
    entries: list
    lambda_bound: float

    def __getitem__(self, i: int) -> AlgebraElement:
        return self.entries[i]


def build_table(phi: State, group: FiniteGroup, tol_pos: float = TOL_POS,
                tol_eq: float = TOL_EQ, user_lambda: float = None) -> CocycleTable:
    """Compute every x_g and the uniform bound lambda.

    When ``user_lambda`` is given, raises if it fails to dominate the
    computed bound.
    """
    entries, lam = [], 0.0
    for g in group:
        x = rn_cocycle(phi, g, tol_pos=tol_pos, tol_eq=tol_eq)
        if x.min_sv() <= tol_pos * max(1.0, x.op_norm()):
            raise PreconditionError("cocycle element is numerically singular")
        lam = max(lam, x.op_norm(), x.inv().op_norm())
        entries.append(x)
    if user_lambda is not None and user_lambda < lam - tol_eq:
        raise PreconditionError(
            f"supplied bound {user_lambda} is below the computed bound {lam:.6g}"
        )
    return CocycleTable(phi, group, entries, float(lam))


def verify_cocycle_identity(table: CocycleTable, tol_eq: float = TOL_EQ) -> Check:
    """Chain rule over all pairs: x_{g2 g1} = x_{g1} g1^-1(x_{g2})."""
    grp, worst, scale = table.group, 0.0, 1.0
    for i1, g1 in enumerate(grp.elements):
        g1inv = grp.elements[grp.inv[i1]]
        for i2 in range(grp.order):
            lhs = table.entries[grp.mult[i2, i1]]
            rhs = table.entries[i1] @ apply(g1inv, table.entries[i2])
            worst = max(worst, (lhs - rhs).op_norm())
            scale = max(scale, lhs.op_norm())
    return residual_check("cocycle_identity", "x_{hg} = x_g g^-1(x_h)",
                          worst, tol_eq, scale)


def verify_inverse_formula(table: CocycleTable, tol_eq: float = TOL_EQ) -> Check:
    """Matrix inverse of x_g against g^-1(x_{g^-1})."""
    grp, worst, scale = table.group, 0.0, 1.0
    for i, g in enumerate(grp.elements):
        lhs = table.entries[i].inv()
        rhs = apply(inverse(g), table.entries[grp.inv[i]])
        worst = max(worst, (lhs - rhs).op_norm())
        scale = max(scale, lhs.op_norm())
    return residual_check("inverse_formula", "x_g^-1 = g^-1(x_{g^-1})",
                          worst, tol_eq, scale)


def verify_adjoint_relation(table: CocycleTable, tol_eq: float = TOL_EQ) -> Check:
    """rho x_g = x_g* rho, the density form of phi(x_g a) = phi(a x_g*)."""
    rho, worst, scale = table.phi.density, 0.0, 1.0
    for x in table.entries:
        worst = max(worst, (rho @ x - x.adjoint() @ rho).op_norm())
        scale = max(scale, x.op_norm())
    return residual_check("adjoint_relation", "rho x_g = x_g* rho",
                          worst, tol_eq, scale)


def is_strongly_qi(table: CocycleTable, tol_eq: float = TOL_EQ,
                   tol_pos: float = TOL_POS):
    """Self-adjointness of every x_g, plus the consequences when it holds.

    Returns (strong?, CheckSet).  When strong, the checks assert positive
    definiteness, pairwise commutation, centralizer membership
    [rho, x_g] = 0, and spectra inside [1/lambda, lambda].
    """
    checks = CheckSet()
    herm = max(x.herm_residual() for x in table.entries)
    scale = max(x.op_norm() for x in table.entries)
    strong = herm <= tol_eq * max(1.0, scale)
    checks.add(residual_check("self_adjoint", "x_g = x_g*", herm, tol_eq, scale,
                              asserted=False,
                              detail="decides strong quasi-invariance"))
    if not strong:
        return False, checks

    lam = table.lambda_bound
    min_spec = min(x.min_eig() for x in table.entries)
    max_spec = max(max(matcore.herm_eig(b)[0][-1] for b in x.blocks)
                   for x in table.entries)
    checks.add(residual_check("positive", "x_g > 0",
                              max(0.0, tol_pos - min_spec), tol_pos))
    checks.add(residual_check(
        "spectrum_window", "1/lambda <= x_g <= lambda",
        max(0.0, 1.0 / lam - min_spec, max_spec - lam), tol_eq, lam))
    comm = 0.0
    for i, x in enumerate(table.entries):
        for y in table.entries[i + 1:]:
            comm = max(comm, (x @ y - y @ x).op_norm())
    checks.add(residual_check("pairwise_commuting", "[x_g, x_h] = 0",
                              comm, tol_eq, scale * scale))
    rho = table.phi.density
    cent = max((rho @ x - x @ rho).op_norm() for x in table.entries)
    checks.add(residual_check("centralizer", "[rho, x_g] = 0",
                              cent, tol_eq, scale))
    return checks.passed, checks


def sz_domination(phi: State, a: AlgebraElement, probes,
                  tol_eq: float = TOL_EQ, tol_pos: float = TOL_POS) -> Check:
    """Domination of a positive form: phi(a x) <= ||a|| phi(x) for x >= 0.

    Requires the form x |-> phi(a x) to be positive, i.e. rho a Hermitian
    PSD; ``probes`` is an iterable of PSD elements.
    """
    rho = phi.density
    m = rho @ a
    herm = m.herm_residual()
    if herm > tol_eq * max(1.0, m.op_norm()):
        raise PreconditionError(f"L_a phi not positive: rho a Hermiticity {herm:.3e}")
    sym = 0.5 * (m + m.adjoint())
    mn = sym.min_eig()
    if mn < -tol_pos * max(1.0, m.op_norm()):
        raise PreconditionError(f"L_a phi not positive: min eigenvalue {mn:.3e}")
    bound = a.op_norm()
    worst = 0.0
    for x in probes:
        worst = max(worst, (evaluate(phi, a @ x) - bound * evaluate(phi, x)).real)
    return residual_check("sz_domination", "phi(a x) <= ||a|| phi(x) for x >= 0",
                          max(0.0, worst), tol_eq, bound)


def sandwich_check(table: CocycleTable, probes, tol_eq: float = TOL_EQ) -> Check:
    """Two-sided bounds (1/lambda) phi(a) <= phi(x_g a), phi(a (x_g^-1)*) <= lambda phi(a)."""
    phi, lam = table.phi, table.lambda_bound
    worst = 0.0
    for a in probes:
        base = evaluate(phi, a).real
        for x in table.entries:
            for val in (evaluate(phi, x @ a).real,
                        evaluate(phi, a @ x.inv().adjoint()).real):
                worst = max(worst, base / lam - val, val - lam * base)
    return residual_check("sandwich", "phi(a)/lambda <= phi(x_g a), phi(a (x_g^-1)*) <= lambda phi(a)",
                          max(0.0, worst), tol_eq, lam)


def random_psd_probe(rng, descriptor, scale: float = 1.0) -> AlgebraElement:
    """Random PSD element, normalized to unit operator norm."""
    blocks = []
    for n in descriptor.block_dims:
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks.append(m @ matcore.dagger(m))
    x = AlgebraElement(descriptor, blocks)
    return (scale / max(x.op_norm(), 1e-300)) * x
