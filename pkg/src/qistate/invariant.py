"""Construction of an invariant state from a uniformly bounded cocycle.

The maps Gamma_g(a) = x_{g^-1} g(a) permute the cocycle elements, so the
uniform average d of all x_g is a Gamma-fixed element with phi(d) = 1.
psi(a) = phi(d a) is then a faithful invariant state sandwiched between
phi/lambda and lambda*phi.  Conversely any invertible d implementing an
invariant state reproduces the cocycle as x_g = d g^-1(d^-1) with
||x_g|| <= ||d|| ||d^-1||; when d can be taken positive the state is
strongly quasi-invariant and the orbit of d commutes, [d, g(d)] = 0.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import (AlgebraElement, State, evaluate, matrix_unit_basis,
                      require_faithful, state_from_density)
from .actions import Automorphism, FiniteGroup, apply, inverse, predual
from .cocycle import CocycleTable, build_table, is_strongly_qi, rn_cocycle
from .matcore import PreconditionError, TOL_EQ, TOL_POS
from .reporting import CheckSet, residual_check


def gamma_map(phi: State, g: Automorphism, a: AlgebraElement,
              tol_pos: float = TOL_POS) -> AlgebraElement:
    """Gamma_g(a) = x_{g^-1} g(a)."""
    x = rn_cocycle(phi, inverse(g), tol_pos=tol_pos, verify=False)
    return x @ apply(g, a)


def gamma_properties_check(phi: State, group: FiniteGroup, rng=None,
                           tol_eq: float = TOL_EQ, n_probes: int = 4) -> CheckSet:
    """The five algebraic properties of the Gamma maps, over the whole group."""
    rng = rng or np.random.default_rng(0)
    table = build_table(phi, group)
    checks = CheckSet()
    desc = phi.descriptor

    def probe():
        blocks = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                  for n in desc.block_dims]
        return AlgebraElement(desc, blocks)

    probes = [probe() for _ in range(n_probes)]

    # (i) Gamma_g(x_h) = x_{h g^-1}
    worst = 0.0
    for i, g in enumerate(group.elements):
        for h in range(group.order):
            lhs = gamma_map(phi, g, table.entries[h])
            rhs = table.entries[group.mult[h, group.inv[i]]]
            worst = max(worst, (lhs - rhs).op_norm())
    checks.add(residual_check("gamma_permutes_cocycle", "Gamma_g(x_h) = x_{h g^-1}",
                              worst, tol_eq, table.lambda_bound))

    # (ii) Gamma_{gh} = Gamma_g o Gamma_h
    worst = 0.0
    for i, g in enumerate(group.elements):
        for j, h in enumerate(group.elements):
            gh = group.elements[group.mult[i, j]]
            for a in probes:
                lhs = gamma_map(phi, gh, a)
                rhs = gamma_map(phi, g, gamma_map(phi, h, a))
                worst = max(worst, (lhs - rhs).op_norm() / max(1.0, a.op_norm()))
    checks.add(residual_check("gamma_multiplicative", "Gamma_{gh} = Gamma_g Gamma_h",
                              worst, tol_eq, table.lambda_bound ** 2))

    # (iii) phi o Gamma_g = phi
    worst = 0.0
    for g in group.elements:
        for a in matrix_unit_basis(desc):
            worst = max(worst, abs(evaluate(phi, gamma_map(phi, g, a)) - evaluate(phi, a)))
    checks.add(residual_check("gamma_preserves_state", "phi(Gamma_g(a)) = phi(a)",
                              worst, tol_eq))

    # (iv) Gamma_g(ab) = Gamma_g(a) (x_{g^-1})^-1 Gamma_g(b)
    worst = 0.0
    for i, g in enumerate(group.elements):
        xinv = table.entries[group.inv[i]].inv()
        for a in probes[:2]:
            for b in probes[2:]:
                lhs = gamma_map(phi, g, a @ b)
                rhs = gamma_map(phi, g, a) @ xinv @ gamma_map(phi, g, b)
                worst = max(worst, (lhs - rhs).op_norm()
                            / max(1.0, a.op_norm() * b.op_norm()))
    checks.add(residual_check("gamma_twisted_product",
                              "Gamma_g(ab) = Gamma_g(a) x_{g^-1}^-1 Gamma_g(b)",
                              worst, tol_eq, table.lambda_bound ** 2))

    # (v) Gamma_g(a)* = (x_{g^-1})^-1 Gamma_g(a*) (x_{g^-1})*
    worst = 0.0
    for i, g in enumerate(group.elements):
        x = table.entries[group.inv[i]]
        for a in probes:
            lhs = gamma_map(phi, g, a).adjoint()
            rhs = x.inv() @ gamma_map(phi, g, a.adjoint()) @ x.adjoint()
            worst = max(worst, (lhs - rhs).op_norm() / max(1.0, a.op_norm()))
    checks.add(residual_check("gamma_adjoint",
                              "Gamma_g(a)* = x_{g^-1}^-1 Gamma_g(a*) x_{g^-1}*",
                              worst, tol_eq, table.lambda_bound ** 2))
    return checks


def fixed_density_d(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                    tol_pos: float = TOL_POS, table: CocycleTable = None) -> AlgebraElement:
    """Gamma-fixed element d = average of all cocycle entries; phi(d) = 1.

    Exact for finite groups because Gamma_g permutes the x_h.
    """
    table = table or build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    d = table.entries[0]
    for x in table.entries[1:]:
        d = d + x
    d = (1.0 / group.order) * d
    worst = max((gamma_map(phi, g, d) - d).op_norm() for g in group.elements)
    if worst > tol_eq * max(1.0, d.op_norm()):
        raise PreconditionError(f"averaged element is not Gamma-fixed: residual {worst:.3e}")
    defect = abs(evaluate(phi, d) - 1.0)
    if defect > tol_eq:
        raise PreconditionError(f"phi(d) = 1 fails by {defect:.3e}")
    return d


@dataclass
class InvariantCertificate:
    """Invariant state psi = phi(d .) together with its verification residuals."""

    d: AlgebraElement
    psi: State
    lambda_used: float
    residuals: dict

    @property
    def passed(self) -> bool:
        return all(v for v in self.residuals.get("asserts", {}).values())


def invariant_state(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                    tol_pos: float = TOL_POS) -> InvariantCertificate:
    """Forward construction: d, then psi(a) = phi(d a) as an explicit state.

    The density of psi is the symmetrization of rho d, accepted only when
    the anti-Hermitian part is at roundoff level and the result is PSD.
    """
    require_faithful(phi, tol_pos)
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    d = fixed_density_d(phi, group, tol_eq=tol_eq, tol_pos=tol_pos, table=table)
    rho = phi.density
    rho_d = rho @ d
    skew = (rho_d - rho_d.adjoint()).op_norm()
    if skew > tol_eq * max(1.0, rho_d.op_norm()):
        raise PreconditionError(
            f"rho d has anti-Hermitian part {skew:.3e}; cannot assemble the invariant density"
        )
    rho_psi = 0.5 * (rho_d + rho_d.adjoint())
    mn = rho_psi.min_eig()
    if mn < -tol_pos:
        raise PreconditionError(f"rho d is not PSD: min eigenvalue {mn:.3e}")
    psi = state_from_density(rho_psi, tol_eq=max(tol_eq, 1e-9), tol_pos=tol_pos)

    inv_res = max((predual(g, rho_psi) - rho_psi).op_norm() for g in group.elements)
    gamma_res = max((gamma_map(phi, g, d) - d).op_norm() for g in group.elements)
    # psi is sandwiched between phi/lambda and lambda*phi, hence faithful.
    margin = mn - (phi.density.min_eig() / table.lambda_bound)
    residuals = {
        "gamma_fixed": gamma_res,
        "invariance": inv_res,
        "faithfulness_margin": margin,
        "normalization": abs(evaluate(phi, d) - 1.0),
        "skew_part": skew,
        "min_singular_value_d": d.min_sv(),
        "asserts": {
            "invariance": inv_res <= tol_eq * max(1.0, rho_psi.op_norm()),
            "faithful": mn > tol_pos,
        },
    }
    return InvariantCertificate(d, psi, table.lambda_bound, residuals)


def cocycle_from_d(phi: State, d: AlgebraElement, g: Automorphism,
                   tol_eq: float = TOL_EQ, tol_pos: float = TOL_POS,
                   check_invariance: bool = True) -> AlgebraElement:
    """Converse direction: x_g = d g^-1(d^-1) for an invertible d whose
    state psi = phi(d .) is invariant; checked against the direct cocycle
    and the bound ||x_g|| <= ||d|| ||d^-1||."""
    require_faithful(phi, tol_pos)
    if d.min_sv() <= tol_pos * max(1.0, d.op_norm()):
        raise PreconditionError("d is numerically singular")
    d_inv = d.inv()
    if check_invariance:
        rho_d = phi.density @ d
        rho_psi = 0.5 * (rho_d + rho_d.adjoint())
        worst = max((predual(h, rho_psi) - rho_psi).op_norm()
                    for h in (g, inverse(g)))
        if worst > tol_eq * max(1.0, rho_psi.op_norm()):
            raise PreconditionError(
                f"phi(d .) is not invariant under g: residual {worst:.3e}"
            )
    x = d @ apply(inverse(g), d_inv)
    direct = rn_cocycle(phi, g, tol_pos=tol_pos, verify=False)
    defect = (x - direct).op_norm()
    if defect > tol_eq * max(1.0, direct.op_norm()):
        raise PreconditionError(
            f"d g^-1(d^-1) disagrees with the direct cocycle by {defect:.3e}"
        )
    bound = d.op_norm() * d_inv.op_norm()
    if x.op_norm() > bound + tol_eq * max(1.0, bound):
        raise PreconditionError("cocycle norm exceeds ||d|| ||d^-1||")
    return x


def strong_case_check(phi: State, group: FiniteGroup, tol_eq: float = TOL_EQ,
                      tol_pos: float = TOL_POS) -> CheckSet:
    """Extra structure in the strongly quasi-invariant case: d is positive
    with spectrum in [1/lambda, lambda] and commutes with its orbit."""
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    strong, _ = is_strongly_qi(table, tol_eq=tol_eq, tol_pos=tol_pos)
    if not strong:
        raise PreconditionError("state is not strongly quasi-invariant")
    d = fixed_density_d(phi, group, tol_eq=tol_eq, tol_pos=tol_pos, table=table)
    checks = CheckSet()
    lam = table.lambda_bound
    checks.add(residual_check("d_self_adjoint", "d = d*", d.herm_residual(),
                              tol_eq, d.op_norm()))
    lo, hi = d.min_eig(), max(np.linalg.eigvalsh(b)[-1] for b in d.blocks)
    checks.add(residual_check("d_spectrum_window", "1/lambda <= d <= lambda",
                              max(0.0, 1.0 / lam - lo, hi - lam), tol_eq, lam))
    worst = max((d @ apply(g, d) - apply(g, d) @ d).op_norm() for g in group.elements)
    checks.add(residual_check("d_orbit_commutes", "[d, g(d)] = 0",
                              worst, tol_eq, d.op_norm() ** 2))
    return checks
