"""Command-line front end: load instances, run check suites, emit JSON reports.

Instance files are JSON: complex entries as [re, im] pairs, block indices
0-based.  Reports are deterministic for a fixed input and seed (no
timestamps).  Exit codes: 0 pass, 1 check failure, 2 validation error,
3 precondition violation.
"""

import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .algebra import AlgebraDescriptor, AlgebraElement, State, identity
from .actions import Automorphism, close_group
from .cocycle import (build_table, is_strongly_qi, random_psd_probe,
                      sandwich_check, sz_domination, verify_adjoint_relation,
                      verify_cocycle_identity, verify_inverse_formula)
from .commutative import (AxBElement, QuadConfig, symmetric_grid,
                          unboundedness_witness, verify_axb,
                          verify_translation_identities)
from .expectation import (commutant_f0, cond_expectation, e0_projection,
                          expectation_checks, verify_ks)
from .invariant import gamma_properties_check, invariant_state, strong_case_check
from .matcore import InputError, PreconditionError, TOL_EQ, TOL_POS
from .reporting import Check, CheckSet
from .standard_form import (gamma_factorization, group_unitaries,
                            lemma_chain_checks, verify_covariance,
                            verify_representation)
from .trace import (invariant_trace, is_center_ergodic, trace_density,
                    trace_invariance_check, verify_density_relations)

log = logging.getLogger("qistate")

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_PRECONDITION = 3


class InstanceFormatError(ValueError):
    """Instance file failed validation; message carries the field path."""


# -- instance (de)serialization ----------------------------------------------

def _complex_entry(value, path):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise InstanceFormatError(f"{path}: expected a [re, im] pair")
    return complex(value[0], value[1])


def _matrix(value, n, path):
    if not isinstance(value, list) or len(value) != n:
        raise InstanceFormatError(f"{path}: expected {n} rows")
    out = np.empty((n, n), dtype=complex)
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise InstanceFormatError(f"{path}[{r}]: expected {n} entries")
        for c, entry in enumerate(row):
            out[r, c] = _complex_entry(entry, f"{path}[{r}][{c}]")
    return out


def matrix_to_json(m) -> list:
    return [[[float(np.real(v)), float(np.imag(v))] for v in row] for row in np.asarray(m)]


def element_to_json(x: AlgebraElement) -> list:
    return [matrix_to_json(b) for b in x.blocks]


def parse_instance(data: dict):
    """Build (descriptor, state, generators, tolerances, cap) from JSON data."""
    if not isinstance(data, dict):
        raise InstanceFormatError(": instance must be a JSON object")
    try:
        dims = data["algebra"]["block_dims"]
    except (KeyError, TypeError):
        raise InstanceFormatError("algebra.block_dims: missing")
    if (not isinstance(dims, list) or not dims
            or not all(isinstance(d, int) and d >= 1 for d in dims)):
        raise InstanceFormatError("algebra.block_dims: need a list of positive integers")
    desc = AlgebraDescriptor(tuple(dims))

    tols = data.get("tolerances", {}) or {}
    tol_eq = float(tols.get("tol_eq", TOL_EQ))
    tol_pos = float(tols.get("tol_pos", TOL_POS))
    cap = int(data.get("closure_cap", 10000))

    density_json = data.get("state", {}).get("density")
    if not isinstance(density_json, list) or len(density_json) != desc.num_blocks:
        raise InstanceFormatError(
            f"state.density: expected {desc.num_blocks} blocks")
    blocks = [_matrix(b, n, f"state.density[{i}]")
              for i, (b, n) in enumerate(zip(density_json, desc.block_dims))]
    try:
        element = AlgebraElement(desc, blocks)
        phi = State(desc, element, tol_eq=tol_eq, tol_pos=tol_pos)
    except InputError as exc:
        raise InstanceFormatError(f"state.density: {exc}")

    gens_json = data.get("group", {}).get("generators")
    if not isinstance(gens_json, list) or not gens_json:
        raise InstanceFormatError("group.generators: need at least one generator")
    gens = []
    for gi, gen in enumerate(gens_json):
        path = f"group.generators[{gi}]"
        perm = gen.get("perm")
        if not isinstance(perm, list) or len(perm) != desc.num_blocks:
            raise InstanceFormatError(f"{path}.perm: expected {desc.num_blocks} indices")
        us_json = gen.get("unitaries")
        if not isinstance(us_json, list) or len(us_json) != desc.num_blocks:
            raise InstanceFormatError(f"{path}.unitaries: expected {desc.num_blocks} blocks")
        us = [_matrix(u, n, f"{path}.unitaries[{i}]")
              for i, (u, n) in enumerate(zip(us_json, desc.block_dims))]
        try:
            gens.append(Automorphism(desc, perm, us))
        except InputError as exc:
            raise InstanceFormatError(f"{path}: {exc}")
    return desc, phi, gens, {"tol_eq": tol_eq, "tol_pos": tol_pos}, cap


def instance_to_json(phi: State, generators, tol_eq: float = TOL_EQ,
                     tol_pos: float = TOL_POS, closure_cap: int = 10000) -> dict:
    return {
        "algebra": {"block_dims": list(phi.descriptor.block_dims)},
        "state": {"density": element_to_json(phi.density)},
        "group": {"generators": [
            {"perm": list(g.perm),
             "unitaries": [matrix_to_json(u) for u in g.unitaries]}
            for g in generators]},
        "tolerances": {"tol_eq": tol_eq, "tol_pos": tol_pos},
        "closure_cap": closure_cap,
    }


def load_instance(path: str):
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f": not valid JSON ({exc})")
    return parse_instance(data), digest


# -- report assembly ----------------------------------------------------------

def make_report(command: str, checks, summary: dict, digest: str = None) -> dict:
    entries = [c.to_dict() for c in checks]
    return {
        "tool": "qistate",
        "version": __version__,
        "command": command,
        "input_digest": digest,
        "pass": all(e["pass"] for e in entries if e["asserted"]),
        "checks": entries,
        "summary": summary,
    }


def emit_report(report: dict, out_path: str = None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    print(text)


# -- subcommands ---------------------------------------------------------------

def _base_objects(args):
    (desc, phi, gens, tols, cap), digest = load_instance(args.input)
    if args.tol_eq is not None:
        tols["tol_eq"] = args.tol_eq
    if args.tol_pos is not None:
        tols["tol_pos"] = args.tol_pos
    cap = args.closure_cap or cap
    group = close_group(gens, cap=cap, tol=tols["tol_eq"])
    log.info("closed group of order %d on blocks %s", group.order, desc.block_dims)
    return desc, phi, group, tols, digest


def cmd_check(args) -> int:
    desc, phi, group, tols, digest = _base_objects(args)
    tol_eq, tol_pos = tols["tol_eq"], tols["tol_pos"]
    rng = np.random.default_rng(args.seed)
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    checks = CheckSet()
    checks.add(verify_cocycle_identity(table, tol_eq))
    checks.add(verify_inverse_formula(table, tol_eq))
    checks.add(verify_adjoint_relation(table, tol_eq))
    probes = [random_psd_probe(rng, desc) for _ in range(8)] + [identity(desc)]
    checks.add(sandwich_check(table, probes, tol_eq))
    strong, strong_checks = is_strongly_qi(table, tol_eq, tol_pos)
    checks.extend(strong_checks.checks)
    # positive-form domination, probed with each cocycle element
    worst = None
    for x in table.entries:
        c = sz_domination(phi, x, probes, tol_eq, tol_pos)
        worst = c if worst is None or c.residual > worst.residual else worst
    checks.add(worst)
    summary = {
        "lambda": table.lambda_bound,
        "group_order": group.order,
        "strong_qi": bool(strong),
        "fixed_algebra_dim": None,
        "trace_weights": None,
    }
    emit_report(make_report("check", checks, summary, digest), args.out)
    return EXIT_PASS if checks.passed else EXIT_CHECK_FAILURE


def cmd_invariant(args) -> int:
    desc, phi, group, tols, digest = _base_objects(args)
    tol_eq, tol_pos = tols["tol_eq"], tols["tol_pos"]
    rng = np.random.default_rng(args.seed)
    checks = CheckSet()
    checks.extend(gamma_properties_check(phi, group, rng, tol_eq).checks)
    cert = invariant_state(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    res = cert.residuals
    checks.add(Check("gamma_fixed_d", "Gamma_g(d) = d", res["gamma_fixed"],
                     tol_eq * max(1.0, cert.d.op_norm()),
                     res["gamma_fixed"] <= tol_eq * max(1.0, cert.d.op_norm())))
    checks.add(Check("psi_invariant", "psi o g = psi", res["invariance"],
                     tol_eq, res["asserts"]["invariance"]))
    checks.add(Check("psi_faithful", "psi >= phi/lambda stays faithful",
                     max(0.0, -res["faithfulness_margin"]), tol_eq,
                     res["asserts"]["faithful"]
                     and -res["faithfulness_margin"] <= tol_eq))
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    strong, _ = is_strongly_qi(table, tol_eq, tol_pos)
    if strong:
        checks.extend(strong_case_check(phi, group, tol_eq, tol_pos).checks)
    summary = {
        "lambda": cert.lambda_used,
        "group_order": group.order,
        "strong_qi": bool(strong),
        "d": element_to_json(cert.d),
        "psi_density": element_to_json(cert.psi.density),
        "min_singular_value_d": res["min_singular_value_d"],
    }
    emit_report(make_report("invariant", checks, summary, digest), args.out)
    return EXIT_PASS if checks.passed else EXIT_CHECK_FAILURE


def cmd_implement(args) -> int:
    desc, phi, group, tols, digest = _base_objects(args)
    tol_eq, tol_pos = tols["tol_eq"], tols["tol_pos"]
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    strong, _ = is_strongly_qi(table, tol_eq, tol_pos)
    us = group_unitaries(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    checks = CheckSet()
    n = desc.dim
    worst_iso = max(float(np.linalg.norm(np.conj(u.matrix.T) @ u.matrix - np.eye(n), 2))
                    for u in us)
    worst_sur = max(float(np.linalg.norm(u.matrix @ np.conj(u.matrix.T) - np.eye(n), 2))
                    for u in us)
    checks.add(Check("unitary_isometry", "U_g* U_g = 1", worst_iso, tol_eq,
                     worst_iso <= tol_eq))
    checks.add(Check("unitary_surjective", "U_g U_g* = 1", worst_sur, tol_eq,
                     worst_sur <= tol_eq))
    checks.add(verify_covariance(phi, group, tol_eq, tol_pos, unitaries=us))
    checks.add(verify_representation(phi, group, strong, tol_eq, tol_pos, unitaries=us))
    checks.extend(lemma_chain_checks(phi, group, strong, tol_eq, tol_pos).checks)
    cert = invariant_state(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    _, _, gamma_checks = gamma_factorization(phi, cert.psi, tol_eq, tol_pos, group)
    checks.extend(gamma_checks.checks)
    summary = {
        "lambda": table.lambda_bound,
        "group_order": group.order,
        "strong_qi": bool(strong),
        "l2_dimension": n,
        "representation_deviation": checks["representation"].residual,
    }
    emit_report(make_report("implement", checks, summary, digest), args.out)
    return EXIT_PASS if checks.passed else EXIT_CHECK_FAILURE


def cmd_expectation(args) -> int:
    desc, phi, group, tols, digest = _base_objects(args)
    tol_eq, tol_pos = tols["tol_eq"], tols["tol_pos"]
    rng = np.random.default_rng(args.seed)
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    strong, _ = is_strongly_qi(table, tol_eq, tol_pos)
    cert = invariant_state(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    Phi = cond_expectation(cert.psi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    checks = CheckSet()
    checks.extend(expectation_checks(cert.psi, Phi, rng, tol_eq).checks)
    e0 = e0_projection(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    checks.add(Check("e0_projection", "E0 = E0* = E0^2",
                     e0.projection_residual, tol_eq,
                     e0.projection_residual <= tol_eq))
    f0_report = commutant_f0(phi, group, tol_eq=tol_eq, tol_pos=tol_pos)
    checks.add(Check("f0_identity", "F0 = [B' E0] = 1",
                     f0_report.identity_residual, tol_eq,
                     (f0_report.identity_residual <= tol_eq) if strong else True,
                     asserted=strong,
                     detail="asserted only in the strong bounded case"))
    if strong:
        checks.extend(verify_ks(phi, group, tol_eq, tol_pos).checks)
    summary = {
        "lambda": table.lambda_bound,
        "group_order": group.order,
        "strong_qi": bool(strong),
        "fixed_algebra_dim": Phi.fixed.dimension,
        "e0_rank": int(round(float(np.real(np.trace(e0.matrix))))),
        "commutant_dim": f0_report.commutant_dim,
    }
    emit_report(make_report("expectation", checks, summary, digest), args.out)
    return EXIT_PASS if checks.passed else EXIT_CHECK_FAILURE


def cmd_trace(args) -> int:
    desc, phi, group, tols, digest = _base_objects(args)
    tol_eq, tol_pos = tols["tol_eq"], tols["tol_pos"]
    rng = np.random.default_rng(args.seed)
    checks = CheckSet()
    ergodic = is_center_ergodic(group)
    checks.add(Check("center_ergodic", "fixed central elements are scalars",
                     0.0 if ergodic else 1.0, 0.5, ergodic))
    tau = invariant_trace(group, tol_eq)
    table = build_table(phi, group, tol_pos=tol_pos, tol_eq=tol_eq)
    c = trace_density(phi, tau, tol_eq=tol_eq, tol_pos=tol_pos)
    probes = [random_psd_probe(rng, desc) for _ in range(6)]
    checks.add(trace_invariance_check(tau, group, probes, tol_eq))
    checks.extend(verify_density_relations(phi, table, tau, tol_eq).checks)
    pair_worst = 0.0
    for a in probes:
        for b in probes[:3]:
            pair_worst = max(pair_worst, abs(tau(a @ b) - tau(b @ a)))
    checks.add(Check("trace_property", "tau(ab) = tau(ba)", pair_worst,
                     tol_eq, pair_worst <= tol_eq))
    summary = {
        "lambda": table.lambda_bound,
        "group_order": group.order,
        "trace_weights": [float(w) for w in tau.weights],
        "density": element_to_json(c),
    }
    emit_report(make_report("trace", checks, summary, digest), args.out)
    return EXIT_PASS if checks.passed else EXIT_CHECK_FAILURE


def cmd_counterexample(args) -> int:
    rng = np.random.default_rng(args.seed)
    quad = QuadConfig(radius=args.grid_r)
    grid = symmetric_grid(args.grid_r, args.grid_n)
    checks = CheckSet()

    def bump(s):
        s = np.asarray(s, dtype=float)
        return np.exp(-0.5 * s * s)

    worst_chain = 0.0
    for _ in range(5):
        t1, t2 = rng.uniform(-4.0, 4.0, size=2)
        cs = verify_translation_identities(float(t1), float(t2), grid)
        worst_chain = max(worst_chain, cs["translation_chain_rule"].residual)
    checks.add(Check("translation_chain_rule",
                     "x_{t1+t2}(s) = x_{t1}(s) x_{t2}(s+t1)",
                     worst_chain, 1e-12, worst_chain <= 1e-12))
    qi = verify_translation_identities(1.0, 0.5, grid, f=bump, f_sup=1.0, quad=quad)
    checks.add(qi["translation_quasi_invariance"])

    for t in (1.0, 3.0, 10.0):
        w = unboundedness_witness(t, radius=args.grid_r, n=args.grid_n)
        checks.add(Check(f"unbounded_witness_t{t:g}",
                         "sup x_t and sup 1/x_t reach 1 + t^2",
                         w["witness"] - min(w["sup_x"], w["sup_x_inv"]),
                         1e-9, w["passed"]))

    worst_chain = 0.0
    for _ in range(5):
        e1 = AxBElement(float(rng.uniform(0.5, 3.0)), float(rng.uniform(-2.0, 2.0)))
        e2 = AxBElement(float(rng.uniform(0.5, 3.0)), float(rng.uniform(-2.0, 2.0)))
        cs = verify_axb(e1, e2, grid)
        worst_chain = max(worst_chain, cs["axb_chain_rule"].residual)
    checks.add(Check("axb_chain_rule", "affine cocycle chain rule",
                     worst_chain, 1e-12, worst_chain <= 1e-12))
    axb_qi = verify_axb(AxBElement(2.0, 0.0), AxBElement(0.5, 1.0), grid,
                        f=bump, f_sup=1.0, quad=quad)
    checks.add(axb_qi["axb_quasi_invariance"])

    summary = {"grid_radius": args.grid_r, "grid_points": args.grid_n,
               "seed": args.seed}
    emit_report(make_report("counterexample", checks, summary, None), args.out)
    return EXIT_PASS if checks.passed else EXIT_CHECK_FAILURE


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qistate",
        description="Check quasi-invariant state identities on block algebras.")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "check": cmd_check,
        "invariant": cmd_invariant,
        "implement": cmd_implement,
        "expectation": cmd_expectation,
        "trace": cmd_trace,
        "counterexample": cmd_counterexample,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        if name != "counterexample":
            p.add_argument("--input", required=True, help="instance JSON file")
        p.add_argument("--tol-eq", type=float, default=None)
        p.add_argument("--tol-pos", type=float, default=None)
        p.add_argument("--closure-cap", type=int, default=None)
        p.add_argument("--grid-R", dest="grid_r", type=float, default=100.0)
        p.add_argument("--grid-N", dest="grid_n", type=int, default=1001)
        p.add_argument("--out", default=None, help="write the report here as well")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("QISTATE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        stream=sys.stderr, format="%(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InstanceFormatError as exc:
        print(f"validation error at {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PreconditionError, InputError) as exc:
        print(f"precondition violation: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
