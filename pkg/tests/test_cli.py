import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qistate.cli import (EXIT_PASS, EXIT_PRECONDITION, EXIT_VALIDATION,
                         InstanceFormatError, instance_to_json, main,
                         parse_instance)
from qistate.instances import (m2m2_swap_instance, nonstrong_instance,
                               qubit_instance, write_bundled_instances)

REPO_INSTANCES = os.path.join(os.path.dirname(__file__), "..", "instances")


@pytest.fixture(scope="module")
def qubit_file(tmp_path_factory):
    inst = qubit_instance()
    path = tmp_path_factory.mktemp("inst") / "qubit.json"
    path.write_text(json.dumps(instance_to_json(inst.phi, inst.generators)))
    return str(path)


def run_cli(argv):
    return main(argv)


def test_instance_roundtrip():
    inst = qubit_instance()
    data = instance_to_json(inst.phi, inst.generators)
    desc, phi, gens, tols, cap = parse_instance(json.loads(json.dumps(data)))
    assert desc.block_dims == (2,)
    assert (phi.density - inst.phi.density).op_norm() < 1e-15
    assert len(gens) == 1 and cap == 10000


def test_parse_rejects_bad_trace(qubit_file):
    data = json.load(open(qubit_file))
    data["state"]["density"][0][0][0] = [0.5, 0.0]
    with pytest.raises(InstanceFormatError, match="state.density"):
        parse_instance(data)


def test_parse_rejects_bad_entry(qubit_file):
    data = json.load(open(qubit_file))
    data["state"]["density"][0][0][1] = "oops"
    with pytest.raises(InstanceFormatError, match=r"state.density\[0\]\[0\]\[1\]"):
        parse_instance(data)


def test_parse_rejects_bad_generator(qubit_file):
    data = json.load(open(qubit_file))
    data["group"]["generators"][0]["perm"] = [0, 1]
    with pytest.raises(InstanceFormatError, match=r"group.generators\[0\].perm"):
        parse_instance(data)


def test_cmd_check_passes(qubit_file, capsys, tmp_path):
    out = str(tmp_path / "report.json")
    code = run_cli(["check", "--input", qubit_file, "--out", out])
    assert code == EXIT_PASS
    report = json.load(open(out))
    assert report["pass"] is True
    assert report["summary"]["lambda"] == pytest.approx(2.0)
    assert report["summary"]["group_order"] == 2
    assert report["summary"]["strong_qi"] is True
    assert all("law" in c and "residual" in c for c in report["checks"])


def test_cmd_check_invariant_state_lambda_one(tmp_path):
    # flip-invariant density: every cocycle is the identity, lambda = 1
    inst = qubit_instance()
    data = instance_to_json(inst.phi, inst.generators)
    data["state"]["density"][0] = [[[0.5, 0.0], [0.0, 0.0]],
                                   [[0.0, 0.0], [0.5, 0.0]]]
    path = tmp_path / "inv.json"
    path.write_text(json.dumps(data))
    out = str(tmp_path / "report.json")
    assert run_cli(["check", "--input", str(path), "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    assert report["summary"]["lambda"] == pytest.approx(1.0)


def test_cmd_check_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    data = instance_to_json(qubit_instance().phi, qubit_instance().generators)
    data["state"]["density"][0][0][0] = [0.9, 0.0]
    bad.write_text(json.dumps(data))
    assert run_cli(["check", "--input", str(bad)]) == EXIT_VALIDATION
    assert "state.density" in capsys.readouterr().err


def test_cmd_check_precondition_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    data = instance_to_json(qubit_instance().phi, qubit_instance().generators)
    data["state"]["density"][0] = [[[1.0, 0.0], [0.0, 0.0]],
                                   [[0.0, 0.0], [0.0, 0.0]]]
    bad.write_text(json.dumps(data))
    assert run_cli(["check", "--input", str(bad)]) == EXIT_PRECONDITION
    assert "faithful" in capsys.readouterr().err


def test_cmd_invariant_serializes_outputs(qubit_file, tmp_path):
    out = str(tmp_path / "report.json")
    assert run_cli(["invariant", "--input", qubit_file, "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    d = np.array([[complex(*e) for e in row] for row in report["summary"]["d"][0]])
    assert np.allclose(d, np.diag([1.5, 0.75]))
    rho_psi = np.array([[complex(*e) for e in row]
                        for row in report["summary"]["psi_density"][0]])
    assert np.allclose(rho_psi, np.eye(2) / 2)


def test_cmd_implement(qubit_file, tmp_path):
    out = str(tmp_path / "report.json")
    assert run_cli(["implement", "--input", qubit_file, "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    assert report["summary"]["representation_deviation"] < 1e-12


def test_cmd_implement_nonstrong_reports_deviation(tmp_path):
    inst = nonstrong_instance()
    path = tmp_path / "ns.json"
    path.write_text(json.dumps(instance_to_json(inst.phi, inst.generators)))
    out = str(tmp_path / "report.json")
    assert run_cli(["implement", "--input", str(path), "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    rep = [c for c in report["checks"] if c["name"] == "representation"][0]
    assert rep["asserted"] is False
    assert rep["residual"] > 1e-6          # recorded, not asserted


def test_cmd_expectation(qubit_file, tmp_path):
    out = str(tmp_path / "report.json")
    assert run_cli(["expectation", "--input", qubit_file, "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    assert report["summary"]["fixed_algebra_dim"] == 2
    f0 = [c for c in report["checks"] if c["name"] == "f0_identity"][0]
    assert f0["pass"] and f0["residual"] < 1e-9


def test_cmd_trace(qubit_file, tmp_path):
    out = str(tmp_path / "report.json")
    assert run_cli(["trace", "--input", qubit_file, "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    assert report["summary"]["trace_weights"] == [1.0]


def test_cmd_trace_non_ergodic_exits_3(tmp_path, capsys):
    # two blocks, inner-only action: center has a fixed projection
    inst = m2m2_swap_instance()
    data = instance_to_json(inst.phi, inst.generators)
    data["group"]["generators"][0]["perm"] = [0, 1]   # drop the swap
    path = tmp_path / "ne.json"
    path.write_text(json.dumps(data))
    assert run_cli(["trace", "--input", str(path)]) == EXIT_PRECONDITION
    assert "not unique" in capsys.readouterr().err


def test_cmd_counterexample(tmp_path):
    out = str(tmp_path / "report.json")
    assert run_cli(["counterexample", "--grid-N", "301", "--out", out]) == EXIT_PASS
    report = json.load(open(out))
    names = {c["name"] for c in report["checks"]}
    assert "translation_chain_rule" in names
    assert "unbounded_witness_t3" in names
    assert "axb_chain_rule" in names


def test_reports_are_deterministic(qubit_file, tmp_path):
    out1, out2 = str(tmp_path / "r1.json"), str(tmp_path / "r2.json")
    run_cli(["check", "--input", qubit_file, "--seed", "7", "--out", out1])
    run_cli(["check", "--input", qubit_file, "--seed", "7", "--out", out2])
    assert open(out1).read() == open(out2).read()


def test_bundled_instances_pass_check(tmp_path):
    paths = write_bundled_instances(str(tmp_path / "bundle"))
    assert len(paths) == 4
    for p in paths:
        assert run_cli(["check", "--input", p]) == EXIT_PASS


def test_repo_ships_bundled_instances():
    for name in ("qubit.json", "c2_swap.json", "m2m2_swap.json",
                 "nonstrong_weyl3.json"):
        path = os.path.join(REPO_INSTANCES, name)
        assert os.path.exists(path), f"missing bundled instance {name}"
        parse_instance(json.load(open(path)))


def test_console_entry_point_env_logging(qubit_file):
    env = dict(os.environ, QISTATE_LOG="INFO")
    proc = subprocess.run(
        [sys.executable, "-m", "qistate.cli", "check", "--input", qubit_file],
        capture_output=True, text=True, env=env)
    assert proc.returncode == EXIT_PASS
    assert "closed group of order 2" in proc.stderr
