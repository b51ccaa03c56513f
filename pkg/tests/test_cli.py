import json

import numpy as np
import pytest

from bihamkit.cli import main
from bihamkit.sampling import (
    random_reduced_point,
    random_regular_phase_point,
    random_spin_coordinates,
)
from bihamkit.serialize import (
    matrix_from_json,
    matrix_to_json,
    phase_point_from_json,
    phase_point_to_json,
    reduced_point_from_json,
    reduced_point_to_json,
    spin_from_json,
    spin_to_json,
)
from bihamkit.verify import VerificationConfig, run_suite


@pytest.fixture
def rng():
    return np.random.default_rng(80)


def test_matrix_json_roundtrip(rng):
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    back = matrix_from_json(matrix_to_json(m))
    assert np.array_equal(back, m)
    with pytest.raises(ValueError):
        matrix_from_json({"re": [[1.0]]})
    with pytest.raises(ValueError):
        matrix_from_json({"re": [[1.0]], "im": [[1.0, 2.0]]})


def test_point_json_roundtrips(rng):
    x = random_regular_phase_point(rng, 3)
    back = phase_point_from_json(phase_point_to_json(x))
    assert np.array_equal(back.g, x.g) and np.array_equal(back.J, x.J)
    y = random_reduced_point(rng, 3)
    back_y = reduced_point_from_json(reduced_point_to_json(y))
    assert np.array_equal(back_y.q, y.q) and np.array_equal(back_y.J, y.J)
    s = random_spin_coordinates(rng, 3)
    back_s = spin_from_json(spin_to_json(s))
    for a, b in zip(s, back_s):
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) < 1e-15


def test_run_suite_subset():
    cfg = VerificationConfig(n=2, trials=5, seed=11, suites=("jacobi-1",))
    report = run_suite(cfg)
    assert len(report.results) == 1
    r = report.results[0]
    assert r.suite == "jacobi-1"
    assert r.max_residual < r.threshold
    assert report.passed


def test_run_suite_rejects_bad_config():
    with pytest.raises(ValueError):
        VerificationConfig(trials=0)
    with pytest.raises(ValueError):
        run_suite(VerificationConfig(suites=("no-such-suite",)))


def test_run_suite_fd_step_is_live():
    # a coarser probe step must change the finite-difference residuals
    a = run_suite(VerificationConfig(n=2, trials=3, seed=5,
                                     suites=("reduction-oracle",)))
    b = run_suite(VerificationConfig(n=2, trials=3, seed=5, fd_step=1e-4,
                                     suites=("reduction-oracle",)))
    assert a.results[0].max_residual != b.results[0].max_residual


def test_run_suite_deterministic():
    cfg = VerificationConfig(n=2, trials=4, seed=99,
                             suites=("jacobi-2", "recursion"))
    a = run_suite(cfg).to_json_text()
    b = run_suite(cfg).to_json_text()
    assert a == b


def test_cli_verify(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["verify", "--n", "2", "--trials", "3", "--seed", "7",
                 "--suites", "jacobi-1,recursion", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["pass"] is True
    names = {r["suite"] for r in report["suites"]}
    assert names == {"jacobi-1", "recursion"}
    for r in report["suites"]:
        assert set(r) == {"suite", "trials", "max_residual", "threshold", "pass"}


def test_cli_verify_deterministic(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["verify", "--n", "2", "--trials", "3", "--seed", "5",
                     "--suites", "appendix-b", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_verify_csv(tmp_path):
    out = tmp_path / "report.csv"
    assert main(["verify", "--n", "2", "--trials", "2",
                 "--suites", "recursion", "--format", "csv",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "suite,trials,max_residual,threshold,pass"
    assert lines[1].startswith("recursion,")


def test_cli_verify_failure_exit_code(tmp_path):
    # an absurdly tight override forces a verification failure (exit 1)
    out = tmp_path / "r.json"
    code = main(["verify", "--n", "2", "--trials", "2",
                 "--suites", "reduction-oracle", "--tol-rel", "1e-18",
                 "--out", str(out)])
    assert code == 1


def test_cli_unknown_verb(capsys):
    assert main(["frobnicate"]) == 2


def test_cli_unknown_suite(capsys):
    assert main(["verify", "--suites", "bogus"]) == 2


def test_cli_flow(tmp_path, rng):
    x = random_regular_phase_point(rng, 2, j_scale=0.2)
    src = tmp_path / "point.json"
    src.write_text(json.dumps(phase_point_to_json(x)))
    out = tmp_path / "flow.csv"
    code = main(["flow", "--input", str(src), "--k", "1", "--kind", "real",
                 "--t", "5.0", "--steps", "5", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    head = lines[0].split(",")
    assert head[0] == "t"
    assert "H_1" in head and "Ht_2" in head and "drift_Jtilde" in head
    assert len(lines) == 7
    last = dict(zip(head, lines[-1].split(",")))
    assert float(last["drift_Jtilde"]) < 1e-12
    # optional full-point columns
    out2 = tmp_path / "flow_points.csv"
    assert main(["flow", "--input", str(src), "--points",
                 "--out", str(out2)]) == 0
    head2 = out2.read_text().splitlines()[0].split(",")
    assert "g_re_11" in head2 and "J_im_22" in head2
    # numeric mode integrates under the chosen bracket; spectral flows keep
    # the hierarchy conserved to integrator accuracy
    out3 = tmp_path / "flow_numeric.csv"
    assert main(["flow", "--input", str(src), "--numeric", "--t", "1.0",
                 "--steps", "20", "--bracket", "canonical",
                 "--out", str(out3)]) == 0
    lines3 = out3.read_text().strip().splitlines()
    last3 = dict(zip(lines3[0].split(","), lines3[-1].split(",")))
    assert float(last3["drift_H"]) < 1e-6
    assert float(last3["drift_Jtilde"]) < 1e-6


def test_cli_flow_singular_g(tmp_path, capsys):
    bad = {"g": {"re": [[0.0, 0.0], [0.0, 0.0]], "im": [[0.0] * 2] * 2},
           "J": {"re": [[0.0, 0.0], [0.0, 0.0]], "im": [[0.0] * 2] * 2}}
    src = tmp_path / "bad.json"
    src.write_text(json.dumps(bad))
    assert main(["flow", "--input", str(src)]) == 2
    assert "singular g" in capsys.readouterr().err


def test_cli_reduce_and_spin(tmp_path, rng):
    x = random_regular_phase_point(rng, 2)
    src = tmp_path / "point.json"
    src.write_text(json.dumps(phase_point_to_json(x)))
    out = tmp_path / "reduced.json"
    assert main(["reduce", "--input", str(src), "--out", str(out)]) == 0
    y = reduced_point_from_json(json.loads(out.read_text()))
    assert y.q[0] > y.q[1]

    spin_out = tmp_path / "spin.json"
    assert main(["spin", "--input", str(out), "--out", str(spin_out)]) == 0
    data = json.loads(spin_out.read_text())
    assert "spin" in data
    assert data["energy_two_spin"] == pytest.approx(data["energy_quadratic"],
                                                    abs=1e-10)
    # and back
    back_out = tmp_path / "back.json"
    spin_payload = tmp_path / "spin_only.json"
    spin_payload.write_text(json.dumps(data["spin"]))
    assert main(["spin", "--input", str(spin_payload), "--from-spin",
                 "--out", str(back_out)]) == 0
    round_trip = json.loads(back_out.read_text())["reduced"]
    y2 = reduced_point_from_json(round_trip)
    assert np.max(np.abs(y2.J - y.J)) < 1e-10


def test_cli_rflow(tmp_path, rng):
    y = random_reduced_point(rng, 2, j_scale=0.5)
    src = tmp_path / "reduced.json"
    src.write_text(json.dumps(reduced_point_to_json(y)))
    out = tmp_path / "rflow.csv"
    assert main(["rflow", "--input", str(src), "--k", "2", "--t", "0.4",
                 "--steps", "40", "--samples", "4", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    head = lines[0].split(",")
    assert head[:3] == ["t", "q_1", "q_2"]
    assert "eig_re_1" in head and "h_2_drift" in head
    assert len(lines) == 6
    last = dict(zip(head, lines[-1].split(",")))
    assert float(last["h_1_drift"]) < 1e-8


def test_cli_bracket(tmp_path, rng, capsys):
    x = random_regular_phase_point(rng, 2)
    src = tmp_path / "point.json"
    src.write_text(json.dumps(phase_point_to_json(x)))
    assert main(["bracket", "--bracket", "quadratic", "--f", "H:1",
                 "--h", "H:2", "--point", str(src)]) == 0
    val = float(capsys.readouterr().out.strip())
    assert abs(val) < 1e-10  # spectral functions commute
    assert main(["bracket", "--f", "nope", "--h", "H:1",
                 "--point", str(src)]) == 2


def test_cli_double_check(tmp_path):
    out = tmp_path / "double.json"
    code = main(["double-check", "--n", "2", "--seed", "3", "--pairs", "4",
                 "--points", "2", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["pass"] is True
    assert data["n=2"]["max_residual"] < 1e-5


def test_cli_missing_input_file(capsys):
    assert main(["flow", "--input", "/no/such/file.json"]) == 2
    assert "cannot read JSON" in capsys.readouterr().err


def test_cli_spin_constraint_violation(tmp_path, capsys):
    bad = {
        "q": [1.0, 0.0],
        "p": [0.0, 0.0],
        "xi_l": {"re": [[0.0, 0.0], [0.0, 0.0]], "im": [[1.0, 0.0], [0.0, 0.0]]},
        "xi_r": {"re": [[0.0, 0.0], [0.0, 0.0]], "im": [[1.0, 0.0], [0.0, 0.0]]},
    }
    src = tmp_path / "bad_spin.json"
    src.write_text(json.dumps(bad))
    assert main(["spin", "--input", str(src), "--from-spin"]) == 2
    assert "coupling" in capsys.readouterr().err


def test_cli_rflow_irregular_point(tmp_path, capsys):
    bad = {"q": [0.5, 0.5],
           "J": {"re": [[0.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}}
    src = tmp_path / "bad_reduced.json"
    src.write_text(json.dumps(bad))
    assert main(["rflow", "--input", str(src)]) == 2
    assert "irregular" in capsys.readouterr().err


def test_seed_env_fallback(monkeypatch, tmp_path):
    monkeypatch.setenv("BIHAMKIT_SEED", "42")
    from bihamkit.cli import build_parser

    args = build_parser().parse_args(["verify"])
    assert args.seed == 42
