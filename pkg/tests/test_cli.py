import json

import pytest

from tasep_pgf.cli import ExperimentConfig, main, run
from tasep_pgf.errors import ConfigError

DATA = __import__("pathlib").Path(__file__).parent / "data"
POISSON = '{"kind": "continuous_poisson", "params": {"beta": 1}}'
BERNOULLI = '{"kind": "bernoulli", "params": {"p": 0.5}}'


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_model_check_reports_unit_poisson(capsys):
    code, out, _ = _run(capsys, ["model", "check", "--model", POISSON])
    rep = json.loads(out)
    assert code == 0
    assert rep["gamma_derivs"]["denom"] == pytest.approx(1.0)
    assert rep["cubic_positivity"]["passed"] and rep["contour_conditions"]["passed"]


def test_joint_dist_matches_oracle_file(capsys):
    oracle = json.loads((DATA / "joint_bernoulli_oracle.json").read_text())
    for ev in oracle["events"]:
        argv = ["joint-dist", "--model", json.dumps(oracle["model"]),
                "--ic=" + ",".join(map(str, ev["initial"])), "--t", str(ev["t"]),
                "--n", ",".join(map(str, ev["n"])), "--a=" + ",".join(map(str, ev["a"]))]
        code, out, _ = _run(capsys, argv)
        assert code == 0
        res = json.loads(out)
        assert res["probability"] == pytest.approx(ev["probability"], abs=1e-9)
        assert "depth" in res["diagnostics"]


def test_invalid_model_exits_with_config_code(capsys):
    code, _, err = _run(capsys, ["model", "check", "--model", '{"kind": "bogus"}'])
    assert code == 2 and "invalid model" in err


def test_invalid_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "airy", "unexpected": 1}))
    assert main(["run", str(path)]) == 2
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"command": "nope"})


def test_assumption_violation_exit_code(capsys):
    code, _, _ = _run(capsys, ["scaling-coeffs", "--model", '{"kind": "discrete_pmf", "pmf": [0.5, 0, 0, 0, 0.5]}'])
    assert code == 4


def test_domain_error_exit_code(capsys):
    code, _, _ = _run(capsys, ["transition", "--model", BERNOULLI, "--from", "1,0", "--to", "2,0", "--t", "1.5"])
    assert code == 4


def test_transition_table_with_oracle(capsys):
    code, out, _ = _run(capsys, ["transition-table", "--model", BERNOULLI, "--from", "1,0", "--t", "2", "--oracle"])
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "target,probability,enumeration"
    for line in lines[1:]:
        *_, p, q = line.split(",")
        assert float(p) == pytest.approx(float(q), abs=1e-12)


def test_simulate_is_reproducible(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        argv = ["simulate", "--model", POISSON, "--ic=-1,-2,-3", "--t", "1", "--samples", "50", "--seed", "3",
                "--observe", "n=1,3", "--out", str(path)]
        assert main(argv) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].splitlines()[0] == b"sample,X1,X3"


def test_height_profile_csv(capsys):
    code, out, _ = _run(capsys, ["height", "--model", POISSON, "--ic", '{"kind": "step", "count": 30}', "--t", "0",
                                 "--at=-2..2"])
    assert code == 0
    assert [int(r.split(",")[2]) for r in out.strip().splitlines()[1:]] == [-2, -1, 0, -1, -2]


def test_scaling_coeffs_and_airy(capsys):
    code, out, _ = _run(capsys, ["scaling-coeffs", "--model", POISSON])
    assert code == 0 and json.loads(out)["drift"] == pytest.approx(1.0)
    code, out, _ = _run(capsys, ["airy", "--z=-1,0,1"])
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_converge_table(capsys):
    code, out, _ = _run(capsys, ["converge", "--model", POISSON, "--kernel", "A1", "--eps", "0.1,0.05",
                                 "--point", "1,0,0,0"])
    rows = out.strip().splitlines()
    assert code == 0 and len(rows) == 3
    errors = [float(r.split(",")[12]) for r in rows[1:]]
    assert errors[1] < errors[0]


def test_config_round_trip(tmp_path):
    out = tmp_path / "coeffs.json"
    cfg = ExperimentConfig("scaling-coeffs", model=json.loads(POISSON), out=str(out))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert main(["run", str(path)]) == 0
    first = out.read_bytes()
    assert run(ExperimentConfig.load(path)) == 0
    assert out.read_bytes() == first


def test_reproduce_negative_control(capsys):
    code, out, err = _run(capsys, ["reproduce", "--only", "1,2"])
    assert code == 0 and json.loads(out)["passed"]
    code, out, err = _run(capsys, ["reproduce", "--only", "1,2", "--set-tol", "2=0"])
    rows = json.loads(out)["criteria"]
    assert code == 1
    assert [r["passed"] for r in rows] == [True, False]
    assert "[FAIL]  2" in err
