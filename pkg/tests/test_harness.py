import json
import math

import numpy as np
import pytest

import momex.harness as har
import momex.problems as prob
from momex.optimizer import TrajectoryRecord


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_parse_minimal_run():
    cfg = har.parse_config(
        ["--alg", "sg", "--problem", "datafit", "--synthetic", "10", "--iters", "5"]
    )
    assert cfg.algorithm == "sg"
    assert cfg.iters == 5
    assert cfg.seed == 0
    assert cfg.noise == "none"
    assert cfg.x0 == "ones"
    assert cfg.format == "csv"


def test_parse_tolerates_leading_subcommand():
    cfg = har.parse_config(
        ["run", "--alg", "sg", "--problem", "datafit", "--synthetic", "4", "--iters", "1"]
    )
    assert cfg.algorithm == "sg"


def test_sigma_implies_scalar_noise():
    cfg = har.parse_config(
        ["--alg", "sg", "--problem", "datafit", "--synthetic", "4",
         "--iters", "1", "--sigma", "2.5"]
    )
    assert cfg.noise == "scalar-gaussian-envelope"
    assert cfg.sigma == 2.5


def test_config_file_merge(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(
        {"alg": "sg", "problem": "datafit", "synthetic": 6, "iters": 2}
    ))
    cfg = har.parse_config([], config_file=str(f))
    assert cfg.iters == 2
    cfg = har.parse_config(["--iters", "9"], config_file=str(f))
    assert cfg.iters == 9  # explicit flags win over the file

    f.write_text(json.dumps({"alg": "sg", "problem": "datafit",
                             "synthetic": 6, "iters": 2, "wat": 1}))
    with pytest.raises(har.ConfigError, match="wat"):
        har.parse_config([], config_file=str(f))


def test_validation_messages_name_the_flags():
    with pytest.raises(har.ConfigError, match="--p"):
        har.parse_config(["--alg", "mem", "--problem", "datafit",
                          "--synthetic", "6", "--iters", "1"])
    with pytest.raises(har.ConfigError, match="q"):
        har.parse_config(["--alg", "mem", "--p", "3", "--q", "1",
                          "--problem", "datafit", "--synthetic", "6", "--iters", "1"])
    with pytest.raises(har.ConfigError, match="gamma"):
        har.parse_config(["--alg", "mem", "--p", "3", "--gamma", "0.5",
                          "--problem", "datafit", "--synthetic", "6", "--iters", "1"])
    with pytest.raises(har.ConfigError, match="gamma"):
        har.parse_config(["--alg", "nigt", "--gamma", "1.5", "--eta", "0.1",
                          "--problem", "datafit", "--synthetic", "6", "--iters", "1"])
    with pytest.raises(har.ConfigError):
        har.parse_config(["--alg", "sg", "--problem", "datafit", "--iters", "1"])
    with pytest.raises(har.ConfigError):
        har.parse_config(["--alg", "sg", "--problem", "datafit", "--synthetic", "6",
                          "--dataset", "x.csv", "--iters", "1"])
    with pytest.raises(har.ConfigError, match="--dim"):
        har.parse_config(["--alg", "sg", "--problem", "quadratic", "--iters", "1"])


def test_x0_parsing():
    base = ["--alg", "sg", "--problem", "quadratic", "--dim", "3", "--iters", "1"]
    _, _, x0 = har.build_problem(har.parse_config(base))
    np.testing.assert_array_equal(x0, np.ones(3))
    _, _, x0 = har.build_problem(har.parse_config(base + ["--x0", "zeros"]))
    np.testing.assert_array_equal(x0, np.zeros(3))
    _, _, x0 = har.build_problem(har.parse_config(base + ["--x0", "1.5,2.5,-1"]))
    np.testing.assert_array_equal(x0, np.array([1.5, 2.5, -1.0]))
    with pytest.raises(har.ConfigError):
        har.build_problem(har.parse_config(base + ["--x0", "1.5,2.5"]))


def test_mem_p3_uses_special_schedule():
    cfg = har.parse_config(["--alg", "mem", "--p", "3",
                            "--problem", "datafit", "--synthetic", "6", "--iters", "1"])
    kind = har.build_kind(cfg)
    assert kind.schedule.mode == "p3-special"
    assert kind.schedule.q == 2


# ---------------------------------------------------------------------------
# record serialization
# ---------------------------------------------------------------------------

def test_csv_round_trip_is_exact():
    records = [
        TrajectoryRecord(0, 1.0 / 3.0, 1.0, 2.2250738585072014e-308, 7.1, 2, 0.0),
        TrajectoryRecord(1, math.pi, 0.5, 1e6, -0.0, 4, 0.125),
    ]
    text = har.records_to_csv(records)
    assert text.splitlines()[0] == har.CSV_HEADER
    back = har.parse_records(text)
    assert list(back) == records


def test_emit_csv_and_json(tmp_path):
    records = [TrajectoryRecord(0, 2.0, 1.0, 0.5, 0.5, 1, 0.0)]
    cfg = har.RunConfig(algorithm="sg", problem="datafit", synthetic=4, iters=1)

    cpath = tmp_path / "out.csv"
    har.emit(records, str(cpath), format="csv")
    assert cpath.read_text().startswith("k,f_val,")

    jpath = tmp_path / "out.json"
    har.emit(records, str(jpath), format="json", config=cfg, summary={"a": 1})
    doc = json.loads(jpath.read_text())
    assert set(doc) == {"config", "summary", "records"}
    assert doc["records"][0]["f_val"] == 2.0

    with pytest.raises(OSError, match="no/such"):
        har.emit(records, str(tmp_path / "no" / "such" / "dir.csv"))


def test_run_experiment_deterministic_and_summarized():
    cfg = har.RunConfig(
        algorithm="mem", p=3, q=2, problem="datafit", synthetic=8,
        sigma=2.0, noise="scalar-gaussian-envelope", iters=25, seed=5,
    )
    rec_a, sum_a = har.run_experiment(cfg)
    rec_b, sum_b = har.run_experiment(cfg)
    mask = lambda recs: [
        (r.k, r.f_val, r.rel_obj, r.grad_norm, r.mom_err, r.oracle_calls)
        for r in recs
    ]
    assert mask(rec_a) == mask(rec_b)
    assert sum_a["oracle_calls"] == 50
    assert sum_a["final_rel_obj"] == rec_a[-1].rel_obj
    assert sum_a["min_grad_norm"] <= rec_a[0].grad_norm


def test_run_experiment_reports_certified_constants():
    cfg = har.RunConfig(algorithm="mem", p=3, q=2, problem="quadratic",
                        dim=5, conditioning=4.0, iters=10)
    _, summary = har.run_experiment(cfg)
    assert summary["m_const"] > 0
    assert summary["k_threshold"] >= 6.0  # the 2p floor for p=3
    assert summary["epsilon"] == 0.1


# ---------------------------------------------------------------------------
# CLI surface
# ---------------------------------------------------------------------------

def test_cli_run_writes_file_and_summary(tmp_path, capsys):
    out = tmp_path / "run.csv"
    rc = har.main(["run", "--alg", "sg", "--problem", "datafit",
                   "--synthetic", "6", "--iters", "3", "--out", str(out)])
    assert rc == 0
    assert out.read_text().startswith(har.CSV_HEADER)
    summary = json.loads(capsys.readouterr().out)
    assert summary["iterations"] == 3


def test_cli_rejects_bad_input(capsys):
    rc = har.main(["run", "--alg", "mem", "--problem", "datafit",
                   "--synthetic", "6", "--iters", "3"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_cli_unknown_subcommand(capsys):
    assert har.main(["frobnicate"]) == 2


def test_cli_gen_data_round_trips(tmp_path):
    out = tmp_path / "gen.csv"
    rc = har.main(["gen-data", "--n", "7", "--seed", "3", "--out", str(out)])
    assert rc == 0
    ds = prob.load_csv_dataset(out)
    assert ds.m == ds.n == 7


def test_cli_compare_runs(tmp_path, capsys):
    rc = har.main(["compare", "--algs", "sg,sg-pm:0.5:0.1",
                   "--problem", "datafit", "--synthetic", "6",
                   "--sigma", "1.0", "--budget", "20", "--seeds", "2"])
    assert rc == 0
    table = json.loads(capsys.readouterr().out)
    assert table["labels"] == ["sg", "sg-pm:0.5:0.1"]
    assert table["iterations"]["sg"] == 20
    assert set(table["ordering"]) == set(table["labels"])


def test_cli_verify_exit_codes(tmp_path, capsys, monkeypatch):
    import momex.verify as ver

    rc = har.main(["verify", "--k-max", "40", "--bound-k-max", "200",
                   "--draws", "10000"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert all(c["passed"] for c in report["checks"])

    # plant a failure and the exit status must flip
    broken = ver.CheckReport("sum-identity:p2", False, 1.0, 1, "planted")
    monkeypatch.setattr(ver, "sum_identity_check", lambda *a, **k: broken)
    rc = har.main(["verify", "--k-max", "40", "--bound-k-max", "200",
                   "--draws", "10000"])
    assert rc == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


# ---------------------------------------------------------------------------
# compare and grid search
# ---------------------------------------------------------------------------

def test_compare_budget_parity_and_median_table():
    base = dict(problem="datafit", synthetic=8, sigma=1.0,
                noise="scalar-gaussian-envelope", iters=1)
    c2 = har.RunConfig(algorithm="mem", p=3, q=2, **base)
    c1 = har.RunConfig(algorithm="mem", p=2, q=1, **base)
    table = har.compare([c2, c1], budget=40, n_seeds=3)
    labels = table["labels"]
    assert table["iterations"][labels[0]] == 20  # two calls per iteration
    assert table["iterations"][labels[1]] == 40
    for lb in labels:
        assert len(table["final"][lb]) == 3
        assert table["median_final"][lb] > 0
    assert len(table["series"][labels[0]]) >= 2


def test_compare_rejects_mismatched_problems():
    a = har.RunConfig(algorithm="sg", problem="datafit", synthetic=8, iters=1)
    b = har.RunConfig(algorithm="sg", problem="datafit", synthetic=9, iters=1)
    with pytest.raises(ValueError, match="share the problem"):
        har.compare([a, b], budget=10)


def test_grid_search_surface():
    cfg = har.RunConfig(algorithm="mem", p=3, q=2, problem="datafit",
                        synthetic=6, iters=1)
    with pytest.raises(ValueError, match="parameter-free"):
        har.grid_search(cfg, budget=10)
    sweep = har.grid_search(
        har.RunConfig(algorithm="sg", problem="datafit", synthetic=6, iters=1),
        budget=10, etas=[0.1, 0.01], n_seeds=2,
    )
    assert len(sweep["grid"]) == 2
    assert sweep["best"]["median_final_rel_obj"] == min(
        g["median_final_rel_obj"] for g in sweep["grid"]
    )
