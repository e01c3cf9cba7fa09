import csv
import json

import pytest

from lassobo.cli import SUMMARY_COLUMNS, TRACE_COLUMNS, main, render_svg

FAST = ["--benchmark", "levy-d10-e3", "--budget", "2", "--n-init", "4", "--adam-steps", "8",
        "--fit-starts", "5", "--restarts", "6"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_expected_files(tmp_path):
    out = tmp_path / "o"
    assert main(["run", *FAST, "--repeats", "3", "--seed", "7", "--out", str(out)]) == 0
    traces = sorted(p.relative_to(out).as_posix() for p in out.rglob("trace.csv"))
    assert traces == [f"lassobo/seed_{s}/trace.csv" for s in (7, 8, 9)]
    assert (out / "summary.csv").exists() and (out / "regret.svg").exists()
    assert not list(out.rglob("rho_trace.csv"))

    rows = _rows(out / "lassobo/seed_7/trace.csv")
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) == 1 + 4 + 2
    last = dict(zip(rows[0], rows[-1]))
    assert len(json.loads(last["x_json"])) == 10
    idx = [int(i) for i in last["I_t"].split(";")]
    assert idx == sorted(idx) and len(idx) == int(last["d_t"])
    assert last["fit_ms"] == last["acq_ms"] == ""

    summary = _rows(out / "summary.csv")
    assert tuple(summary[0]) == SUMMARY_COLUMNS and len(summary) == 1 + 6

    m = json.loads((out / "manifest.json").read_text())
    assert m["seeds"] == [7, 8, 9] and m["partial"] is False
    cfg = m["run_configs"]["lassobo"]
    assert cfg["budget_T"] == 2 and cfg["fit"]["lam"] == 1e-3 and cfg["acq"]["delta"] == 0.1
    assert all(r["status"] == "ok" and r["wall_time_s"] > 0 for r in m["runs"])


def test_identical_invocations_give_identical_traces(tmp_path):
    for name in ("a", "b"):
        assert main(["run", *FAST, "--repeats", "1", "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a/lassobo/seed_0/trace.csv").read_bytes()
    b = (tmp_path / "b/lassobo/seed_0/trace.csv").read_bytes()
    assert a == b


def test_unknown_benchmark_writes_nothing(tmp_path, capsys):
    out = tmp_path / "never"
    assert main(["run", "--benchmark", "rosenbrock-d9-e2", "--out", str(out)]) == 2
    assert not out.exists()
    assert "unknown benchmark" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "--benchmark", "levy-d10-e3", "--method", "cmaes"],
    ["run", "--benchmark", "levy-d10-e3", "--repeats", "0"],
    ["run", "--benchmark", "levy-d10-e3", "--kernel", "cosine"],
    ["compare", "--benchmark", "levy-d10-e3", "--methods", "lassobo"],
    ["compare", "--benchmark", "levy-d10-e3", "--dropout-d", "11"],
    ["run", "--benchmark", "levy-d10-e3", "--budget", "notanumber"],
])
def test_config_errors_exit_2(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"benchmark": "levy-d10-e3", "budget": 1, "n_init": 4,
                                "repeats": 1, "seed": 3, "fit": {"lam": 0.5, "adam_steps": 5},
                                "acq": {"restarts_total": 4}}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(conf), "--seed", "5", "--out", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["seeds"] == [5]
    assert m["run_configs"]["lassobo"]["fit"]["lam"] == 0.5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"benchmark": "levy-d10-e3", "colour": "red"}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "z")]) == 2


def test_env_var_sets_default_output(tmp_path, monkeypatch):
    monkeypatch.setenv("LASSOBO_OUT", str(tmp_path / "env"))
    assert main(["run", *FAST, "--repeats", "1", "--no-svg", "--method", "random"]) == 0
    assert (tmp_path / "env/random/seed_0/trace.csv").exists()
    assert not (tmp_path / "env/regret.svg").exists()


def test_trace_rho_sidecar(tmp_path):
    out = tmp_path / "o"
    assert main(["run", *FAST, "--repeats", "1", "--trace-rho", "--out", str(out)]) == 0
    rows = _rows(out / "lassobo/seed_0/rho_trace.csv")
    assert rows[0] == ["iter"] + [f"rho_{i}" for i in range(10)]
    assert [r[0] for r in rows[1:]] == ["5", "6"]


def test_compare_shares_seeds_and_reports_verdict(tmp_path):
    out = tmp_path / "o"
    argv = ["compare", *FAST, "--repeats", "2", "--dropout-d", "3", "--jobs", "2",
            "--out", str(out)]
    assert main(argv) == 0
    summary = _rows(out / "summary.csv")[1:]
    assert [r[0] for r in summary[::6]] == ["lassobo", "random", "dropout"]
    m = json.loads((out / "manifest.json").read_text())
    assert {(r["method"], r["seed"]) for r in m["runs"]} == {
        (meth, s) for meth in ("lassobo", "random", "dropout") for s in (0, 1)}
    v = m["verdict"]
    assert sorted(v["ordering_best_first"]) == ["dropout", "lassobo", "random"]
    finals = [v["final_median_log_regret"][k] for k in v["ordering_best_first"]]
    assert finals == sorted(finals)


def test_vanilla_echoes_zero_penalty(tmp_path):
    out = tmp_path / "o"
    assert main(["run", *FAST, "--method", "vanilla", "--repeats", "1", "--out", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["run_configs"]["vanilla"]["fit"]["lam"] == 0.0


def test_svg_is_self_contained_and_deterministic():
    import numpy as np

    blocks = {"a": (np.array([1.0, 0.5, 0.2]), np.array([0.8, 0.3, 0.1]), np.array([1.2, 0.7, 0.4]))}
    s1, s2 = render_svg(blocks, "t<&>"), render_svg(blocks, "t<&>")
    assert s1 == s2
    assert s1.startswith("<svg") and "href" not in s1 and "t&lt;&amp;&gt;" in s1


@pytest.mark.parametrize("suite", ["gradients", "posterior-oracle", "selection", "theorem1"])
def test_check_suites_pass(suite, capsys):
    assert main(["check", suite]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_check_rejects_unknown_suite():
    assert main(["check", "everything"]) == 2


def test_list_benchmarks(capsys):
    assert main(["list-benchmarks"]) == 0
    assert "hartmann6-d300" in capsys.readouterr().out


def test_aborted_run_exits_1_with_partial_manifest(tmp_path, monkeypatch):
    import lassobo.cli as cli
    from lassobo.benchmarks import make_benchmark

    class Breaks:
        def __init__(self, inner):
            self.inner, self.calls = inner, 0

        def __getattr__(self, name):
            return getattr(self.inner, name)

        def evaluate(self, x, rng=None):
            self.calls += 1
            if self.calls == 6:
                raise RuntimeError("simulator crashed")
            return self.inner.evaluate(x, rng)

    monkeypatch.setattr(cli, "make_benchmark", lambda bid, noise_sd=0.0: Breaks(make_benchmark(bid)))
    out = tmp_path / "o"
    assert main(["run", *FAST, "--repeats", "1", "--out", str(out)]) == 1
    m = json.loads((out / "manifest.json").read_text())
    assert m["partial"] is True
    assert m["runs"][0]["status"] == "aborted" and "simulator crashed" in m["runs"][0]["error"]
    assert len(_rows(out / "lassobo/seed_0/trace.csv")) == 1 + 5
