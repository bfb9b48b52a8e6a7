import json

import pytest

from lagdbf import harness
from lagdbf.cli import main, parse_list
from lagdbf.exceptions import SolverError

FAST = ["--users", "2", "--antennas", "2", "--realizations", "2", "--restarts", "2",
        "--iters-lagd", "5", "--iters-wmmse", "3", "--iters-gd", "5", "--arch", "4", "--quiet"]


class TestParseList:
    @pytest.mark.parametrize("text, expected", [
        ("10", [10.0]), ("0,10,30", [0.0, 10.0, 30.0]), ("0:30:10", [0.0, 10.0, 20.0, 30.0]),
        ("-5:5:5", [-5.0, 0.0, 5.0]), ("0:1:0.1", [round(0.1 * i, 10) for i in range(11)]),
    ])
    def test_values(self, text, expected):
        assert parse_list(text) == expected

    @pytest.mark.parametrize("text", ["", "a", "0:10", "10:0:5", "0:10:0"])
    def test_rejects(self, text):
        with pytest.raises(Exception):
            parse_list(text)


def test_bench_csv_files(tmp_path):
    assert main(["bench", *FAST, "--out", str(tmp_path)]) == 0
    raw = (tmp_path / "raw.csv").read_text().splitlines()
    agg = (tmp_path / "aggregate.csv").read_text().splitlines()
    assert raw[0] == ",".join(harness.RAW_FIELDS) and len(raw) == 1 + 2 * 2
    assert agg[0] == ",".join(harness.AGGREGATE_FIELDS) and len(agg) == 3


def test_bench_stdout(capsys):
    assert main(["bench", *FAST, "--algos", "gd"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("algo,users") and out[1].startswith("gd,2,2,10.0,")


def test_bench_json(tmp_path):
    assert main(["bench", *FAST, "--format", "json", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "results.json").read_text())
    assert doc["spec"]["realizations"] == 2 and len(doc["raw"]) == 4


def test_byte_identical_reruns(tmp_path):
    for name in ("a", "b"):
        assert main(["bench", *FAST, "--snr-db", "0:20:20", "--seed", "3",
                     "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "raw.csv").read_bytes() == (tmp_path / "b" / "raw.csv").read_bytes()


@pytest.mark.parametrize("argv", [
    [], ["bench", "--algos", "sgd"], ["bench", "--users", "x"], ["bench", "--realizations", "0"],
    ["bench", "--report", "mean"], ["trace", "--snr-db", "0,10"], ["bench", "--arch", "4,-1"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 1


def test_io_error(tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert main(["bench", *FAST, "--out", str(blocker / "x")]) == 3
    assert main(["trace", "--iters-wmmse", "2", "--out", str(blocker / "x.csv")]) == 3


def test_failure_threshold(monkeypatch, capsys):
    def broken(spec, algo, config, H):
        def solve(ss):
            raise SolverError("diverged", {"iteration": 3})
        return solve

    monkeypatch.setattr(harness, "make_solver", broken)
    assert main(["bench", *FAST]) == 2
    assert "diverged" in capsys.readouterr().err


def test_trace_output(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["trace", "--algos", "lagd", "--iters-lagd", "12", "--restarts", "1",
                 "--arch", "8", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "iter,wsr" and len(lines) == 14


def test_env_override(tmp_path, capsys):
    env = {"LAGDBF_ALGOS": "gd", "LAGDBF_REALIZATIONS": "3", "LAGDBF_QUIET": "1"}
    assert main(["bench", *FAST[:4], "--restarts", "1", "--iters-gd", "3", "--out",
                 str(tmp_path)], environ=env) == 0
    raw = (tmp_path / "raw.csv").read_text().splitlines()
    assert len(raw) == 4 and all(line.startswith("gd,") for line in raw[1:])
    # explicit flags beat the environment
    assert main(["bench", *FAST, "--out", str(tmp_path)], environ=env) == 0
    assert len((tmp_path / "raw.csv").read_text().splitlines()) == 3
