"""
Tests for the command-line interface and report output
"""
import io
import json

import pandas as pd
import pytest

from main import RunRequest, main, parse_request, run
from report import COLUMNS, ReportWriter
from scheme import Scheme
from weibull import CriterionSpec, WeibullParams


def run_cli(args):
    """Run main() and return its exit status, including argparse exits"""
    try:
        return main(args)
    except SystemExit as e:
        return e.code


def test_zero_iterations_is_a_usage_error(capsys):
    assert run_cli(["search", "--n", "10", "--m", "5", "--iters", "0"]) == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["search", "--n", "10", "--m", "5", "--criterion", "cost"],
        ["search", "--n", "10", "--m", "5", "--co", "1"],
        ["evaluate", "--n", "10", "--m", "5"],
        ["validate", "--n", "10", "--m", "5", "--scheme", "0,4,1,0,0", "--replications", "500"],
        ["evaluate", "--n", "10", "--m", "5", "--scheme", "1,1,1,1,2"],
        ["search", "--n", "10", "--m", "5", "--beta", "-1"],
        ["search", "--n", "5", "--m", "10"],
        ["search", "--n", "10", "--m", "5", "--m1", "7"],
        ["search", "--n", "10", "--m", "5", "--proposal", "gibbs"],
        ["search", "--n", "10", "--m", "5", "--reference", "0,5,0,0,0"],
        ["compare", "--n", "10", "--m", "5", "--reference", "0,5,0,0"],
    ],
)
def test_flag_errors(args):
    assert run_cli(args) == 2


def test_oracle_report(tmp_path):
    out = tmp_path / "oracle.csv"
    status = run_cli([
        "oracle", "--n", "15", "--m", "5", "--beta", "1", "--k", "1",
        "--criterion", "variance", "--out", str(out),
    ])
    assert status == 0
    frame = pd.read_csv(out, dtype={"best_scheme": str})
    assert list(frame.columns) == COLUMNS["oracle"]
    assert frame["best_scheme"].iloc[0] == "0,10,0,0,0"
    assert abs(frame["best_psi"].iloc[0] - 0.33492734) <= 5e-7
    assert frame["evaluated"].iloc[0] == 1001


def test_search_oracle_flag(tmp_path):
    out = tmp_path / "oracle.csv"
    status = run_cli(["search", "--n", "8", "--m", "3", "--oracle", "--out", str(out)])
    assert status == 0
    assert list(pd.read_csv(out).columns) == COLUMNS["oracle"]


def test_same_request_gives_identical_report(tmp_path):
    args = ["search", "--n", "12", "--m", "4", "--iters", "500", "--seed", "42", "--chains", "2"]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(args + ["--out", str(first)]) == 0
    assert run_cli(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_compare_report(tmp_path):
    out = tmp_path / "compare.csv"
    status = run_cli([
        "compare", "--n", "10", "--m", "5", "--beta", "0.5", "--k", "1",
        "--criterion", "variance", "--proposal", "uniform", "--iters", "10000",
        "--seed", "42", "--out", str(out),
    ])
    assert status == 0
    frame = pd.read_csv(out, dtype={"oracle_scheme": str, "search_scheme": str})
    assert list(frame.columns) == COLUMNS["compare"]
    assert frame["oracle_scheme"].iloc[0] == "0,5,0,0,0"
    assert frame["r_eff1"].iloc[0] >= 0.999
    assert frame["n_it"].iloc[0] == 10000


def test_compare_against_reference_scheme(tmp_path):
    out = tmp_path / "reference.csv"
    status = run_cli([
        "compare", "--n", "30", "--m", "10", "--beta", "1", "--proposal", "uniform",
        "--iters", "3000", "--seed", "5", "--reference", "(0^5, 20, 0^4)", "--out", str(out),
    ])
    assert status == 0
    frame = pd.read_csv(out, dtype={"reference_scheme": str, "search_scheme": str})
    assert list(frame.columns) == COLUMNS["reference"]
    row = frame.iloc[0]
    assert row["reference_scheme"] == "0,0,0,0,0,20,0,0,0,0"
    assert abs(row["reference_psi"] - 0.1706508485) <= 1e-8
    assert row["r_eff"] == pytest.approx(row["reference_psi"] / row["search_psi"], rel=1e-12)
    assert row["n_it"] == 3000


def test_reference_jsonl_keeps_command(capsys):
    status = run_cli([
        "compare", "--n", "8", "--m", "3", "--iters", "200", "--reference", "0,5,0",
        "--format", "jsonl",
    ])
    assert status == 0
    record = json.loads(capsys.readouterr().out.strip())
    assert record["command"] == "compare"
    assert record["reference_scheme"] == "0,5,0"
    assert set(COLUMNS["reference"]) <= set(record)


def test_evaluate_jsonl(capsys):
    status = run_cli([
        "evaluate", "--n", "10", "--m", "5", "--beta", "0.5",
        "--scheme", "0,4,1,0,0", "--format", "jsonl",
    ])
    assert status == 0
    record = json.loads(capsys.readouterr().out.strip())
    assert record["schema_version"] == 1
    assert record["command"] == "evaluate"
    assert record["scheme"] == "0,4,1,0,0"
    assert abs(record["psi"] - 1.5195044657) <= 1e-8


def test_evaluate_pretty(capsys):
    status = run_cli([
        "evaluate", "--n", "15", "--m", "5", "--scheme", "(0, 10, 0^3)", "--format", "pretty",
    ])
    assert status == 0
    out = capsys.readouterr().out
    assert "(0, 10, 0^3)" in out
    assert "0.3349" in out


def test_cost_criterion_evaluate(capsys):
    status = run_cli([
        "evaluate", "--n", "3", "--m", "3", "--scheme", "0,0,0",
        "--criterion", "cost", "--co", "1", "--ct", "6", "--format", "jsonl",
    ])
    assert status == 0
    record = json.loads(capsys.readouterr().out.strip())
    # 1 + 6 * 11/6
    assert abs(record["psi"] - 12.0) <= 1e-9


def test_budget_exceeded_exit_status():
    assert run_cli(["oracle", "--n", "60", "--m", "30", "--oracle-budget", "1000"]) == 1


def test_trace_file(tmp_path):
    trace = tmp_path / "trace.jsonl"
    status = run_cli([
        "search", "--n", "10", "--m", "5", "--iters", "40", "--trace", str(trace),
        "--out", str(tmp_path / "search.csv"),
    ])
    assert status == 0
    assert len(trace.read_text(encoding="utf-8").splitlines()) == 40


def test_validate_report(tmp_path):
    out = tmp_path / "validate.csv"
    status = run_cli([
        "validate", "--n", "20", "--m", "10", "--scheme", "(0^9, 10)",
        "--replications", "1000", "--s-grid", "0.25,0.5", "--out", str(out),
    ])
    assert status == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == COLUMNS["validate"]
    assert frame["s"].tolist() == [0.25, 0.5]


def test_print_config_round_trip(tmp_path, capsys):
    status = run_cli([
        "search", "--n", "15", "--m", "5", "--proposal", "mvhg", "--seed", "7", "--print-config",
    ])
    assert status == 0
    printed = capsys.readouterr().out
    assert "proposal=mvhg" in printed
    assert "seed=7" in printed

    config_file = tmp_path / "run.conf"
    config_file.write_text(printed, encoding="utf-8")
    request, _, _ = parse_request(["search", "--config", str(config_file), "--iters", "25"])
    assert request.n == 15
    assert request.m == 5
    assert request.seed == 7
    assert request.proposal.value == "mvhg"
    assert request.iterations == 25


def test_explicit_flags_override_config_file(tmp_path):
    config_file = tmp_path / "run.conf"
    config_file.write_text("n=10\nm=5\n--iters=300\nseed=3\n", encoding="utf-8")
    request, _, _ = parse_request(["search", "--config", str(config_file), "--seed", "9"])
    assert request.iterations == 300
    assert request.seed == 9


def test_missing_config_file(tmp_path):
    assert run_cli(["search", "--config", str(tmp_path / "missing.conf")]) == 2


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("CENSEARCH_SEED", "77")
    request, _, _ = parse_request(["search", "--n", "10", "--m", "5"])
    assert request.seed == 77
    request, _, _ = parse_request(["search", "--n", "10", "--m", "5", "--seed", "1"])
    assert request.seed == 1


def test_bad_seed_in_environment(monkeypatch):
    monkeypatch.setenv("CENSEARCH_SEED", "abc")
    assert run_cli(["search", "--n", "10", "--m", "5"]) == 2


def test_m1_flag():
    request, _, _ = parse_request(["search", "--n", "10", "--m", "5", "--m1", "2"])
    assert request.m1 == 2
    request, _, _ = parse_request(["search", "--n", "10", "--m", "5", "--m1", "auto"])
    assert request.m1 is None


def test_run_returns_one_on_library_error():
    request = RunRequest(
        command="oracle",
        n=60,
        m=30,
        params=WeibullParams(1.0, 1.0),
        criterion=CriterionSpec.variance(),
        oracle_budget=10,
    )
    assert run(request) == 1


def test_report_writer_formats():
    record = {
        "beta": 1.0, "k": 1.0, "n": 10, "m": 5, "criterion": "variance",
        "scheme": Scheme(10, 5, (0, 4, 1, 0, 0)), "psi": 0.123456789,
    }
    csv_text = ReportWriter("csv").render("evaluate", [record])
    assert csv_text.splitlines()[0] == ",".join(COLUMNS["evaluate"])
    assert '"0,4,1,0,0"' in csv_text
    assert pd.read_csv(io.StringIO(csv_text))["psi"].iloc[0] == 0.123456789

    pretty = ReportWriter("pretty").render("evaluate", [record])
    assert "(0, 4, 1, 0^2)" in pretty
    assert "0.1235" in pretty

    with pytest.raises(ValueError):
        ReportWriter("xml")
