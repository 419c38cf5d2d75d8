import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.errors import NotAChainMap
from handlers.compute_commands import ComputeCommandHandler
from main import EXIT_BUDGET, EXIT_FAIL, EXIT_INPUT, EXIT_PASS, build_parser, exit_code_for, main


def read_reports(path):
    return json.loads(path.read_text(encoding="utf-8"))["reports"]


def test_validate_bundled_example():
    assert main(["validate", "example_b", "--quiet"]) == EXIT_PASS


def test_cohomology_of_cyclic_group(tmp_path):
    out = tmp_path / "report.json"
    code = main([
        "cohomology", "example_b", "--category", "Z2", "--system", "Zk",
        "--max-degree", "5", "--out", str(out), "--quiet",
    ])
    assert code == EXIT_PASS
    (report,) = read_reports(out)
    assert [row["text"] for row in report["data"]["cohomology"]] == ["Z", "0", "Z/2", "0", "Z/2"]
    assert report["trusted_degree"] == 4


def test_ring_flag_overrides_file(tmp_path):
    out = tmp_path / "report.json"
    main([
        "cohomology", "example_b", "--category", "Z2", "--system", "Zk",
        "--ring", "fp:2", "--max-degree", "3", "--out", str(out), "--quiet",
    ])
    (report,) = read_reports(out)
    assert report["data"]["ring"] == "fp:2"
    assert [row["text"] for row in report["data"]["cohomology"]] == ["F_2", "F_2", "F_2"]


def test_budget_exceeded_exit_code():
    code = main(["cohomology", "example_b", "--category", "Z2", "--system", "Zk", "--budget", "1", "--quiet"])
    assert code == EXIT_BUDGET


def test_input_errors_exit_code():
    assert main(["validate", "/definitely/not/here.json", "--quiet"]) == EXIT_INPUT
    assert main(["cohomology", "example_b", "--category", "Z2", "--system", "nope", "--quiet"]) == EXIT_INPUT
    assert main(["cohomology", "example_b", "--category", "Z2", "--system", "Zk", "--ring", "fp:6", "--quiet"]) == EXIT_INPUT


def test_failing_check_exit_code():
    code = main([
        "check", "adjuntos", "galois", "--adjunction", "bottom", "--system", "G", "--max-degree", "3", "--quiet",
    ])
    assert code == EXIT_FAIL


def test_hypothesis_failure_is_not_an_error(tmp_path):
    out = tmp_path / "local.json"
    code = main(["check", "local", "locality", "--diagram", "loc", "--system", "D", "--out", str(out), "--quiet"])
    assert code == EXIT_PASS
    (report,) = read_reports(out)
    assert report["status"] == "hypothesis-fails"


def test_contract_error_becomes_failed_report(tmp_path, monkeypatch):
    def broken(self, wf, task):
        raise NotAChainMap("d∘f ≠ f∘d in degree 1")

    monkeypatch.setattr(ComputeCommandHandler, "handle_cohomology", broken)
    out = tmp_path / "report.json"
    code = main([
        "cohomology", "example_b", "--category", "Z2", "--system", "Zk", "--out", str(out), "--quiet",
    ])
    assert code == EXIT_FAIL
    (report,) = read_reports(out)
    assert report["status"] == "fail"
    assert report["note"].startswith("NotAChainMap")


def test_random_suite_without_file():
    assert main(["check", "trivial", "--instances", "2", "--seed", "1", "--quiet"]) == EXIT_PASS


def test_run_tasks_and_history(tmp_path):
    archive = tmp_path / "runs.db"
    assert main(["run", "galois", "--archive", str(archive), "--quiet"]) == EXIT_PASS
    out = tmp_path / "history.json"
    assert main(["history", "--archive", str(archive), "--out", str(out), "--quiet"]) == EXIT_PASS
    runs = json.loads(out.read_text(encoding="utf-8"))["runs"]
    assert {run["task"] for run in runs} == {"validate", "adjuntos collapse", "adjuntos halve", "muro halve"}
    assert main(["history", "--quiet"]) == EXIT_INPUT


def test_summary_is_printed(capsys):
    main(["validate", "example_a"])
    printed = capsys.readouterr().out
    assert "[pass] validate" in printed


def test_exit_code_priority():
    assert exit_code_for([{"status": "fail"}, {"status": "budget-exceeded"}]) == EXIT_BUDGET
    assert exit_code_for([{"status": "budget-exceeded"}, {"status": "input-error"}]) == EXIT_INPUT
    assert exit_code_for([{"status": "hypothesis-fails"}, {"status": "pass"}]) == EXIT_PASS
    assert exit_code_for([]) == EXIT_PASS


def test_parser_accepts_check_flags():
    parser = build_parser()
    args = parser.parse_args(["check", "muro", "--seed", "3"])
    assert args.target == "muro" and args.seed == 3
