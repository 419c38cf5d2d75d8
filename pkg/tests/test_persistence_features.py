import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.workbench_facade import WorkbenchFacade
from db_manager import DatabaseManager
from services.bundled_examples import load_bundled


def test_task_runs_persist_and_filter(tmp_path):
    manager = DatabaseManager(str(tmp_path))

    first = manager.save_run(
        file="example_b.json",
        task="H(Σℤ/2, ℤ)",
        op="cohomology",
        status="pass",
        trusted_degree=4,
        payload={"data": {"ranks": [1, 2, 4, 8, 16, 32]}},
        duration_ms=12,
    )
    manager.save_run("example_b.json", "theorem2", "check", "hypothesis-fails", payload=None)
    manager.save_run("galois.json", "adjuntos bottom", "check", "fail")

    assert manager.count_runs() == 3
    assert manager.count_runs(status="fail") == 1

    row = manager.get_last_run(task="H(Σℤ/2, ℤ)")
    assert row is not None
    assert row.id == first.id
    assert row.trusted_degree == 4
    assert row.payload["data"]["ranks"][-1] == 32

    latest = manager.get_runs(limit=2)
    assert [run.task for run in latest] == ["adjuntos bottom", "theorem2"]
    assert manager.get_last_run(task="missing") is None


def test_payload_is_stored_as_plain_json(tmp_path):
    manager = DatabaseManager(str(tmp_path), db_path=str(tmp_path / "runs.db"))
    manager.save_run("f.json", "t", "validate", "pass", payload={"path": tmp_path})
    row = manager.get_last_run()
    assert row.payload == {"path": str(tmp_path)}


def test_two_archives_do_not_share_rows(tmp_path):
    a = DatabaseManager(str(tmp_path), db_path=str(tmp_path / "a.db"))
    b = DatabaseManager(str(tmp_path), db_path=str(tmp_path / "b.db"))
    a.save_run("x.json", "only-a", "validate", "pass")
    assert a.count_runs() == 1
    assert b.count_runs() == 0


def test_facade_archives_every_task(tmp_path):
    archive = str(tmp_path / "runs.db")
    facade = WorkbenchFacade({"workers": 2}, archive=archive)
    wf = load_bundled("example_b")
    facade.register("validate", lambda wf, task: wf.validate())
    try:
        records = facade.run(wf, [{"name": "v1", "op": "validate"}, {"name": "bogus", "op": "nope"}])
        history = facade.history(limit=10)
    finally:
        facade.shutdown()
    assert [record["status"] for record in records] == ["pass", "input-error"]
    assert {run["task"] for run in history} == {"v1", "bogus"}


def test_facade_archives_unexpected_errors_as_failures(tmp_path):
    facade = WorkbenchFacade({"workers": 1}, archive=str(tmp_path / "runs.db"))

    def crash(wf, task):
        raise KeyError(0)

    facade.register("cohomology", crash)
    try:
        (record,) = facade.run(load_bundled("example_b"), [{"name": "h", "op": "cohomology"}])
        (run,) = facade.history(limit=5)
    finally:
        facade.shutdown()
    assert record["status"] == "fail"
    assert record["note"] == "KeyError: 0"
    assert run["status"] == "fail" and run["task"] == "h"
