"""Smoke test for the sprintlint Python extension."""

import csv
import io
import json
import tempfile
from pathlib import Path

import sprintlint


def main() -> None:
    assert sprintlint.threshold_linear(5, 10) == 50.0
    assert sprintlint.ratio_linear(2, 10, 1, 3) == 40.0
    assert sprintlint.capped_linear(6, 10) == 60.0
    assert sprintlint.cutoff_parabola(0.5, 200, 100) == 75.0
    try:
        sprintlint.ratio_linear(1, 0, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("zero total must raise")
    assert sprintlint.count_checkboxes("- [ ] a\n- [x] b\nplain") == 2
    assert len(sprintlint.metric_names()) == 9
    assert json.loads(sprintlint.default_config())["no_committing"]["weight"] == 10.0

    example = sprintlint.Project.unfinished_example()
    row = example.unfinished_stories("sprint-12")
    assert row == {
        "sprint_title": "Sprint 12",
        "amount": 2,
        "issues": [129, 135],
        "total": 10,
        "percent": 0.2,
    }, row
    assert example.unfinished_stories("sprint-13") is None

    clean, ledger = sprintlint.generate(seed=3)
    assert ledger == {}
    report = json.loads(clean.lint())
    assert all(s["overall"] == 100.0 for s in report["sprints"])

    injection = json.dumps({"last_minute_commits": 2, "duplicate_stories": 1})
    with tempfile.TemporaryDirectory() as tmp:
        project, ledger = sprintlint.generate(inject=injection, seed=3, out_dir=tmp)
        assert (Path(tmp) / "ledger.json").exists()
        reloaded = sprintlint.Project.load(tmp)
        assert reloaded.snapshot() == project.snapshot()

    report = json.loads(project.lint())
    found = {
        (r["metric"], json.dumps(a, sort_keys=True))
        for s in report["sprints"]
        for r in s["results"]
        for v in r["violations"]
        for a in v["artifacts"]
    }
    planted = {
        (metric, json.dumps(e["artifact"], sort_keys=True))
        for metric, entries in ledger.items()
        for e in entries
    }
    assert found == planted, (found, planted)
    assert "Does not measure" in project.lint(format="markdown")

    rows = list(csv.DictReader(io.StringIO(project.trend_csv())))
    assert len(rows) == 2 * 4 * 10
    assert {r["metric"] for r in rows} >= {"overall", "duplicates"}

    same = sprintlint.Project.from_snapshot(project.snapshot())
    assert same.lint() == project.lint()
    print("smoke test passed:", project, dict(project.counts()))


if __name__ == "__main__":
    main()
