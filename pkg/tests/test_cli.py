import json
import subprocess
import sys

import pytest

from abortlock.cli import main


def test_simulate_single_attempt(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["simulate", "--procs", "1", "--attempts", "1", "--check", "all", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["totals"]["cs_entries"] == 1
    assert data["status"] == "pass" and data["violations"] == []
    assert json.loads(capsys.readouterr().out)["status"] == "pass"


def test_bad_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--procs", "0x"])
    assert err.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_bad_check_name_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--check", "vibes"])
    assert err.value.code == 2


def test_explore_single_path(tmp_path):
    report = tmp_path / "e.json"
    assert main(["explore", "--procs", "1", "--attempts", "1", "--aborts", "none", "--report", str(report)]) == 0
    assert json.loads(report.read_text())["states_visited"] == 5


def test_explore_budget_exit_1(tmp_path):
    report = tmp_path / "e.json"
    code = main(["explore", "--procs", "2", "--attempts", "2", "--aborts", "nondet", "--max-states", "20",
                 "--report", str(report)])
    assert code == 1
    assert json.loads(report.read_text())["status"] == "incomplete"


def test_trace_replay_round_trip(tmp_path):
    trace, report = tmp_path / "t.jsonl", tmp_path / "r.json"
    assert main(["simulate", "--procs", "3", "--steps", "4000", "--seed", "5", "--abort-rate", "0.3",
                 "--trace", str(trace), "--report", str(report)]) == 0
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    assert len(lines) == 4000
    assert [x["seq"] for x in lines] == list(range(4000))
    replayed = tmp_path / "rr.json"
    assert main(["replay", "--trace", str(trace), "--check", "all", "--report", str(replayed)]) == 0
    online = json.loads(report.read_text())
    offline = json.loads(replayed.read_text())
    assert offline["violations"] == online["violations"] == []
    for key in ("cs_entries", "aborts", "rmr_cc", "rmr_dsm"):
        assert offline["totals"][key] == online["totals"][key]


def test_forged_duplicate_cs_enter_exits_1(tmp_path):
    trace = tmp_path / "t.jsonl"
    main(["simulate", "--procs", "1", "--attempts", "1", "--trace", str(trace)])
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    enter = next(x for x in lines if "cs_enter" in x["events"])
    assert enter["seq"] == 2
    forged = dict(enter, seq=3, actor="p2", pre_pc=1, events=["attempt_start", "cs_enter"])
    body = lines[:3] + [forged] + [dict(lines[3], seq=4)]
    trace.write_text("".join(json.dumps(x) + "\n" for x in body))
    report = tmp_path / "r.json"
    assert main(["replay", "--trace", str(trace), "--report", str(report)]) == 1
    clauses = {v["clause"] for v in json.loads(report.read_text())["violations"]}
    assert "mutex" in clauses


def test_malformed_trace_exits_2(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    trace.write_text('{"seq": 0}\nnot json\n')
    assert main(["replay", "--trace", str(trace)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["replay", "--trace", str(tmp_path / "missing.jsonl")]) == 2


def test_stress_command(tmp_path):
    report = tmp_path / "s.json"
    assert main(["stress", "--threads", "2", "--iters", "200", "--abort-prob", "0.2", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["counter_value"] == data["cs_entries"]
    assert data["status"] == "pass"


def test_report_write_leaves_no_temp_files(tmp_path):
    report = tmp_path / "r.json"
    main(["simulate", "--procs", "2", "--steps", "100", "--report", str(report)])
    main(["simulate", "--procs", "2", "--steps", "100", "--report", str(report)])
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]


def test_console_module_entry():
    out = subprocess.run(
        [sys.executable, "-m", "abortlock.cli", "simulate", "--procs", "1", "--attempts", "1"],
        capture_output=True, text=True, check=False,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["totals"]["cs_entries"] == 1
