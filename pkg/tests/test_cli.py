import io
import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from mnastack.cli import main
from mnastack.codec import parse_hex_dump
from mnastack.report import stack_table

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def write(tmp_path, text, name="s.mna"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.mark.parametrize("name", ["three-mna", "legacy-island", "legacy-no-compat", "small-rld"])
def test_validate_bundled_scenarios(name):
    assert cli("validate", str(SCENARIOS / f"{name}.mna")) == (0, "ok\n")


def test_validate_reports_line_numbers(tmp_path):
    path = write(tmp_path, "scenario bad\n"
                           "node R1 mna rld=0 label=100\n"
                           "node R2 mna rld=8 label=200\n"
                           "path R2 RX\n")
    code, text = cli("validate", path)
    assert code == 1
    assert f"{path}: line 2: rld must be >= 1" in text
    assert f"{path}: line 4: undeclared node RX" in text


@pytest.mark.parametrize("body, fragment", [
    ("node R1 mna rld=8 label=7\npath R1\n", "reserved"),
    ("node R1 mna rld=8 label=100\npath R1\nfrobnicate\n", "unknown directive"),
    ("node R1 mna rld=8 label=100\npath R1\nstrategy fastest\n", "strategy"),
    ("node R1 mna rld=8 label=100\n", "path"),
])
def test_validate_rejects(tmp_path, body, fragment):
    code, text = cli("validate", write(tmp_path, "scenario x\n" + body))
    assert code == 1
    assert fragment in text


def test_plan_prints_table_hex_and_counters():
    code, text = cli("plan", str(SCENARIOS / "legacy-island.mna"))
    assert code == 0
    assert text.startswith("idx  kind")
    assert "StackMgmt(n=2)" in text
    assert text.rstrip().endswith(
        "strategy=preserving copiesInserted=0 liftsPlanned=R1=3 R4=1 overheadBytes=20 stackManagementBytes=8")


def test_plan_hex_dump_decodes_back_to_table():
    _, text = cli("plan", str(SCENARIOS / "legacy-island.mna"))
    table, rest = text.split("hex:\n")
    dump = "".join(line + "\n" for line in rest.splitlines() if line.startswith("0x"))
    assert stack_table(parse_hex_dump(dump)) == table


def test_plan_json(tmp_path):
    out = tmp_path / "plan.json"
    code, _ = cli("plan", str(SCENARIOS / "small-rld.mna"), "--json", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["strategy"] == "baseline"
    assert doc["copiesInserted"] == 1
    assert len(doc["hex"]) == len(doc["stack"]) == 8


def test_plan_infeasible(tmp_path):
    path = write(tmp_path, "scenario tight\nnode R1 mna rld=2 label=100\nnode R2 mna rld=2 label=200\n"
                           "path R1 R2\nhbh-action opaque op=0x20 data=1\nstrategy baseline\n")
    out = tmp_path / "err.json"
    code, text = cli("plan", path, "--json", str(out))
    assert code == 1
    assert text.startswith("infeasible: node R1")
    assert json.loads(out.read_text())["deficit"] == 1


def test_plan_strategy_override():
    code, text = cli("plan", str(SCENARIOS / "small-rld.mna"), "--strategy", "preserving")
    assert code == 0
    assert "strategy=preserving" in text


def test_run_exit_codes(tmp_path):
    code, text = cli("run", str(SCENARIOS / "legacy-island.mna"))
    assert code == 0
    assert re.search(r"^R1 Forwarded parsed=9 lifted=3 hash=0x[0-9A-F]{8}$", text, re.M)
    assert text.endswith("verdict: Delivered\n")

    out = tmp_path / "run.json"
    code, text = cli("run", str(SCENARIOS / "legacy-no-compat.mna"), "--json", str(out))
    assert code == 1
    assert text.endswith("verdict: Dropped at R3 (reserved-label)\n")
    doc = json.loads(out.read_text())
    assert doc["verdict"] == {"kind": "Dropped", "node": "R3", "reason": "reserved-label"}


def test_compare():
    code, text = cli("compare", str(SCENARIOS / "small-rld.mna"))
    assert code == 0
    assert re.search(r"^stack entries\s+8\s+7$", text, re.M)
    assert text.endswith("action matrices equal: yes\n")


def test_output_is_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    first = cli("run", str(SCENARIOS / "legacy-island.mna"), "--json", str(a))
    second = cli("run", str(SCENARIOS / "legacy-island.mna"), "--json", str(b))
    assert first == second
    assert a.read_bytes() == b.read_bytes()


def test_indicator_override(monkeypatch):
    monkeypatch.setenv("MNA_INDICATOR", "7")
    _, text = cli("plan", str(SCENARIOS / "three-mna.mna"))
    assert "0x00007202" in text
    monkeypatch.setenv("MNA_INDICATOR", "99")
    code, text = cli("plan", str(SCENARIOS / "three-mna.mna"))
    assert code == 2 and "MNA_INDICATOR" in text


def test_missing_file():
    code, text = cli("plan", "/nonexistent/x.mna")
    assert code == 2 and text.startswith("error:")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mnastack.cli", "validate",
                           str(SCENARIOS / "three-mna.mna")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "ok\n"


def test_full_nas_at_tiny_rld_cites_capacity_deficit(tmp_path):
    actions = "".join(f"hbh-action opaque op=0x{0x20 + i:02x} data=0x0\n" for i in range(16))
    path = write(tmp_path, "scenario tiny\nnode R1 mna rld=3 label=100\npath R1\n" + actions
                 + "strategy baseline\n")
    code, text = cli("plan", path)
    assert code == 1
    assert "in-between capacity -15" in text
    assert "deficit 15" in text
