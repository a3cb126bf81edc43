import json
from pathlib import Path

import pytest

from supernet_lc.cli import main
from supernet_lc.driver import run
from supernet_lc.errors import ParseError, RunFailed, SchemaError
from supernet_lc.report import build_report, report_json
from supernet_lc.scenario import bundled, bundled_scenarios, load_scenario, parse_scenario
from supernet_lc.transcript import load_transcript
from supernet_lc.verify import verify

SCENARIOS = [p.stem for p in bundled_scenarios()]


def happy_data():
    return json.loads(json.dumps(bundled("happy_path").data))


def flip_hex(value: str, pos: int = 7) -> str:
    return value[:pos] + ("1" if value[pos] == "0" else "0") + value[pos + 1 :]


# -- loading -------------------------------------------------------------------


def test_bundled_set():
    assert {"happy_path", "duplicate_lc", "da_comparison", "cure_loop", "escrow", "basket", "faults", "governance"} <= set(SCENARIOS)


def test_happy_path_loads_by_name_and_path():
    assert load_scenario("happy_path").name == "happy_path"
    assert load_scenario(bundled_scenarios()[0]).name == bundled_scenarios()[0].stem


def test_undefined_party_is_schema_error():
    data = happy_data()
    data["lcs"][0]["terms"]["beneficiary"] = "ghost"
    with pytest.raises(SchemaError) as info:
        parse_scenario(json.dumps(data))
    assert "ghost" in str(info.value)


def test_unknown_key_is_schema_error():
    data = happy_data()
    data["colour"] = "blue"
    with pytest.raises(SchemaError):
        parse_scenario(json.dumps(data))


def test_decreasing_actor_ticks_is_schema_error():
    data = happy_data()
    data["actions"] = [
        {"tick": 5, "actor": "bank_br", "action": "brc", "trade_ref": "TR-2024-001"},
        {"tick": 4, "actor": "bank_br", "action": "gr", "trade_ref": "TR-2024-001"},
    ]
    with pytest.raises(SchemaError):
        parse_scenario(json.dumps(data))


def test_malformed_text_reports_location():
    with pytest.raises(ParseError) as info:
        parse_scenario('{\n  "name": "x",\n  "seed": ,\n}')
    assert info.value.line == 3


# -- run outcomes ------------------------------------------------------------


def test_happy_path_settles_with_brc_and_gr():
    report = run(bundled("happy_path")).report
    (ref, lc), = report["lcs"].items()
    assert lc["state"] == "Settled"
    record = report["compliance"][ref]
    assert record["brc_issuer"] == "bank_in" and record["gr_compliant"] is True and record["flags"] == []
    assert report["settlement"]["per_lc"][ref]["offramp"]["inr_out"] == 1_647_570_750
    assert report["settlement"]["conservation_violations"] == []


def test_duplicate_lc_is_rejected_and_flagged_as_fraud():
    report = run(bundled("duplicate_lc")).report
    frauds = [r for r in report["rejections"] if r["fraud"]]
    assert len(frauds) == 1 and frauds[0]["error"] == "DuplicateLc" and frauds[0]["actor"] == "bank_br2"
    assert len(report["lcs"]) == 1


def test_da_default_timing_within_five_to_seven_days():
    da = run(bundled("da_comparison")).report["timing"]["da"]
    assert da["TR-CMP-DA"]["within_5_7_days"] is True
    assert da["TR-CMP-DA-LATE"]["within_5_7_days"] is False


def test_cure_loop_records_each_outcome():
    lc = next(iter(run(bundled("cure_loop")).report["lcs"].values()))
    assert [p["exam_result"] for p in lc["presentations"]] == ["Discrepant", "Voided", "Clean"]
    assert lc["state"] == "Settled"


def test_faults_scenario_survives_silent_and_partitioned_validators():
    consensus = run(bundled("faults")).report["consensus"]
    assert consensus["silent"] and consensus["partitions"]
    assert consensus["round_timeouts"] > 0
    assert consensus["min_votes"] >= consensus["quorum"]


def test_governance_changes_membership():
    changes = run(bundled("governance")).report["consensus"]["membership_changes"]
    assert [(c["action"], c["subject"]) for c in changes] == [("Add", "bank_in5"), ("Remove", "bank_in2")]


def test_stalled_network_raises_with_context():
    data = happy_data()
    data["faults"] = {"silent": list(data["validators"][:2])}
    with pytest.raises(RunFailed) as info:
        run(parse_scenario(json.dumps(data)))
    assert info.value.height == 1 and info.value.tick >= 0


# -- determinism and verification ------------------------------------------------


@pytest.mark.parametrize("name", SCENARIOS)
def test_bundled_scenario_is_deterministic_and_verifies(name):
    first, second = run(bundled(name)), run(bundled(name))
    assert first.transcript == second.transcript
    transcript = load_transcript(first.lines)
    assert transcript.replay() == first.state
    assert verify(first.lines).clean
    assert report_json(build_report(first.lines)) == report_json(first.report)


def test_seed_override_changes_salts_not_outcome():
    a = run(bundled("happy_path"))
    b = run(bundled("happy_path"), seed=12345)
    assert a.transcript != b.transcript
    assert a.report["lcs"]["TR-2024-001"]["state"] == b.report["lcs"]["TR-2024-001"]["state"]
    assert verify(b.lines).clean


def tamper(lines, height, edit):
    out = list(lines)
    for i, line in enumerate(out):
        record = json.loads(line)
        if record.get("type") != "genesis" and record["block"]["height"] == height:
            edit(record)
            out[i] = json.dumps(record)
            return out
    raise AssertionError(f"no block {height}")


@pytest.mark.parametrize("height", [1, 4, 9])
def test_flipped_hex_digit_is_caught_at_its_height(height):
    lines = run(bundled("happy_path")).lines

    def edit(record):
        tx = record["block"]["txs"][0]
        tx["tx_id"] = flip_hex(tx["tx_id"])

    verdict = verify(tamper(lines, height, edit))
    assert verdict.violations
    assert all(v.startswith(f"height {height}:") for v in verdict.violations if "hash chain" in v)
    assert any(v.startswith(f"height {height}: hash chain") for v in verdict.violations)


def test_flipped_digit_in_payload_is_caught():
    lines = run(bundled("happy_path")).lines

    def edit(record):
        tx = next(t for t in record["block"]["txs"] if t["kind"] == "PresentDocs")
        docs = tx["payload"]["docs"]
        key = sorted(docs)[0]
        docs[key] = flip_hex(docs[key])

    verdict = verify(tamper(lines, 4, edit))
    assert any(v.startswith("height 4: hash chain") for v in verdict.violations)


def test_altered_settlement_amount_is_conservation_violation():
    lines = run(bundled("happy_path")).lines

    def edit(record):
        record["settlement"]["balances"]["exp_in"]["INR"] += 100

    last = json.loads(lines[-1])["block"]["height"]
    verdict = verify(tamper(lines, last, edit))
    assert any("conservation" in v for v in verdict.violations)


# -- CLI -----------------------------------------------------------------------


def test_cli_run_verify_report(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "happy_path", "--out", str(out), "--format", "json"]) == 0
    transcript = out / "happy_path.transcript.jsonl"
    report_file = out / "happy_path.report.json"
    assert transcript.exists() and report_file.exists()
    assert main(["verify", str(transcript)]) == 0
    regen = tmp_path / "regen"
    assert main(["report", str(transcript), "--out", str(regen), "--format", "json"]) == 0
    assert (regen / "happy_path.report.json").read_bytes() == report_file.read_bytes()

    lines = transcript.read_text().splitlines()
    record = json.loads(lines[3])
    record["block"]["tx_root"] = flip_hex(record["block"]["tx_root"])
    lines[3] = json.dumps(record)
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(bad)]) == 2
    capsys.readouterr()


def test_cli_errors_exit_one(tmp_path, capsys):
    assert main(["run", "--scenario", str(tmp_path / "missing.json")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{ nope")
    assert main(["run", "--scenario", str(broken)]) == 1
    assert "lcsim:" in capsys.readouterr().err


def test_cli_unreadable_transcript_is_a_violation(tmp_path, capsys):
    garbage = tmp_path / "t.jsonl"
    garbage.write_text("not json\n")
    assert main(["verify", str(garbage)]) == 2
    assert "unreadable transcript: line 1" in capsys.readouterr().out


def test_cli_indices(capsys):
    assert main(["indices", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["index"] for r in rows] == ["tii", "rca", "rca", "tiva"]


# -- golden files ------------------------------------------------------------------

GOLDEN = Path(__file__).parent / "golden"


def test_happy_path_matches_golden_transcript_and_report():
    result = run(bundled("happy_path"))
    assert result.transcript == (GOLDEN / "happy_path.transcript.jsonl").read_text()
    assert report_json(result.report) == (GOLDEN / "happy_path.report.json").read_text()
    assert verify(str(GOLDEN / "happy_path.transcript.jsonl")).clean
