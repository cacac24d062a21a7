import json

import pytest

from helpers import cli_pipeline
from scholedger import scoring as sc
from scholedger.cli import main, run_command
from scholedger.fixture import build_fixture
from scholedger.graphs import commentary_trace


@pytest.fixture
def fixture_dir(tmp_path):
    res = run_command(["fixture", "--dir", str(tmp_path)])
    assert res.exit_code == 0
    return tmp_path, res.json()["ref"]


def test_verify_valid_chain(fixture_dir):
    d, _ = fixture_dir
    res = run_command(["verify", "--ledger", str(d / "chain.jsonl")])
    assert res.exit_code == 0 and res.json() == {"ok": True}


def test_verify_tampered_event_4(fixture_dir):
    d, _ = fixture_dir
    lines = (d / "chain.jsonl").read_bytes().split(b"\n")
    env = json.loads(lines[4])
    env["body"]["tau"] += 1
    env["timestamp"] += 1
    lines[4] = json.dumps(env, sort_keys=True, separators=(",", ":")).encode()
    (d / "bad.jsonl").write_bytes(b"\n".join(lines))
    res = run_command(["verify", "--ledger", str(d / "bad.jsonl")])
    assert res.exit_code == 1
    assert res.json()["ok"] is False and res.json()["seq"] == 4


def test_score_identity_matches_library(fixture_dir):
    d, ref = fixture_dir
    ledger, _ = build_fixture()
    t = ledger.events[-1].timestamp
    res = run_command(["score", "--dir", str(d), "--identity", ref["alice"], "--at", str(t)])
    assert res.exit_code == 0
    expected = sc.identity_report(ref["alice"], t, ledger.state, ledger.config).to_dict()
    assert res.json() == expected
    assert res.json()["scores"]["reputation"] == 4.0


def test_export_trace_matches_library(fixture_dir, tmp_path):
    d, ref = fixture_dir
    out = tmp_path / "trace.json"
    assert run_command(["export", "--dir", str(d), "--kind", "trace", "--target", ref["E1"],
                        "--out", str(out)]).exit_code == 0
    rows = json.loads(out.read_text())["rows"]
    ledger, _ = build_fixture()
    assert [(r["event_id"], r["meta_depth"]) for r in rows] == [
        (e.event_id, e.meta_depth) for e in commentary_trace(ref["E1"], ledger.state)]


def test_export_scores_twice_identical(fixture_dir, tmp_path):
    d, _ = fixture_dir
    for name in ("one.json", "two.json"):
        run_command(["export", "--dir", str(d), "--kind", "scores", "--out", str(tmp_path / name), "--at", "5"])
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()


def test_export_graph_of_empty_ledger(tmp_path):
    assert run_command(["init", "--dir", str(tmp_path)]).exit_code == 0
    out = tmp_path / "g.tsv"
    assert run_command(["export", "--dir", str(tmp_path), "--kind", "graph", "--out", str(out)]).exit_code == 0
    assert out.read_bytes() == b""


def test_score_figure(fixture_dir, tmp_path):
    d, ref = fixture_dir
    fig = tmp_path / "a1.png"
    res = run_command(["score", "--dir", str(d), "--artifact", ref["A1"], "--figure", str(fig), "--at", "1"])
    assert res.exit_code == 0 and fig.read_bytes()[:4] == b"\x89PNG"


def test_simulate_writes_csv_and_png(tmp_path):
    csv = tmp_path / "sim" / "run.csv"
    res = run_command(["simulate", "--epochs", "10", "--seed", "3", "--csv", str(csv), "--compare"])
    assert res.exit_code == 0
    assert csv.read_text().startswith("epoch,loss,p_m,rep_honest,rep_troll\n")
    assert (tmp_path / "sim" / "run.png").exists()
    assert (tmp_path / "sim" / "run_compare.csv").exists()


def test_simulate_sweep():
    res = run_command(["simulate", "--epochs", "20", "--seeds", "5"])
    assert res.exit_code == 0 and res.json()["seeds"] == 5


@pytest.mark.parametrize("override", [{"damp_lambda": 1.0}, {"impact_alpha": 0.0}])
def test_config_command_rejects(tmp_path, override):
    from scholedger.config import GovernanceConfig

    d = GovernanceConfig().to_dict()
    d.update(override)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(d))
    res = run_command(["config", str(path)])
    assert res.exit_code == 1 and res.json()["violations"]


def test_usage_errors(tmp_path):
    assert run_command(["bogus"]).exit_code == 2
    assert run_command(["score", "--dir", str(tmp_path)]).exit_code == 2
    assert run_command(["cite", "--nope"]).exit_code == 2


def test_rejected_event_leaves_chain(fixture_dir):
    d, ref = fixture_dir
    before = (d / "chain.jsonl").read_bytes()
    res = run_command(["retract", "--dir", str(d), "--key", "bob", "--target", ref["A1"], "--reason", "superseded",
                       "--involuntary", "--at", "1800000000"])
    assert res.exit_code == 1 and "unauthorized retraction" in res.json()["violations"]
    assert (d / "chain.jsonl").read_bytes() == before


def test_analyze(fixture_dir):
    d, ref = fixture_dir
    res = run_command(["analyze", "--dir", str(d), "--pair", ref["A1"], ref["A2"], "--artifact", ref["E1"]])
    rows = [json.loads(x) for x in res.stdout.splitlines()]
    assert [r["operator"] for r in rows] == ["contradiction", "similarity", "overlap", "novelty"]
    assert rows[3]["value"] == pytest.approx(3.0 - 5 / (30 * 86400), abs=1e-12)


def test_anchor_then_verify(fixture_dir):
    d, _ = fixture_dir
    assert run_command(["anchor", "--dir", str(d), "--at", "1"]).exit_code == 0
    res = run_command(["verify", "--dir", str(d)])
    assert res.json() == {"ok": True, "anchors": 1}


def test_pipeline_reproducible(tmp_path):
    assert cli_pipeline(tmp_path / "a") == cli_pipeline(tmp_path / "b")


def test_main_entry(capsys, fixture_dir):
    d, _ = fixture_dir
    assert main(["verify", "--dir", str(d)]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True
