import json

import pytest
from click.testing import CliRunner

from corrkit.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def synth_out(workdir):
    runner = CliRunner()
    out = workdir / "task"
    r = runner.invoke(
        main,
        ["synth", "--task", "single-coordination", "--seed", "3",
         "--out-dir", str(out), "--json"],
    )
    assert r.exit_code == 0, r.output
    return out, json.loads(r.output)


@pytest.fixture(scope="module")
def learned(workdir, synth_out):
    out, payload = synth_out
    runner = CliRunner()
    bundle_path = workdir / "bundle.json"
    r = runner.invoke(
        main,
        ["learn", payload["demos"], "--surface", str(out / "surface.json"),
         "--out", str(bundle_path), "--json"],
    )
    assert r.exit_code == 0, r.output
    return bundle_path, json.loads(r.output)


def test_synth_writes_artifacts(synth_out):
    out, payload = synth_out
    assert (out / "demos.txt").exists()
    assert (out / "surface.json").exists()
    assert (out / "truth.json").exists()
    assert payload["n_demos"] == 8
    truth = json.loads((out / "truth.json").read_text())
    assert abs(sum(truth["shares"]) - 1.0) < 1e-12


def test_synth_deterministic(workdir, synth_out):
    _, payload = synth_out
    runner = CliRunner()
    r = runner.invoke(
        main,
        ["synth", "--task", "single-coordination", "--seed", "3",
         "--out-dir", str(workdir / "again"), "--json"],
    )
    assert json.loads(r.output)["digest"] == payload["digest"]


def test_ingest_summarizes(synth_out):
    _, payload = synth_out
    runner = CliRunner()
    r = runner.invoke(main, ["ingest", payload["demos"], "--json"])
    assert r.exit_code == 0, r.output
    info = json.loads(r.output)
    assert info["n_demos"] == 8
    assert info["digest"] == payload["digest"]
    assert "f_n" in info["channels"]


def test_ingest_rejects_garbage(workdir):
    bad = workdir / "bad.txt"
    bad.write_text("not a demo log\n")
    runner = CliRunner()
    r = runner.invoke(main, ["ingest", str(bad)])
    assert r.exit_code == 1
    assert "invalid demo log" in r.output


def test_learn_reports_structure(learned):
    bundle_path, payload = learned
    assert bundle_path.exists()
    kinds = [s["kind"] for s in payload["segments"]]
    assert kinds == ["free_space", "in_contact", "free_space"]
    assert payload["recommended_k"] == 1


def test_inspect_pcs_shows_planted_weights(learned):
    bundle_path, _ = learned
    runner = CliRunner()
    r = runner.invoke(
        main, ["inspect-pcs", str(bundle_path), "--segment", "1", "--json"]
    )
    assert r.exit_code == 0, r.output
    seg = json.loads(r.output)["segments"][0]
    assert seg["kind"] == "in_contact"
    weights = seg["mid_frame_components"][0]["weights"]
    assert abs(abs(weights["f_n"]) - 0.8) < 0.05
    assert abs(abs(weights["v_tool"]) - 0.6) < 0.05
    r = runner.invoke(main, ["inspect-pcs", str(bundle_path), "--segment", "9"])
    assert r.exit_code == 1


def test_simulate_and_replay(workdir, learned):
    bundle_path, _ = learned
    log_path = workdir / "run.jsonl"
    runner = CliRunner()
    r = runner.invoke(
        main,
        ["simulate", str(bundle_path), "--policy", "corrective",
         "--duration", "40", "--log", str(log_path), "--json"],
    )
    assert r.exit_code == 0, r.output
    payload = json.loads(r.output)
    assert payload["final_lifecycle"] == "completed"
    assert payload["removal_fraction"] > 0.95

    r = runner.invoke(main, ["replay", str(bundle_path), str(log_path), "--json"])
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["match"] is True


def test_replay_flags_mismatch(workdir, learned):
    bundle_path, _ = learned
    log_path = workdir / "short.jsonl"
    runner = CliRunner()
    runner.invoke(
        main,
        ["simulate", str(bundle_path), "--policy", "push", "--duration", "2",
         "--log", str(log_path)],
    )
    lines = log_path.read_text().splitlines()
    frame = json.loads(lines[10])
    frame["x"][0] += 0.5
    lines[10] = json.dumps(frame)
    log_path.write_text("\n".join(lines) + "\n")
    r = runner.invoke(main, ["replay", str(bundle_path), str(log_path)])
    assert r.exit_code == 1
    assert "MISMATCH" in r.output
