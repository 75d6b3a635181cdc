import json

import pytest

import main
from accent_forge.api.response import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION
from accent_forge.business_model.manifest import Manifest

from helpers import make_record


def _error(captured):
    return json.loads(captured.err.strip().splitlines()[-1])


@pytest.fixture
def run(tmp_path):
    provenance = tmp_path / "prov"

    def invoke(*args):
        return main.dispatch(["--provenance-dir", str(provenance), *[str(a) for a in args]])

    invoke.provenance = provenance / "provenance.jsonl"
    return invoke


@pytest.fixture
def saved_manifest(manifest_repository, tmp_path):
    def save(records, name="m.jsonl"):
        path = tmp_path / name
        manifest_repository.save(Manifest(records, path.stem, str(tmp_path)), path)
        return path

    return save


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "frontend": {"sample_rate": 8000, "window": 256, "hop": 128, "n_bins": 16, "duration_sec": 0.5},
        "model": {"variant": "se_res2net", "width": [8, 16], "depth": [1, 1], "input_bins": 16},
        "augment": {"enabled": False},
        "trainer": {"max_epochs": 1, "batch_size": 4, "warmup_steps": 2},
    }), encoding="utf-8")
    return path


def test_manifest_summarize(run, saved_manifest, capsys):
    path = saved_manifest([make_record("a", "bona_fide", "en"), make_record("b", "spoof", "de")])
    assert run("manifest", "summarize", "--in", path, "--by", "language") == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "language\tbona_fide\tspoof\ttotal"
    assert lines[1:] == ["de\t0\t1\t1", "en\t1\t0\t1"]


def test_provenance_is_appended(run, saved_manifest):
    path = saved_manifest([make_record("a")])
    run("manifest", "summarize", "--in", path)
    run("manifest", "summarize", "--in", path)
    records = [json.loads(line) for line in run.provenance.read_text(encoding="utf-8").splitlines()]
    assert len(records) == 2
    assert records[0]["command"] == "manifest"
    assert records[0]["status"] == "success"
    assert records[0]["config_hash"] == records[1]["config_hash"]
    assert "torch" in records[0]["versions"]


def test_manifest_split(run, saved_manifest, tmp_path, capsys):
    records = [make_record(f"r{i:02d}", "bona_fide" if i < 5 else "spoof") for i in range(20)]
    path = saved_manifest(records)
    code = run("--seed", 3, "manifest", "split", "--in", path, "--ratio", "4:1",
               "--out-train", tmp_path / "train.jsonl", "--out-valid", tmp_path / "valid.jsonl")
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"train": 16, "valid": 4, "seed": 3}


def test_bad_ratio(run, saved_manifest, tmp_path, capsys):
    path = saved_manifest([make_record("a")])
    code = run("manifest", "split", "--in", path, "--ratio", "four",
               "--out-train", tmp_path / "t.jsonl", "--out-valid", tmp_path / "v.jsonl")
    assert code == EXIT_VALIDATION
    assert _error(capsys.readouterr())["error"]["code"] == "VALIDATION_ERROR"


def test_unknown_subcommand(run, capsys):
    assert run("frobnicate") == EXIT_USAGE
    assert _error(capsys.readouterr())["error"]["code"] == "USAGE_ERROR"


def test_missing_required_option(run):
    assert run("manifest", "summarize") == EXIT_USAGE


def test_invalid_config(run, tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"trainer": {"learning_rate": 1.0}}), encoding="utf-8")
    assert run("--config", config, "report", "reproduce") == EXIT_VALIDATION


def test_single_class_training_is_rejected(run, saved_manifest, tmp_path, capsys):
    path = saved_manifest([make_record("a"), make_record("b")])
    code = run("train", "--train", path, "--valid", path, "--out", tmp_path / "run")
    assert code == EXIT_VALIDATION
    assert _error(capsys.readouterr())["error"]["code"] == "BUSINESS_RULE_VIOLATION"
    last = json.loads(run.provenance.read_text(encoding="utf-8").splitlines()[-1])
    assert last["status"] == "failure"
    assert last["exit_code"] == EXIT_VALIDATION


def test_report_reproduce(run, capsys):
    assert run("report", "reproduce") == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("entry\texpected\tactual\ttolerance\tstatus\tpassed")
    assert "accent_expansion/7_vs_6" in out


def test_expand_with_mock_backend(run, tmp_path, capsys):
    transcripts = tmp_path / "lines.txt"
    transcripts.write_text("one\ntwo\nthree\n", encoding="utf-8")
    code = run("expand", "--transcripts", transcripts, "--group", "eng", "--policy", "round_robin",
               "--mock-duration", 0.05, "--out", tmp_path / "eng")
    assert code == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["records"] == 3
    assert document["registry"] == "english-accents"
    assert (tmp_path / "eng" / "manifest.jsonl").exists()


def test_train_score_eval_pipeline(run, audio_manifest, manifest_repository, small_config, tmp_path, capsys):
    manifest = audio_manifest(languages=("de", "en"), per_class=2)
    path = tmp_path / "test.jsonl"
    manifest_repository.save(manifest, path)

    assert run("--config", small_config, "train", "--train", path, "--valid", path, "--out", tmp_path / "run") == EXIT_OK
    assert (tmp_path / "run" / "checkpoint.pt").exists()
    scores = tmp_path / "scores.txt"
    assert run("--config", small_config, "score", "--checkpoint", tmp_path / "run" / "checkpoint.pt",
               "--manifest", path, "--out", scores) == EXIT_OK
    capsys.readouterr()
    assert run("--config", small_config, "eval", "--scores", scores, "--manifest", path,
               "--out", tmp_path / "report") == EXIT_OK
    table = capsys.readouterr().out.splitlines()
    assert table[0].startswith("group_by\tkey\tn_bona_fide\tn_spoof\teer")
    assert [line.split("\t")[1] for line in table[1:]] == ["all", "de", "en"]
    assert (tmp_path / "report" / "radar.svg").exists()
