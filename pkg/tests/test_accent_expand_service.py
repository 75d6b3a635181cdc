import json
from collections import Counter

import numpy as np
import pytest
import soundfile as sf

from accent_forge.api.exceptions import (
    BackendUnreachableError,
    ConflictError,
    NotFoundError,
    SynthesisError,
    TransportError,
    ValidationError,
)
from accent_forge.backends.implementations.mock_synthesis_backend import MockSynthesisBackend
from accent_forge.business_model.tts_engine import ENGLISH_ACCENTS, OTHER_LANGUAGE, TTSEngineSpec, Transcript
from accent_forge.business_model.utterance import Label, Portion
from accent_forge.services.accent_expand_service import (
    AccentExpandService,
    assign_engines,
    load_registry,
    load_transcripts,
    register_engines,
)


def _transcripts(n):
    return [Transcript(f"t-{i}", f"sentence number {i}", "corpus") for i in range(n)]


def _engines(k):
    return [TTSEngineSpec(f"e{i}", "en", f"en-x{i}") for i in range(k)]


@pytest.fixture
def english_registry():
    name, specs = load_registry("eng")
    return register_engines(specs, name)


class FlakyBackend(MockSynthesisBackend):
    def __init__(self, failing_text, **kwargs):
        super().__init__(**kwargs)
        self.failing_text = failing_text

    def synthesize(self, engine_id, text):
        if text == self.failing_text:
            raise SynthesisError("engine recusou o texto")
        return super().synthesize(engine_id, text)


class OfflineBackend(MockSynthesisBackend):
    def synthesize(self, engine_id, text):
        raise TransportError("conexão recusada")


class TestTranscripts:
    def test_ids_follow_file_and_line(self, tmp_path):
        (tmp_path / "b.txt").write_text("second file\n", encoding="utf-8")
        (tmp_path / "a.txt").write_text("first line\n\nthird line\n", encoding="utf-8")
        transcripts = load_transcripts(tmp_path)
        assert [t.transcript_id for t in transcripts] == ["a-1", "a-3", "b-1"]
        assert transcripts[1].text == "third line"
        assert transcripts[0].source == tmp_path.name

    def test_single_file(self, tmp_path):
        path = tmp_path / "lines.txt"
        path.write_text("hello\n", encoding="utf-8")
        assert load_transcripts(path)[0].source == "lines"

    def test_missing_path(self, tmp_path):
        with pytest.raises(NotFoundError):
            load_transcripts(tmp_path / "absent")


class TestRegistry:
    def test_packaged_groups(self):
        english_name, english = load_registry("eng")
        other_name, other = load_registry("mix")
        assert english_name == ENGLISH_ACCENTS
        assert len(english) == 14
        assert all(e.group == ENGLISH_ACCENTS for e in english)
        assert other_name == OTHER_LANGUAGE
        assert len(other) == 78
        assert all(e.group == OTHER_LANGUAGE for e in other)

    def test_registry_file(self, tmp_path):
        path = tmp_path / "reg.json"
        path.write_text(json.dumps({
            "name": "custom",
            "engines": [{"engine_id": "x", "language_code": "de", "accent_tag": ""}],
        }), encoding="utf-8")
        name, specs = load_registry(path)
        assert name == "custom"
        assert specs[0].record_accent == "de"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "reg.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ValidationError):
            load_registry(path)

    def test_duplicate_engine_id(self):
        with pytest.raises(ConflictError):
            register_engines([TTSEngineSpec("x", "en"), TTSEngineSpec("x", "de")])


class TestAssignment:
    def test_round_robin_cycles_registry_order(self):
        pairs = assign_engines(_transcripts(5), _engines(2), "round_robin", seed=0)
        assert [engine for _, engine in pairs] == ["e0", "e1", "e0", "e1", "e0"]

    def test_uniform_random_is_balanced(self):
        pairs = assign_engines(_transcripts(1000), _engines(4), "uniform_random", seed=11)
        counts = Counter(engine for _, engine in pairs)
        bound = 5 * np.sqrt(1000 * 0.25 * 0.75)
        assert set(counts) == {"e0", "e1", "e2", "e3"}
        assert all(abs(c - 250) <= bound for c in counts.values())

    def test_uniform_random_is_seeded(self):
        first = assign_engines(_transcripts(50), _engines(3), "uniform_random", seed=4)
        second = assign_engines(_transcripts(50), _engines(3), "uniform_random", seed=4)
        assert first == second

    def test_no_transcripts(self):
        assert assign_engines([], _engines(3), "round_robin", seed=0) == []

    def test_empty_group(self):
        with pytest.raises(ValidationError):
            assign_engines(_transcripts(3), [], "round_robin", seed=0)

    def test_unknown_policy(self):
        with pytest.raises(ValidationError):
            assign_engines(_transcripts(3), _engines(3), "weighted", seed=0)


class TestExpand:
    def test_round_robin_covers_every_accent(self, english_registry, manifest_repository, tmp_path):
        service = AccentExpandService(MockSynthesisBackend(duration_sec=0.05), manifest_repository, workers=2)
        result = service.expand(_transcripts(50), english_registry, "eng", "round_robin", 0, tmp_path)
        manifest = result.manifest
        assert len(manifest) == 50
        assert result.failures == []
        assert len({r.source for r in manifest}) == 14
        record = manifest.get("t-0_gtts-en-au")
        assert record.label == Label.SPOOF
        assert record.portion == Portion.II
        assert record.language == "en"
        assert record.accent == "en-au"
        assert record.duration_sec == pytest.approx(0.05)
        audio, rate = sf.read(str(manifest.resolve(record)))
        assert rate == 24000
        assert audio.ndim == 1
        assert result.manifest_path.exists()
        assert result.failures_path.read_text(encoding="utf-8") == ""

    def test_rerun_is_identical(self, english_registry, manifest_repository, tmp_path):
        service = AccentExpandService(MockSynthesisBackend(duration_sec=0.05), manifest_repository)
        for run in ("a", "b"):
            service.expand(_transcripts(20), english_registry, "eng", "uniform_random", 9, tmp_path / run)
        assert (tmp_path / "a" / "manifest.jsonl").read_bytes() == (tmp_path / "b" / "manifest.jsonl").read_bytes()
        first = next((tmp_path / "a" / "audio").rglob("*.wav"))
        second = tmp_path / "b" / first.relative_to(tmp_path / "a")
        assert first.read_bytes() == second.read_bytes()

    def test_other_language_keeps_english_content(self, manifest_repository, tmp_path):
        name, specs = load_registry("mix")
        service = AccentExpandService(MockSynthesisBackend(duration_sec=0.05), manifest_repository)
        result = service.expand(_transcripts(3), register_engines(specs, name), "mix", "round_robin", 0, tmp_path)
        record = result.manifest.records[0]
        assert record.language == "en"
        assert record.accent == record.source[len("gtts-"):]

    def test_failed_synthesis_goes_to_failure_log(self, english_registry, manifest_repository, tmp_path):
        backend = FlakyBackend("sentence number 3", duration_sec=0.05)
        result = AccentExpandService(backend, manifest_repository).expand(
            _transcripts(10), english_registry, "eng", "round_robin", 0, tmp_path
        )
        assert len(result.manifest) == 9
        lines = result.failures_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        failure = json.loads(lines[0])
        assert failure["transcript_id"] == "t-3"
        assert failure["code"] == "SYNTHESIS_ERROR"

    def test_unreachable_backend(self, english_registry, manifest_repository, tmp_path):
        service = AccentExpandService(OfflineBackend(duration_sec=0.05), manifest_repository)
        with pytest.raises(BackendUnreachableError):
            service.expand(_transcripts(4), english_registry, "eng", "round_robin", 0, tmp_path)

    def test_unknown_group(self, english_registry, manifest_repository, tmp_path):
        service = AccentExpandService(MockSynthesisBackend(), manifest_repository)
        with pytest.raises(ValidationError):
            service.expand(_transcripts(1), english_registry, "klingon", "round_robin", 0, tmp_path)

    def test_workers_must_be_positive(self, manifest_repository):
        with pytest.raises(ValidationError):
            AccentExpandService(MockSynthesisBackend(), manifest_repository, workers=0)
