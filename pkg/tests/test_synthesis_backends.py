import io
import json
import urllib.error

import numpy as np
import pytest
import soundfile as sf

from accent_forge.api.exceptions import EngineUnknownError, SynthesisError, TextTooLongError, TransportError, ValidationError
from accent_forge.backends.implementations import remote_synthesis_backend
from accent_forge.backends.implementations.mock_conversion_backend import MockConversionBackend
from accent_forge.backends.implementations.mock_synthesis_backend import MockSynthesisBackend
from accent_forge.backends.implementations.remote_synthesis_backend import RemoteSynthesisBackend
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.tts_engine import TTSEngineSpec

from helpers import tone

ENGINE = TTSEngineSpec("gtts-en-au", "en", "en-au", 22050)


def _wav_bytes(samples, rate):
    buffer = io.BytesIO()
    sf.write(buffer, samples, rate, format="WAV", subtype="PCM_16")
    return buffer.getvalue()


class _Response:
    def __init__(self, payload):
        self.payload = payload

    def read(self):
        return self.payload

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


class TestMockSynthesis:
    def test_same_request_same_waveform(self):
        backend = MockSynthesisBackend(duration_sec=0.1)
        first = backend.synthesize("gtts-en-au", "hello there")
        second = backend.synthesize("gtts-en-au", "hello there")
        assert np.array_equal(first.samples, second.samples)
        assert first.sample_rate == 24000
        assert len(first) == 2400

    def test_engine_and_text_change_waveform(self):
        backend = MockSynthesisBackend(duration_sec=0.1)
        base = backend.synthesize("gtts-en-au", "hello there").samples
        assert not np.array_equal(base, backend.synthesize("gtts-en-gb", "hello there").samples)
        assert not np.array_equal(base, backend.synthesize("gtts-en-au", "hello here").samples)

    def test_registry_sets_rate_and_engines(self):
        backend = MockSynthesisBackend([ENGINE], duration_sec=0.1)
        assert backend.synthesize("gtts-en-au", "hi").sample_rate == 22050
        with pytest.raises(EngineUnknownError):
            backend.synthesize("gtts-en-gb", "hi")

    def test_empty_text(self):
        with pytest.raises(ValidationError):
            MockSynthesisBackend().synthesize("gtts-en-au", "   ")

    def test_text_too_long(self):
        with pytest.raises(TextTooLongError):
            MockSynthesisBackend(max_text_length=5).synthesize("gtts-en-au", "too long text")


class TestMockConversion:
    def test_deterministic_and_target_dependent(self):
        source = Waveform(tone(220.0, 16000, 0.2), 16000)
        target = Waveform(tone(330.0, 16000, 0.2), 16000)
        backend = MockConversionBackend()
        first = backend.convert(source, "a", target, "b")
        assert np.array_equal(first.samples, backend.convert(source, "a", target, "b").samples)
        assert not np.array_equal(first.samples, backend.convert(source, "a", target, "c").samples)
        assert len(first) == len(source)


class TestRemoteSynthesis:
    def _backend(self, **kwargs):
        kwargs.setdefault("backoff_sec", 0.0)
        kwargs.setdefault("rate_limit_rps", None)
        return RemoteSynthesisBackend("http://tts.local/synthesize", [ENGINE], api_key="k", **kwargs)

    def test_posts_engine_request_and_decodes_wav(self, monkeypatch):
        sent = {}

        def fake_urlopen(request, timeout):
            sent["body"] = json.loads(request.data.decode("utf-8"))
            sent["auth"] = request.get_header("Authorization")
            return _Response(_wav_bytes(tone(440.0, 22050, 0.1), 22050))

        monkeypatch.setattr(remote_synthesis_backend.urllib.request, "urlopen", fake_urlopen)
        wave = self._backend().synthesize("gtts-en-au", "good morning")
        assert sent["body"] == {
            "engine_id": "gtts-en-au", "language_code": "en", "accent_tag": "en-au", "text": "good morning",
        }
        assert sent["auth"] == "Bearer k"
        assert wave.sample_rate == 22050
        assert len(wave) == 2205

    def test_server_errors_are_retried(self, monkeypatch):
        calls = []

        def fake_urlopen(request, timeout):
            calls.append(1)
            if len(calls) < 3:
                raise urllib.error.HTTPError(request.full_url, 503, "busy", {}, None)
            return _Response(_wav_bytes(tone(440.0, 22050, 0.05), 22050))

        monkeypatch.setattr(remote_synthesis_backend.urllib.request, "urlopen", fake_urlopen)
        self._backend(max_retries=3).synthesize("gtts-en-au", "retry me")
        assert len(calls) == 3

    def test_client_error_is_not_retried(self, monkeypatch):
        calls = []

        def fake_urlopen(request, timeout):
            calls.append(1)
            raise urllib.error.HTTPError(request.full_url, 400, "bad", {}, None)

        monkeypatch.setattr(remote_synthesis_backend.urllib.request, "urlopen", fake_urlopen)
        with pytest.raises(SynthesisError) as err:
            self._backend().synthesize("gtts-en-au", "bad request")
        assert err.value.code == "HTTP_ERROR"
        assert len(calls) == 1

    def test_transport_failure_after_retries(self, monkeypatch):
        def fake_urlopen(request, timeout):
            raise urllib.error.URLError("connection refused")

        monkeypatch.setattr(remote_synthesis_backend.urllib.request, "urlopen", fake_urlopen)
        with pytest.raises(TransportError):
            self._backend(max_retries=2).synthesize("gtts-en-au", "hello")

    def test_invalid_audio_payload(self, monkeypatch):
        monkeypatch.setattr(
            remote_synthesis_backend.urllib.request, "urlopen", lambda request, timeout: _Response(b"not audio")
        )
        with pytest.raises(SynthesisError):
            self._backend().synthesize("gtts-en-au", "hello")

    def test_from_env_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv(remote_synthesis_backend.ENDPOINT_ENV, raising=False)
        with pytest.raises(ValidationError):
            RemoteSynthesisBackend.from_env([ENGINE])

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv(remote_synthesis_backend.ENDPOINT_ENV, "http://tts.local")
        backend = RemoteSynthesisBackend.from_env([ENGINE])
        assert backend.endpoint == "http://tts.local"
        assert backend.capabilities.engine_ids == frozenset({"gtts-en-au"})
