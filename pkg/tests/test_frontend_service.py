import numpy as np
import pytest
import torch

from accent_forge.api.exceptions import AudioDecodeError, ValidationError
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.score import CLASS_INDEX
from accent_forge.business_model.utterance import Label
from accent_forge.services.frontend_service import (
    FrontendService,
    ManifestDataset,
    extract_features,
    fix_duration,
    frequency_to_bin,
    linear_filterbank,
    load_audio,
)

from helpers import tone, write_wav


class TestLoadAudio:
    def test_resamples_and_keeps_native_rate(self, tmp_path):
        path = write_wav(tmp_path / "a.wav", tone(300.0, 16000, 0.5), 16000)
        assert load_audio(path).sample_rate == 16000
        resampled = load_audio(path, 8000)
        assert resampled.sample_rate == 8000
        assert abs(len(resampled) - 4000) <= 1

    def test_stereo_is_averaged(self, tmp_path):
        left = tone(300.0, 8000, 0.1)
        path = write_wav(tmp_path / "s.wav", np.stack([left, left], axis=1), 8000)
        wave = load_audio(path)
        assert wave.samples.ndim == 1
        assert np.allclose(wave.samples, left, atol=1e-3)

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / "broken.wav"
        path.write_bytes(b"RIFFnothing")
        with pytest.raises(AudioDecodeError):
            load_audio(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(AudioDecodeError):
            load_audio(tmp_path / "absent.wav")


class TestFixDuration:
    def test_short_input_is_tiled(self):
        wave = Waveform(np.arange(1, 4, dtype=np.float32) / 10, 10)
        fixed = fix_duration(wave, 0.8, "crop_center")
        assert np.allclose(fixed.samples, [0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1, 0.2])

    def test_long_input_modes(self):
        wave = Waveform(np.arange(10, dtype=np.float32) / 10, 10)
        assert np.allclose(fix_duration(wave, 0.4, "tile").samples, [0.0, 0.1, 0.2, 0.3])
        assert np.allclose(fix_duration(wave, 0.4, "crop_center").samples, [0.3, 0.4, 0.5, 0.6])
        cropped = fix_duration(wave, 0.4, "crop_random", np.random.default_rng(0))
        assert len(cropped) == 4
        start = int(round(cropped.samples[0] * 10))
        assert np.allclose(cropped.samples, np.arange(start, start + 4) / 10)

    def test_exact_length_is_copy(self):
        wave = Waveform(np.ones(5, dtype=np.float32) * 0.5, 5)
        fixed = fix_duration(wave, 1.0, "tile")
        assert np.array_equal(fixed.samples, wave.samples)
        assert fixed.samples is not wave.samples

    def test_crop_random_needs_generator(self):
        with pytest.raises(ValidationError):
            fix_duration(Waveform(np.ones(10, dtype=np.float32) * 0.1, 10), 0.5, "crop_random")

    @pytest.mark.parametrize("target,mode", [(0.0, "tile"), (1.0, "stretch")])
    def test_invalid_arguments(self, target, mode):
        with pytest.raises(ValidationError):
            fix_duration(Waveform(np.ones(10, dtype=np.float32) * 0.1, 10), target, mode)


class TestFeatures:
    def test_frame_count(self, small_frontend):
        wave = Waveform(tone(500.0, 8000, 0.5), 8000)
        matrix = extract_features(wave, small_frontend)
        assert matrix.n_bins == 16
        assert matrix.n_frames == 1 + (4000 - 256) // 128
        assert np.all(np.isfinite(matrix.values))
        assert matrix.frame_hop_sec == pytest.approx(128 / 8000)

    def test_tone_lights_up_its_bin(self, small_frontend):
        spacing = 4000 / 17
        frequency = 6 * spacing
        matrix = extract_features(Waveform(tone(frequency, 8000, 0.5), 8000), small_frontend)
        assert frequency_to_bin(frequency, small_frontend) == 5
        assert int(np.argmax(matrix.values.mean(axis=1))) == 5

    def test_silence_uses_log_floor(self, small_frontend):
        matrix = extract_features(Waveform(np.zeros(4000, dtype=np.float32), 8000), small_frontend)
        assert np.allclose(matrix.values, np.log(small_frontend.log_floor))

    def test_filterbank_shape_and_peaks(self):
        weights = linear_filterbank(16, 256, 8000)
        assert weights.shape == (16, 129)
        assert np.all(weights >= 0)
        assert np.all(weights.max(axis=1) > 0.8)

    def test_rate_mismatch(self, small_frontend):
        with pytest.raises(ValidationError):
            extract_features(Waveform(tone(500.0, 16000, 0.5), 16000), small_frontend)

    def test_shorter_than_window(self, small_frontend):
        with pytest.raises(ValidationError):
            extract_features(Waveform(tone(500.0, 8000, 0.01), 8000), small_frontend)


class TestFrontendService:
    def test_cache_reuses_features(self, small_frontend, tmp_path):
        path = write_wav(tmp_path / "a.wav", tone(700.0, 8000, 0.7), 8000)
        service = FrontendService(small_frontend, cache_dir=tmp_path / "cache")
        first = service.eval_features("utt-a", path)
        assert len(list((tmp_path / "cache").rglob("*.npy"))) == 1
        path.unlink()
        second = service.eval_features("utt-a", path)
        assert np.array_equal(first.values, second.values)

    def test_cache_key_changes_with_config(self, small_frontend):
        other = small_frontend.model_copy(update={"n_bins": 20})
        assert FrontendService(small_frontend).config_hash != FrontendService(other).config_hash

    def test_eval_features_are_deterministic(self, small_frontend, tmp_path):
        path = write_wav(tmp_path / "a.wav", tone(700.0, 8000, 0.9), 8000)
        service = FrontendService(small_frontend)
        assert np.array_equal(service.eval_features("a", path).values, service.eval_features("a", path).values)


class TestManifestDataset:
    def test_items_and_labels(self, small_frontend, audio_manifest):
        manifest = audio_manifest(per_class=2)
        dataset = ManifestDataset(manifest, FrontendService(small_frontend))
        features, target = dataset[0]
        assert isinstance(features, torch.Tensor)
        assert tuple(features.shape) == (16, 30)
        assert target == CLASS_INDEX[Label.BONA_FIDE]
        assert dataset.labels == [1, 1, 0, 0]

    def test_train_mode_is_keyed_by_epoch(self, small_frontend, audio_manifest):
        manifest = audio_manifest(per_class=1, seconds=1.0)
        dataset = ManifestDataset(manifest, FrontendService(small_frontend), train=True, seed=3)
        first, _ = dataset[0]
        again, _ = dataset[0]
        assert torch.equal(first, again)

    def test_waveform_input(self, small_frontend, audio_manifest):
        dataset = ManifestDataset(audio_manifest(per_class=1), FrontendService(small_frontend), waveform_input=True)
        samples, _ = dataset[1]
        assert tuple(samples.shape) == (4000,)
