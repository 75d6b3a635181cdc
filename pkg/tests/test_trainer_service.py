import json

import pytest
import torch
from torch.utils.data import DataLoader, TensorDataset

from accent_forge.api.dto import AugmentConfig, ModelConfig, RunConfig, TrainConfig
from accent_forge.api.exceptions import BusinessRuleError, TrainingDivergedError, ValidationError
from accent_forge.business_model.manifest import Manifest
from accent_forge.models.checkpoint import load_checkpoint, save_checkpoint
from accent_forge.models.factory import build_model, parameter_checksum
from accent_forge.services.trainer_service import (
    TrainerService,
    lr_at,
    ssl_training_policy,
    train,
    validation_eer,
)


def _separable(n_per_class, frames=12, seed=0):
    generator = torch.Generator().manual_seed(seed)
    x = 0.5 * torch.randn(2 * n_per_class, 16, frames, generator=generator)
    x[:n_per_class, 2:6, :] += 2.0
    x[n_per_class:, 2:6, :] -= 2.0
    y = torch.cat([torch.ones(n_per_class), torch.zeros(n_per_class)]).long()
    return TensorDataset(x, y)


class TestSchedules:
    def test_inverse_sqrt_schedule(self):
        config = TrainConfig(base_lr=1e-3, warmup_steps=1000)
        assert lr_at(1000, config) == pytest.approx(1e-3)
        assert lr_at(4000, config) == pytest.approx(5e-4)
        assert lr_at(500, config) == pytest.approx(5e-4)
        assert lr_at(1, config) == pytest.approx(1e-6)

    def test_step_starts_at_one(self):
        with pytest.raises(ValidationError):
            lr_at(0, TrainConfig())

    def test_ssl_policy(self):
        config = TrainConfig(schedule_kind="ssl_exponential", ssl_freeze_epochs=10, ssl_warmup_epochs=5, ssl_decay_gamma=0.9)
        assert ssl_training_policy(10, config)[0] is True
        assert ssl_training_policy(11, config)[0] is False
        assert ssl_training_policy(3, config)[1] == pytest.approx(0.6)
        assert ssl_training_policy(5, config)[1] == pytest.approx(1.0)
        assert ssl_training_policy(7, config)[1] == pytest.approx(0.81)

    def test_ssl_policy_needs_ssl_schedule(self):
        with pytest.raises(ValidationError):
            ssl_training_policy(1, TrainConfig())


class TestTrainLoop:
    def test_patience_stops_and_keeps_best_epoch(self, toy_model_config):
        metrics = iter([0.5, 0.4, 0.45, 0.41, 0.42, 0.1])
        config = TrainConfig(patience_epochs=3, max_epochs=10, batch_size=8, warmup_steps=1)
        model = build_model(toy_model_config, seed=0)
        _, history = train(model, _separable(8), _separable(4, seed=1), config, lambda m, e: next(metrics))
        assert history.best_epoch == 2
        assert history.best_metric == pytest.approx(0.4)
        assert history.validations == 5
        assert history.stop_reason == "patience"

    def test_max_steps(self, toy_model_config):
        config = TrainConfig(max_steps=3, max_epochs=10, batch_size=4, warmup_steps=1)
        _, history = train(build_model(toy_model_config, seed=0), _separable(8), _separable(4), config, lambda m, e: 0.5)
        assert history.stop_reason == "max_steps"
        assert history.epochs[-1].steps == 3

    def test_learns_separable_features(self, toy_model_config):
        config = TrainConfig(base_lr=5e-3, warmup_steps=20, batch_size=16, max_epochs=25, max_steps=200, seed=0)
        model = build_model(toy_model_config, seed=0)
        valid = _separable(32, seed=2)
        train(model, _separable(64, seed=1), valid, config)
        loader = DataLoader(valid, batch_size=16)
        assert validation_eer(model, loader) < 0.05

    def test_single_class_is_rejected(self, toy_model_config):
        data = TensorDataset(torch.randn(4, 16, 12), torch.ones(4).long())
        with pytest.raises(BusinessRuleError):
            train(build_model(toy_model_config, seed=0), data, _separable(2), TrainConfig())

    def test_non_finite_loss(self, toy_model_config):
        x = torch.full((4, 16, 12), float("nan"))
        data = TensorDataset(x, torch.tensor([0, 1, 0, 1]))
        with pytest.raises(TrainingDivergedError):
            train(build_model(toy_model_config, seed=0), data, _separable(2), TrainConfig(batch_size=4))

    def test_deterministic_runs_match(self, toy_model_config):
        config = TrainConfig(deterministic=True, max_steps=6, batch_size=4, warmup_steps=2, seed=9)
        checksums = []
        for _ in range(2):
            model = build_model(toy_model_config, seed=9)
            train(model, _separable(8), _separable(4, seed=1), config)
            checksums.append(parameter_checksum(model))
        assert checksums[0] == checksums[1]

    def test_ssl_schedule_freezes_encoder(self):
        model = build_model(
            ModelConfig(variant="ssl_recurrent", ssl_encoder_dim=8, ssl_frame_samples=80, recurrent_hidden=8), seed=0
        )
        x = 0.1 * torch.randn(8, 800)
        data = TensorDataset(x, torch.tensor([0, 1] * 4))
        config = TrainConfig(schedule_kind="ssl_exponential", ssl_freeze_epochs=1, ssl_warmup_epochs=1,
                             max_epochs=2, patience_epochs=5, batch_size=4)
        _, history = train(model, data, data, config, lambda m, e: 0.5)
        assert [e.encoder_frozen for e in history.epochs] == [True, False]

    def test_frozen_encoder_is_untouched_by_optimizer_steps(self):
        model = build_model(
            ModelConfig(variant="ssl_recurrent", ssl_encoder_dim=8, ssl_frame_samples=80, recurrent_hidden=8), seed=0
        )
        x = 0.5 * torch.randn(8, 800, generator=torch.Generator().manual_seed(0))
        data = TensorDataset(x, torch.tensor([0, 1] * 4))
        config = TrainConfig(schedule_kind="ssl_exponential", ssl_freeze_epochs=1, ssl_warmup_epochs=1,
                             max_epochs=2, patience_epochs=5, batch_size=4, base_lr=1e-2)
        initial = (parameter_checksum(model.encoder), parameter_checksum(model.lstm))
        seen = []

        def record(m, epoch):
            seen.append((parameter_checksum(m.encoder), parameter_checksum(m.lstm)))
            return 1.0 / epoch

        _, history = train(model, data, data, config, record)
        assert history.epochs[0].steps == 2
        after_frozen, after_unfrozen = seen
        assert after_frozen[0] == initial[0]
        assert after_frozen[1] != initial[1]
        assert after_unfrozen[0] != after_frozen[0]

    def test_memorizes_small_training_set(self, toy_model_config):
        config = TrainConfig(base_lr=1e-2, warmup_steps=10, weight_decay=0.0, batch_size=32,
                             max_epochs=200, max_steps=200, patience_epochs=5, seed=0)
        model = build_model(toy_model_config, seed=0)
        _, history = train(model, _separable(16, seed=3), _separable(2), config, lambda m, e: 1.0 / e)
        assert history.epochs[-1].steps <= 200
        assert min(e.train_loss for e in history.epochs) < 0.05

    def test_single_class_validation_fails_before_training(self, toy_model_config):
        model = build_model(toy_model_config, seed=0)
        before = parameter_checksum(model)
        valid = TensorDataset(torch.randn(4, 16, 12), torch.ones(4).long())
        with pytest.raises(ValidationError):
            train(model, _separable(4), valid, TrainConfig(batch_size=4))
        assert parameter_checksum(model) == before

    def test_saved_checkpoint_reproduces_best_metric(self, toy_model_config, tmp_path):
        config = TrainConfig(base_lr=2e-3, warmup_steps=4, batch_size=8, max_epochs=4, patience_epochs=4, seed=1)
        valid = _separable(6, seed=5)
        valid.tensors[0].add_(1.5 * torch.randn(valid.tensors[0].shape, generator=torch.Generator().manual_seed(6)))
        payload, history = train(build_model(toy_model_config, seed=1), _separable(12, seed=4), valid, config)
        save_checkpoint(tmp_path / "best.pt", payload)
        model, _ = load_checkpoint(tmp_path / "best.pt")
        rescored = validation_eer(model, DataLoader(valid, batch_size=config.batch_size))
        assert abs(rescored - history.best_metric) <= 1e-9


class TestTrainerService:
    def test_train_from_manifests_writes_checkpoint(self, audio_manifest, small_frontend, toy_model_config, tmp_path):
        manifest = audio_manifest(per_class=3)
        run_config = RunConfig(
            frontend=small_frontend,
            model=toy_model_config,
            augment=AugmentConfig(apply_prob=1.0, n_fft=256, hop_length=64),
            trainer=TrainConfig(max_epochs=1, batch_size=4, warmup_steps=2),
        )
        checkpoint, history = TrainerService(run_config).train_from_manifests(manifest, manifest, tmp_path / "run")
        model, payload = load_checkpoint(checkpoint)
        assert payload["config_hash"] == run_config.config_hash
        assert history.best_epoch == 1
        saved = json.loads((tmp_path / "run" / "history.json").read_text(encoding="utf-8"))
        assert saved["best_epoch"] == 1
        assert model.config == toy_model_config

    def test_single_class_manifest(self, audio_manifest, tmp_path):
        manifest = audio_manifest(per_class=2)
        bona_only = Manifest([r for r in manifest if r.is_bona_fide], "bona", manifest.root)
        with pytest.raises(BusinessRuleError):
            TrainerService(RunConfig()).train_from_manifests(bona_only, manifest, tmp_path / "run")

    def test_single_class_validation_manifest(self, audio_manifest, tmp_path):
        manifest = audio_manifest(per_class=2)
        spoof_only = Manifest([r for r in manifest if not r.is_bona_fide], "spoof", manifest.root)
        with pytest.raises(ValidationError):
            TrainerService(RunConfig()).train_from_manifests(manifest, spoof_only, tmp_path / "run")
        assert not (tmp_path / "run" / "checkpoint.pt").exists()
