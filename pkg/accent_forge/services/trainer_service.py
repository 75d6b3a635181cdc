"""
Serviço de treino.
Contém a agenda de learning rate, a política do encoder SSL e o laço de treino
com parada antecipada por EER de validação.
"""

import copy
import json
import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import torch
import torch.nn as nn
from torch.optim.lr_scheduler import LambdaLR
from torch.utils.data import DataLoader, Dataset, TensorDataset
from tqdm import tqdm

from accent_forge.api.dto import RunConfig, TrainConfig
from accent_forge.api.exceptions import BusinessRuleError, StorageError, TrainingDivergedError, ValidationError
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.score import CLASS_INDEX
from accent_forge.business_model.training import EpochRecord, TrainHistory
from accent_forge.business_model.utterance import Label
from accent_forge.models.checkpoint import checkpoint_payload, save_checkpoint
from accent_forge.models.factory import build_model, uses_waveform_input
from accent_forge.services.augment_service import AugmentService
from accent_forge.services.eval_service import compute_eer_arrays
from accent_forge.services.frontend_service import FrontendService, ManifestDataset

logger = logging.getLogger(__name__)

ValidMetricFn = Callable[[nn.Module, int], float]


# =============================================================================
# SCHEDULES
# =============================================================================

def lr_factor(step: int, warmup_steps: int) -> float:
    return min(step / warmup_steps, math.sqrt(warmup_steps / step))


def lr_at(step: int, config: TrainConfig) -> float:
    """
    Learning rate da atualização `step` (1-based): aquecimento linear até
    warmup_steps e depois decaimento com o inverso da raiz do passo.

    Raises:
        ValidationError: Se step < 1
    """
    if step < 1:
        raise ValidationError("step deve ser >= 1", "step")
    return config.base_lr * lr_factor(step, config.warmup_steps)


def ssl_training_policy(epoch: int, config: TrainConfig) -> Tuple[bool, float]:
    """
    Política por época do classificador SSL.

    O encoder fica congelado até ssl_freeze_epochs; a escala do LR sobe linearmente
    até 1 em ssl_warmup_epochs e depois decai como gamma^(época - warmup).

    Returns:
        Tuple[bool, float]: (encoder congelado, escala do LR)

    Raises:
        ValidationError: Se a agenda configurada não for ssl_exponential
    """
    if config.schedule_kind != "ssl_exponential":
        raise ValidationError("política SSL exige schedule_kind=ssl_exponential", "schedule_kind")
    if epoch < 1:
        raise ValidationError("época deve ser >= 1", "epoch")
    frozen = epoch <= config.ssl_freeze_epochs
    warmup = config.ssl_warmup_epochs
    if epoch <= warmup:
        scale = epoch / warmup
    else:
        scale = config.ssl_decay_gamma ** (epoch - warmup)
    return frozen, scale


# =============================================================================
# TRAINING LOOP
# =============================================================================

def dataset_labels(dataset: Dataset) -> List[int]:
    if hasattr(dataset, "labels"):
        return list(dataset.labels)
    if isinstance(dataset, TensorDataset):
        return [int(y) for y in dataset.tensors[1]]
    return [int(dataset[i][1]) for i in range(len(dataset))]


@torch.no_grad()
def score_loader(model: nn.Module, loader: DataLoader) -> Tuple[List[float], List[int]]:
    """Scores log p(bona fide) - log p(spoof) e rótulos de um DataLoader."""
    model.eval()
    scores, targets = [], []
    for batch in loader:
        inputs, labels = batch[0], batch[1]
        log_probs = model(inputs)
        margin = log_probs[:, CLASS_INDEX[Label.BONA_FIDE]] - log_probs[:, CLASS_INDEX[Label.SPOOF]]
        scores.extend(margin.double().tolist())
        targets.extend(int(y) for y in labels)
    return scores, targets


def validation_eer(model: nn.Module, loader: DataLoader) -> float:
    scores, targets = score_loader(model, loader)
    bona = [s for s, t in zip(scores, targets) if t == CLASS_INDEX[Label.BONA_FIDE]]
    spoof = [s for s, t in zip(scores, targets) if t == CLASS_INDEX[Label.SPOOF]]
    return compute_eer_arrays(bona, spoof)[0]


def _set_epoch(dataset: Dataset, epoch: int) -> None:
    if hasattr(dataset, "set_epoch"):
        dataset.set_epoch(epoch)


def train(
    model: nn.Module,
    train_data: Dataset,
    valid_data: Dataset,
    config: TrainConfig,
    valid_metric_fn: Optional[ValidMetricFn] = None,
    config_hash: Optional[str] = None,
) -> Tuple[Dict, TrainHistory]:
    """
    Treina o classificador e devolve o checkpoint da melhor época.

    Adam com weight decay, NLL sobre duas classes, agenda por atualização do otimizador.
    Ao fim de cada época mede o EER de validação; para após patience_epochs épocas
    sem melhora maior que improvement_epsilon, em max_epochs ou em max_steps.

    Args:
        model: Classificador (log-probabilidades [batch, 2])
        train_data: Dataset de treino com pares (entrada, classe)
        valid_data: Dataset de validação
        config: Receita de treino
        valid_metric_fn: Substitui o EER de validação (recebe modelo e época)
        config_hash: Hash da configuração gravado no checkpoint

    Returns:
        Tuple[Dict, TrainHistory]: (payload do checkpoint, histórico)

    Raises:
        BusinessRuleError: Treino vazio ou com uma só classe
        ValidationError: Validação com uma só classe (sem valid_metric_fn)
        TrainingDivergedError: Loss não finita
    """
    if len(train_data) == 0 or len(valid_data) == 0:
        raise BusinessRuleError("manifestos de treino e validação não podem ser vazios")
    if len(set(dataset_labels(train_data))) < 2:
        raise BusinessRuleError("o treino exige registros bona fide e spoof")
    if valid_metric_fn is None and len(set(dataset_labels(valid_data))) < 2:
        raise ValidationError("o EER de validação exige registros bona fide e spoof", "valid")

    previous_determinism = torch.are_deterministic_algorithms_enabled()
    if config.deterministic:
        torch.use_deterministic_algorithms(True)
    try:
        return _train(model, train_data, valid_data, config, valid_metric_fn, config_hash)
    finally:
        torch.use_deterministic_algorithms(previous_determinism)


def _train(model, train_data, valid_data, config, valid_metric_fn, config_hash):
    generator = torch.Generator().manual_seed(config.seed)
    workers = 0 if config.deterministic else config.num_workers
    train_loader = DataLoader(
        train_data, batch_size=config.batch_size, shuffle=True, generator=generator, num_workers=workers
    )
    valid_loader = DataLoader(valid_data, batch_size=config.batch_size, shuffle=False, num_workers=workers)

    optimizer = torch.optim.Adam(model.parameters(), lr=config.base_lr, weight_decay=config.weight_decay)
    ssl_schedule = config.schedule_kind == "ssl_exponential"
    scheduler = None
    if not ssl_schedule:
        scheduler = LambdaLR(optimizer, lambda s: lr_factor(s + 1, config.warmup_steps))
    criterion = nn.NLLLoss()

    history = TrainHistory(settings={
        "base_lr": config.base_lr,
        "batch_size": config.batch_size,
        "warmup_steps": config.warmup_steps,
        "weight_decay": config.weight_decay,
        "patience_epochs": config.patience_epochs,
        "schedule_kind": config.schedule_kind,
        "seed": config.seed,
    })
    best_state = copy.deepcopy(model.state_dict())
    since_best = 0
    step = 0

    for epoch in range(1, config.max_epochs + 1):
        frozen = None
        if ssl_schedule:
            frozen, scale = ssl_training_policy(epoch, config)
            if hasattr(model, "set_encoder_frozen"):
                model.set_encoder_frozen(frozen)
            for group in optimizer.param_groups:
                group["lr"] = config.base_lr * scale

        _set_epoch(train_data, epoch)
        model.train()
        total_loss, batches = 0.0, 0
        lr = optimizer.param_groups[0]["lr"]
        for batch in tqdm(train_loader, desc=f"epoch {epoch}", leave=False, disable=None):
            inputs, targets = batch[0], batch[1]
            lr = optimizer.param_groups[0]["lr"]
            optimizer.zero_grad()
            loss = criterion(model(inputs), targets.long())
            if not torch.isfinite(loss):
                raise TrainingDivergedError(epoch, step + 1)
            loss.backward()
            optimizer.step()
            if scheduler is not None:
                scheduler.step()
            step += 1
            total_loss += float(loss)
            batches += 1
            if config.max_steps is not None and step >= config.max_steps:
                break

        metric = valid_metric_fn(model, epoch) if valid_metric_fn else validation_eer(model, valid_loader)
        record = EpochRecord(epoch, total_loss / max(batches, 1), float(metric), lr, step, frozen)
        history.epochs.append(record)
        logger.info(
            "epoch=%d train_loss=%.6f valid_eer=%.6f lr=%.3e steps=%d", epoch, record.train_loss, metric, lr, step
        )

        if history.best_metric is None or metric < history.best_metric - config.improvement_epsilon:
            history.best_metric = float(metric)
            history.best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            since_best = 0
        else:
            since_best += 1

        if since_best >= config.patience_epochs:
            history.stop_reason = "patience"
            break
        if config.max_steps is not None and step >= config.max_steps:
            history.stop_reason = "max_steps"
            break
    else:
        history.stop_reason = "max_epochs"

    model.load_state_dict(best_state)
    model.eval()
    logger.info(
        "training finished best_epoch=%s best_eer=%.6f stop_reason=%s",
        history.best_epoch, history.best_metric, history.stop_reason,
    )
    payload = checkpoint_payload(model, config.model_dump(mode="json"), history.to_dict(), config_hash)
    return payload, history


class TrainerService:
    """
    Treino a partir de manifestos: monta frontend, augmentations, datasets e modelo.

    Attributes:
        run_config: Configuração completa da execução
    """

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config

    def datasets(self, train_manifest: Manifest, valid_manifest: Manifest) -> Tuple[ManifestDataset, ManifestDataset]:
        config = self.run_config
        frontend = FrontendService(config.frontend)
        waveform_input = uses_waveform_input(config.model)
        augment = AugmentService(config.augment, config.trainer.seed) if config.augment.enabled else None
        train_data = ManifestDataset(train_manifest, frontend, waveform_input, True, augment, config.trainer.seed)
        valid_data = ManifestDataset(valid_manifest, frontend, waveform_input, False, None, config.trainer.seed)
        return train_data, valid_data

    def train_from_manifests(
        self, train_manifest: Manifest, valid_manifest: Manifest, out_dir: Path
    ) -> Tuple[Path, TrainHistory]:
        """
        Treina e grava checkpoint.pt e history.json em out_dir.

        Raises:
            BusinessRuleError: Treino com uma só classe
            ValidationError: Validação com uma só classe
        """
        counts = train_manifest.label_counts()
        if any(n == 0 for n in counts.values()):
            raise BusinessRuleError(
                f"manifesto de treino '{train_manifest.name}' sem as duas classes "
                f"(bona_fide={counts[Label.BONA_FIDE]}, spoof={counts[Label.SPOOF]})"
            )
        valid_counts = valid_manifest.label_counts()
        if any(n == 0 for n in valid_counts.values()):
            raise ValidationError(
                f"manifesto de validação '{valid_manifest.name}' sem as duas classes "
                f"(bona_fide={valid_counts[Label.BONA_FIDE]}, spoof={valid_counts[Label.SPOOF]})",
                "valid",
            )
        model = build_model(self.run_config.model, self.run_config.trainer.seed)
        train_data, valid_data = self.datasets(train_manifest, valid_manifest)
        payload, history = train(
            model, train_data, valid_data, self.run_config.trainer, config_hash=self.run_config.config_hash
        )

        out_dir = Path(out_dir)
        checkpoint_path = out_dir / "checkpoint.pt"
        save_checkpoint(checkpoint_path, payload)
        try:
            (out_dir / "history.json").write_text(
                json.dumps(history.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError as e:
            raise StorageError(str(out_dir / "history.json"), e.strerror or str(e)) from e
        return checkpoint_path, history
