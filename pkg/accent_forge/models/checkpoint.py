"""
Checkpoints autodescritivos: tag de formato, eco das configurações, pesos e histórico.
"""

import logging
import pickle
from pathlib import Path
from typing import Dict, Optional, Tuple

import torch
import torch.nn as nn

from accent_forge.api.exceptions import NotFoundError, StorageError, ValidationError
from accent_forge.models.factory import build_model

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "accent-forge-checkpoint/1"


def checkpoint_payload(
    model: nn.Module,
    train_config: Optional[Dict] = None,
    history: Optional[Dict] = None,
    config_hash: Optional[str] = None,
) -> Dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "model_config": model.config.model_dump(mode="json"),
        "train_config": train_config or {},
        "state_dict": {k: v.detach().cpu().clone() for k, v in model.state_dict().items()},
        "history": history or {},
        "config_hash": config_hash or "",
    }


def save_checkpoint(path: Path, payload: Dict) -> None:
    """
    Raises:
        StorageError: Se o destino não puder ser escrito
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, path)
    except OSError as e:
        raise StorageError(str(path), e.strerror or str(e)) from e
    logger.info("checkpoint saved path=%s", path)


def load_checkpoint(path: Path) -> Tuple[nn.Module, Dict]:
    """
    Carrega um checkpoint e reconstrói o modelo em modo de avaliação.

    Returns:
        Tuple[nn.Module, Dict]: (modelo, payload)

    Raises:
        NotFoundError: Arquivo inexistente
        ValidationError: Arquivo que não é um checkpoint deste formato
    """
    path = Path(path)
    if not path.exists():
        raise NotFoundError("Checkpoint", str(path))
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (RuntimeError, EOFError, pickle.UnpicklingError) as e:
        raise ValidationError(f"checkpoint ilegível: {e}", "checkpoint") from e
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise ValidationError(f"formato de checkpoint desconhecido em {path}", "checkpoint")

    model = build_model(payload["model_config"], seed=0)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload
