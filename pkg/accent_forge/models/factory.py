"""
Construção determinística de classificadores a partir de ModelConfig.
"""

import hashlib
import logging
from typing import Dict, Union

import torch
import torch.nn as nn

from accent_forge.api.dto import ModelConfig, parse_dto
from accent_forge.models.res2net import AntiSpoofingCNN
from accent_forge.models.ssl_head import StubFrameEncoder, build_ssl_head

logger = logging.getLogger(__name__)

# Configurações em escala completa (SENet34, Res2Net50 e SSL com LSTM)
FULL_SCALE_PRESETS: Dict[str, Dict] = {
    "senet34": {"variant": "senet", "width": [16, 32, 64, 128], "depth": [3, 4, 6, 3], "se_reduction": 8},
    "se_res2net50": {"variant": "se_res2net", "width": [16, 32, 64, 128], "depth": [3, 4, 6, 3], "res2net_scale": 4, "se_reduction": 8},
    "scg_res2net50": {"variant": "scg_res2net", "width": [16, 32, 64, 128], "depth": [3, 4, 6, 3], "res2net_scale": 4},
    "mlcg_res2net50": {"variant": "mlcg_res2net", "width": [16, 32, 64, 128], "depth": [3, 4, 6, 3], "res2net_scale": 4},
    "ssl_lstm": {"variant": "ssl_recurrent", "ssl_encoder_dim": 1024, "recurrent_hidden": 192},
}

WAVEFORM_VARIANTS = ("ssl_recurrent",)


def uses_waveform_input(config: ModelConfig) -> bool:
    return config.variant in WAVEFORM_VARIANTS


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def parameter_checksum(model: nn.Module) -> str:
    """SHA-256 dos tensores do state_dict em ordem de nome."""
    digest = hashlib.sha256()
    for name, tensor in sorted(model.state_dict().items()):
        digest.update(name.encode("utf-8"))
        digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


def build_model(config: Union[ModelConfig, Dict], seed: int) -> nn.Module:
    """
    Constrói o classificador com inicialização determinística.

    Args:
        config: ModelConfig ou dicionário equivalente
        seed: Seed da inicialização

    Returns:
        nn.Module: Classificador com atributos `config` e `parameter_count`

    Raises:
        ValidationError: Configuração inválida (ex: scale não divide width)
    """
    if not isinstance(config, ModelConfig):
        config = parse_dto(ModelConfig, config)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        if config.variant == "ssl_recurrent":
            encoder = StubFrameEncoder(config.ssl_encoder_dim, config.ssl_frame_samples)
            model = build_ssl_head(encoder, config.recurrent_hidden)
        else:
            model = AntiSpoofingCNN(config)

    model.config = config
    model.parameter_count = parameter_count(model)
    logger.info("model built variant=%s parameters=%d seed=%d", config.variant, model.parameter_count, seed)
    return model
