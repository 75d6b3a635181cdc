"""
Gates de canal: SE, SCG e MLCG.

Todo gate multiplica as features por um vetor sigmoide por canal, então a saída
tem o mesmo formato da entrada e nenhum canal cresce em norma.
"""

from typing import Optional

import torch
import torch.nn as nn

from accent_forge.api.exceptions import ValidationError

GATE_KINDS = ("se", "scg", "mlcg")

SATURATION_BIAS = 1e4


def global_average(x: torch.Tensor) -> torch.Tensor:
    return x.mean(dim=(2, 3))


class ChannelGate(nn.Module):
    """Base: subclasses calculam o descritor e a projeção para um logit por canal."""

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels

    def logits(self, features: torch.Tensor, context: Optional[torch.Tensor]) -> torch.Tensor:
        raise NotImplementedError

    def output_layer(self) -> nn.Linear:
        raise NotImplementedError

    def multiplier(self, features: torch.Tensor, context: Optional[torch.Tensor] = None) -> torch.Tensor:
        return torch.sigmoid(self.logits(features, context))[:, :, None, None]

    def forward(self, features: torch.Tensor, context: Optional[torch.Tensor] = None) -> torch.Tensor:
        return features * self.multiplier(features, context)

    @torch.no_grad()
    def saturate(self) -> None:
        """Força o multiplicador a 1 (pesos de saída zerados, bias saturado)."""
        layer = self.output_layer()
        layer.weight.zero_()
        layer.bias.fill_(SATURATION_BIAS)


class SEGate(ChannelGate):
    """Squeeze-and-excitation sobre a saída do bloco."""

    def __init__(self, channels: int, reduction: int = 4):
        super().__init__(channels)
        hidden = max(1, channels // reduction)
        self.fc1 = nn.Linear(channels, hidden)
        self.fc2 = nn.Linear(hidden, channels)

    def logits(self, features, context=None):
        return self.fc2(torch.relu(self.fc1(global_average(features))))

    def output_layer(self):
        return self.fc2


class SCGate(ChannelGate):
    """Gate de canal simples sobre a saída do ramo anterior: sigmoid(FC(GAP(y)))."""

    def __init__(self, channels: int):
        super().__init__(channels)
        self.fc = nn.Linear(channels, channels)

    def logits(self, features, context=None):
        return self.fc(global_average(features))

    def output_layer(self):
        return self.fc


class MLCGate(ChannelGate):
    """
    Gate multi-camada que vê o ramo anterior e a entrada atual:
    sigmoid(FC2(relu(FC1(GAP([y, x]))))).
    """

    def __init__(self, channels: int, reduction: int = 4):
        super().__init__(channels)
        hidden = max(1, (2 * channels) // reduction)
        self.fc1 = nn.Linear(2 * channels, hidden)
        self.fc2 = nn.Linear(hidden, channels)

    def logits(self, features, context=None):
        if context is None:
            context = features
        descriptor = torch.cat([global_average(features), global_average(context)], dim=1)
        return self.fc2(torch.relu(self.fc1(descriptor)))

    def output_layer(self):
        return self.fc2


def make_gate(gate_kind: str, channels: int, reduction: int = 4) -> ChannelGate:
    if gate_kind == "se":
        return SEGate(channels, reduction)
    if gate_kind == "scg":
        return SCGate(channels)
    if gate_kind == "mlcg":
        return MLCGate(channels, reduction)
    raise ValidationError(f"gate '{gate_kind}' desconhecido (use {', '.join(GATE_KINDS)})", "gate_kind")


def gate_channels(
    features: torch.Tensor,
    gate_kind: str,
    context: Optional[torch.Tensor] = None,
    gate: Optional[ChannelGate] = None,
) -> torch.Tensor:
    """
    Aplica um gate de canal às features de um bloco [B, C, F, T].

    Args:
        features: Features do bloco
        gate_kind: se, scg ou mlcg
        context: Entrada do ramo atual (usada pelo MLCG)
        gate: Módulo já construído; se None, um gate novo é criado

    Returns:
        torch.Tensor: Features com o mesmo formato da entrada
    """
    if gate is None:
        gate = make_gate(gate_kind, features.shape[1]).to(features.dtype)
    return gate(features, context)
