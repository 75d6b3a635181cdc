"""
Classificador com encoder auto-supervisionado + LSTM.

O encoder é qualquer módulo que recebe formas de onda [batch, amostras] e devolve
embeddings por frame [batch, frames, embedding_dim]. Encoders pré-treinados entram
por essa interface; o StubFrameEncoder cobre testes e execuções de bancada.
"""

from typing import Protocol, runtime_checkable

import torch
import torch.nn as nn
import torch.nn.functional as F

from accent_forge.api.exceptions import ShapeMismatchError, ValidationError


@runtime_checkable
class FrameEncoder(Protocol):
    embedding_dim: int

    def __call__(self, waveform: torch.Tensor) -> torch.Tensor:
        ...


class StubFrameEncoder(nn.Module):
    """Enquadramento por convolução com passo de um frame, seguido de GELU."""

    def __init__(self, embedding_dim: int = 64, frame_samples: int = 320):
        super().__init__()
        self.embedding_dim = embedding_dim
        self.frame_samples = frame_samples
        self.proj = nn.Conv1d(1, embedding_dim, kernel_size=frame_samples, stride=frame_samples)

    def forward(self, waveform: torch.Tensor) -> torch.Tensor:
        if waveform.shape[-1] < self.frame_samples:
            raise ShapeMismatchError(f">= {self.frame_samples} amostras", str(list(waveform.shape)))
        return F.gelu(self.proj(waveform.unsqueeze(1))).transpose(1, 2)


class SSLRecurrentClassifier(nn.Module):
    """
    Encoder -> LSTM -> média temporal -> FC -> log_softmax.

    Attributes:
        encoder: Encoder de frames
        encoder_frozen: Se os parâmetros do encoder estão congelados
    """

    def __init__(self, encoder: nn.Module, recurrent_hidden: int = 192, num_classes: int = 2):
        super().__init__()
        if not isinstance(encoder, FrameEncoder):
            raise ValidationError("encoder precisa declarar embedding_dim", "encoder")
        self.encoder = encoder
        self.embedding_dim = encoder.embedding_dim
        self.recurrent_hidden = recurrent_hidden
        self.lstm = nn.LSTM(self.embedding_dim, recurrent_hidden, batch_first=True)
        self.fc = nn.Linear(recurrent_hidden, num_classes)
        self.encoder_frozen = False

    def set_encoder_frozen(self, frozen: bool) -> None:
        self.encoder_frozen = frozen
        for p in self.encoder.parameters():
            p.requires_grad_(not frozen)
        self.encoder.train(self.training and not frozen)

    def train(self, mode: bool = True):
        super().train(mode)
        if self.encoder_frozen:
            self.encoder.eval()
        return self

    def forward(self, waveform: torch.Tensor) -> torch.Tensor:
        if waveform.dim() == 3 and waveform.shape[1] == 1:
            waveform = waveform.squeeze(1)
        if waveform.dim() != 2:
            raise ShapeMismatchError("[batch, amostras]", str(list(waveform.shape)))
        frames = self.encoder(waveform)
        if frames.dim() != 3 or frames.shape[-1] != self.embedding_dim:
            raise ShapeMismatchError(f"[batch, frames, {self.embedding_dim}]", str(list(frames.shape)))
        out, _ = self.lstm(frames)
        return F.log_softmax(self.fc(out.mean(dim=1)), dim=-1)


def build_ssl_head(encoder: nn.Module, recurrent_hidden: int = 192) -> SSLRecurrentClassifier:
    """Monta o classificador SSL sobre um encoder existente."""
    return SSLRecurrentClassifier(encoder, recurrent_hidden)
