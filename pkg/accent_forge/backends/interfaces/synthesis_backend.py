from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import FrozenSet, Optional

from accent_forge.api.exceptions import EngineUnknownError, TextTooLongError, ValidationError
from accent_forge.business_model.audio import Waveform


@dataclass(frozen=True)
class BackendCapabilities:
    engine_ids: Optional[FrozenSet[str]]  # None = qualquer engine
    max_text_length: int
    rate_limit_rps: Optional[float] = None


class SynthesisBackend(ABC):
    name = "synthesis"

    @property
    @abstractmethod
    def capabilities(self) -> BackendCapabilities:
        pass

    @abstractmethod
    def synthesize(self, engine_id: str, text: str) -> Waveform:
        pass

    def check_request(self, engine_id: str, text: str) -> None:
        if not text or not text.strip():
            raise ValidationError("texto vazio", "text")
        caps = self.capabilities
        if len(text) > caps.max_text_length:
            raise TextTooLongError(len(text), caps.max_text_length)
        if caps.engine_ids is not None and engine_id not in caps.engine_ids:
            raise EngineUnknownError(engine_id)


class VoiceConversionBackend(ABC):
    name = "conversion"

    @abstractmethod
    def convert(self, source: Waveform, source_id: str, target: Waveform, target_id: str) -> Waveform:
        pass
