from typing import Dict, Iterable, Optional

import numpy as np

from accent_forge.backends.interfaces.synthesis_backend import BackendCapabilities, SynthesisBackend
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.tts_engine import TTSEngineSpec
from accent_forge.services.randomness import stable_hash

DEFAULT_RATE = 24000
N_COMPONENTS = 4


def hashed_tone(sample_rate: int, n_samples: int, *key) -> np.ndarray:
    """Soma de senoides com frequências e fases derivadas do hash da chave; pico <= 0.8."""
    digest = stable_hash(*key)
    t = np.arange(n_samples, dtype=np.float64) / sample_rate
    signal = np.zeros(n_samples, dtype=np.float64)
    for k in range(N_COMPONENTS):
        frequency = 80.0 + int.from_bytes(digest[2 * k:2 * k + 2], "big") % 2000
        phase = 2 * np.pi * digest[8 + k] / 256.0
        signal += 0.2 * np.sin(2 * np.pi * frequency * t + phase)
    return signal


class MockSynthesisBackend(SynthesisBackend):
    """
    Backend determinístico: a forma de onda é função pura de (engine_id, texto),
    com duração fixa e sem acesso à rede.
    """

    name = "mock"

    def __init__(
        self,
        engines: Optional[Iterable[TTSEngineSpec]] = None,
        duration_sec: float = 1.0,
        max_text_length: int = 5000,
    ):
        self._rates: Optional[Dict[str, int]] = None
        if engines is not None:
            self._rates = {e.engine_id: e.output_sample_rate for e in engines}
        self.duration_sec = duration_sec
        self.max_text_length = max_text_length

    @property
    def capabilities(self) -> BackendCapabilities:
        ids = None if self._rates is None else frozenset(self._rates)
        return BackendCapabilities(ids, self.max_text_length)

    def sample_rate_for(self, engine_id: str) -> int:
        if self._rates is None:
            return DEFAULT_RATE
        return self._rates[engine_id]

    def synthesize(self, engine_id: str, text: str) -> Waveform:
        self.check_request(engine_id, text)
        rate = self.sample_rate_for(engine_id)
        n_samples = int(round(self.duration_sec * rate))
        return Waveform(hashed_tone(rate, n_samples, "tts", engine_id, text).astype(np.float32), rate)
