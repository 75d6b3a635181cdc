import numpy as np

from accent_forge.backends.implementations.mock_synthesis_backend import hashed_tone
from accent_forge.backends.interfaces.synthesis_backend import VoiceConversionBackend
from accent_forge.business_model.audio import Waveform


class MockConversionBackend(VoiceConversionBackend):
    """
    Conversão determinística dado (origem, alvo): o áudio de origem é modulado
    por uma portadora derivada do par de ids e somado a um tom do alvo.
    """

    name = "mock-vc"

    def convert(self, source: Waveform, source_id: str, target: Waveform, target_id: str) -> Waveform:
        n = len(source)
        rate = source.sample_rate
        carrier = hashed_tone(rate, n, "vc-carrier", source_id, target_id) / 0.8
        timbre = hashed_tone(rate, n, "vc-target", target_id)
        converted = 0.6 * source.samples.astype(np.float64) * carrier + 0.3 * timbre / 0.8
        return Waveform(converted.astype(np.float32), rate)
