from pathlib import Path

import numpy as np
import soundfile as sf

from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.utterance import UtteranceRecord


def tone(frequency: float, sample_rate: int, seconds: float, amplitude: float = 0.5, phase: float = 0.0) -> np.ndarray:
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    return (amplitude * np.sin(2 * np.pi * frequency * t + phase)).astype(np.float32)


def write_wav(path: Path, samples: np.ndarray, sample_rate: int) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), samples, sample_rate, subtype="PCM_16")
    return path


def make_record(utt_id: str, label: str = "bona_fide", language: str = "en", portion: str = "I", **fields):
    fields.setdefault("source", "synthetic")
    return UtteranceRecord(
        utt_id=utt_id,
        audio_path=fields.pop("audio_path", f"audio/{utt_id}.wav"),
        label=label,
        language=language,
        portion=portion,
        **fields,
    )


def make_manifest(counts, name="m", portion="I", language="en", root=None):
    """Manifesto em memória com `counts` = {"bona_fide": n, "spoof": m}."""
    records = []
    for label, n in counts.items():
        records.extend(make_record(f"{label}-{i:07d}", label, language, portion) for i in range(n))
    return Manifest(records, name, root)
