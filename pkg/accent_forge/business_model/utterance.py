from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional


class Label(str, Enum):
    BONA_FIDE = "bona_fide"
    SPOOF = "spoof"


class Portion(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    TEST = "test"


# ordem dos campos no disco; opcionais vazios são omitidos
FIELD_ORDER = (
    "utt_id", "audio_path", "label", "language", "accent", "source", "portion",
    "duration_sec", "speaker_id", "origin_id", "target_id",
)


@dataclass(frozen=True)
class UtteranceRecord:
    utt_id: str
    audio_path: str
    label: Label
    language: str
    source: str
    portion: Portion
    accent: Optional[str] = None
    duration_sec: Optional[float] = None
    speaker_id: Optional[str] = None
    origin_id: Optional[str] = None
    target_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "label", Label(self.label))
        object.__setattr__(self, "portion", Portion(self.portion))
        if self.portion == Portion.II and self.label != Label.SPOOF:
            raise ValueError(f"{self.utt_id}: registros da porção II são sempre spoof")

    @property
    def is_bona_fide(self) -> bool:
        return self.label == Label.BONA_FIDE

    def replace(self, **changes) -> "UtteranceRecord":
        data = self.to_dict()
        data.update(changes)
        return UtteranceRecord.from_dict(data)

    def to_dict(self) -> Dict:
        data = {
            "utt_id": self.utt_id,
            "audio_path": self.audio_path,
            "label": self.label.value,
            "language": self.language,
            "accent": self.accent,
            "source": self.source,
            "portion": self.portion.value,
            "duration_sec": self.duration_sec,
            "speaker_id": self.speaker_id,
            "origin_id": self.origin_id,
            "target_id": self.target_id,
        }
        return {k: data[k] for k in FIELD_ORDER if data[k] is not None}

    @classmethod
    def from_dict(cls, data: Dict):
        data = data.copy()
        return cls(**data)
