from dataclasses import dataclass
from typing import Dict

ENGLISH_ACCENTS = "english-accents"
OTHER_LANGUAGE = "other-language"


@dataclass(frozen=True)
class TTSEngineSpec:
    engine_id: str
    language_code: str
    accent_tag: str = ""
    output_sample_rate: int = 24000

    @property
    def group(self) -> str:
        if self.language_code.split("-")[0].lower() == "en":
            return ENGLISH_ACCENTS
        return OTHER_LANGUAGE

    @property
    def record_accent(self) -> str:
        # engines de outros idiomas não têm tag de sotaque: o idioma faz esse papel
        return self.accent_tag or self.language_code

    def to_dict(self) -> Dict:
        return {
            "engine_id": self.engine_id,
            "language_code": self.language_code,
            "accent_tag": self.accent_tag,
            "output_sample_rate": self.output_sample_rate,
        }

    @classmethod
    def from_dict(cls, data: Dict):
        return cls(**data)


@dataclass(frozen=True)
class Transcript:
    transcript_id: str
    text: str
    source: str

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError(f"{self.transcript_id}: transcrição vazia")

    def to_dict(self) -> Dict:
        return {"transcript_id": self.transcript_id, "text": self.text, "source": self.source}

    @classmethod
    def from_dict(cls, data: Dict):
        return cls(**data)
