"""
Data Transfer Objects (DTOs) e configurações do accent-forge.
Utiliza Pydantic para validação automática dos arquivos de entrada
(linhas de manifesto, registros de engines e arquivo de configuração da execução).
"""

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from accent_forge.api.exceptions import NotFoundError, ValidationError

M = TypeVar("M", bound=BaseModel)


class StrictModel(BaseModel):
    """Base das DTOs: chaves desconhecidas são rejeitadas."""

    model_config = ConfigDict(extra="forbid")


def parse_dto(model: Type[M], data) -> M:
    """
    Valida um dicionário contra uma DTO, convertendo o erro do Pydantic.

    Args:
        model: Classe da DTO
        data: Dados brutos

    Returns:
        Instância validada

    Raises:
        ValidationError: Com o primeiro campo inválido
    """
    try:
        return model.model_validate(data)
    except PydanticValidationError as e:
        errors = e.errors()
        if errors:
            loc = ".".join(str(part) for part in errors[0]["loc"]) or None
            raise ValidationError(errors[0]["msg"], loc) from e
        raise ValidationError("Dados inválidos") from e


# =============================================================================
# MANIFEST DTOs
# =============================================================================

class UtteranceRecordDTO(StrictModel):
    """DTO para uma linha do arquivo de manifesto."""
    utt_id: str
    audio_path: str
    label: Literal["bona_fide", "spoof"]
    language: str
    accent: Optional[str] = None
    source: str
    portion: Literal["I", "II", "III", "test"]
    duration_sec: Optional[float] = None
    speaker_id: Optional[str] = None
    origin_id: Optional[str] = None
    target_id: Optional[str] = None

    @field_validator("utt_id", "audio_path", "source")
    @classmethod
    def not_empty(cls, v):
        if not v or not v.strip():
            raise ValueError("não pode ser vazio")
        return v

    @field_validator("language")
    @classmethod
    def language_lowercase(cls, v):
        if not v or v != v.strip().lower():
            raise ValueError("código de idioma deve estar em minúsculas")
        return v

    @field_validator("duration_sec")
    @classmethod
    def duration_non_negative(cls, v):
        if v is not None and v < 0:
            raise ValueError("duração não pode ser negativa")
        return v

    @model_validator(mode="after")
    def portion_two_is_spoof(self):
        if self.portion == "II" and self.label != "spoof":
            raise ValueError("registros da porção II são sempre spoof")
        return self


# =============================================================================
# ENGINE DTOs
# =============================================================================

class TTSEngineSpecDTO(StrictModel):
    """DTO para uma engine no arquivo de registro."""
    engine_id: str
    language_code: str
    accent_tag: str = ""
    output_sample_rate: int = 24000

    @field_validator("engine_id", "language_code")
    @classmethod
    def not_empty(cls, v):
        if not v or not v.strip():
            raise ValueError("não pode ser vazio")
        return v.strip()

    @field_validator("output_sample_rate")
    @classmethod
    def rate_positive(cls, v):
        if v <= 0:
            raise ValueError("taxa de amostragem deve ser positiva")
        return v


class EngineRegistryDTO(StrictModel):
    """DTO para o arquivo de registro de engines."""
    name: str
    engines: List[TTSEngineSpecDTO]


# =============================================================================
# RUN CONFIGURATION
# =============================================================================

def _check_range(v: Tuple[float, float], name: str) -> Tuple[float, float]:
    low, high = v
    if low > high:
        raise ValueError(f"{name}: limite inferior maior que o superior")
    return v


class AugmentConfig(StrictModel):
    """Política de augmentations aplicada durante o treino."""
    noise_snr_db_range: Tuple[float, float] = (10.0, 40.0)
    pitch_semitone_range: Tuple[float, float] = (-2.0, 2.0)
    stretch_rate_range: Tuple[float, float] = (0.9, 1.1)
    apply_prob: float = 0.5
    enabled: bool = True
    n_fft: int = 1024
    hop_length: int = 256

    @field_validator("noise_snr_db_range")
    @classmethod
    def snr_valid(cls, v):
        return _check_range(v, "noise_snr_db_range")

    @field_validator("pitch_semitone_range")
    @classmethod
    def pitch_valid(cls, v):
        _check_range(v, "pitch_semitone_range")
        if abs(v[0]) > 12 or abs(v[1]) > 12:
            raise ValueError("deslocamento de pitch limitado a ±12 semitons")
        return v

    @field_validator("stretch_rate_range")
    @classmethod
    def stretch_valid(cls, v):
        _check_range(v, "stretch_rate_range")
        if v[0] <= 0.25 or v[1] >= 4:
            raise ValueError("taxa de stretch deve estar em (0.25, 4)")
        return v

    @field_validator("apply_prob")
    @classmethod
    def prob_valid(cls, v):
        if v < 0 or v > 1:
            raise ValueError("probabilidade deve estar em [0, 1]")
        return v


class FrontendConfig(StrictModel):
    """Carregamento de áudio, duração fixa e extração de features."""
    sample_rate: int = 16000
    window: int = 400
    hop: int = 160
    n_bins: int = 60
    duration_sec: float = 4.0
    log_floor: float = 1e-10
    train_crop: Literal["crop_random", "crop_center", "tile"] = "crop_random"
    eval_crop: Literal["crop_random", "crop_center", "tile"] = "crop_center"
    cache_dir: Optional[str] = None

    @field_validator("sample_rate", "window", "hop", "n_bins")
    @classmethod
    def positive(cls, v):
        if v <= 0:
            raise ValueError("deve ser positivo")
        return v

    @field_validator("duration_sec", "log_floor")
    @classmethod
    def positive_real(cls, v):
        if v <= 0:
            raise ValueError("deve ser positivo")
        return v


Variant = Literal["senet", "se_res2net", "scg_res2net", "mlcg_res2net", "gemini_res2net", "ssl_recurrent"]


class ModelConfig(StrictModel):
    """Arquitetura do classificador anti-spoofing."""
    variant: Variant = "se_res2net"
    width: List[int] = Field(default_factory=lambda: [16, 32])
    depth: List[int] = Field(default_factory=lambda: [1, 1])
    res2net_scale: int = 4
    se_reduction: int = 4
    gemini_time_freq_ratio: List[Tuple[int, int]] = Field(default_factory=lambda: [(2, 1), (2, 1)])
    recurrent_hidden: int = 192
    num_classes: Literal[2] = 2
    input_bins: int = 60
    ssl_encoder_dim: int = 64
    ssl_frame_samples: int = 320

    @field_validator("width", "depth", mode="before")
    @classmethod
    def scalar_to_list(cls, v):
        if isinstance(v, int):
            return [v]
        return v

    @field_validator("res2net_scale")
    @classmethod
    def scale_valid(cls, v):
        if v < 2:
            raise ValueError("res2net_scale deve ser >= 2")
        return v

    @model_validator(mode="after")
    def stages_consistent(self):
        if not self.width or len(self.width) != len(self.depth):
            raise ValueError("width e depth devem ter o mesmo número de estágios")
        if any(w <= 0 for w in self.width) or any(d <= 0 for d in self.depth):
            raise ValueError("width e depth devem ser positivos")
        if "res2net" in self.variant:
            for w in self.width:
                if w % self.res2net_scale != 0:
                    raise ValueError(f"res2net_scale={self.res2net_scale} não divide width={w}")
        if self.variant == "gemini_res2net" and len(self.gemini_time_freq_ratio) != len(self.width):
            raise ValueError("gemini_time_freq_ratio precisa de um par (freq, tempo) por estágio")
        return self


class TrainConfig(StrictModel):
    """Receita de treino: otimizador, agenda de LR e paciência."""
    base_lr: float = 3e-4
    warmup_steps: int = 1000
    weight_decay: float = 1e-4
    patience_epochs: int = 12
    batch_size: int = 32
    max_epochs: int = 100
    max_steps: Optional[int] = None
    seed: int = 0
    deterministic: bool = False
    num_workers: int = 0
    schedule_kind: Literal["inverse_sqrt", "ssl_exponential"] = "inverse_sqrt"
    ssl_freeze_epochs: int = 10
    ssl_warmup_epochs: int = 5
    ssl_decay_gamma: float = 0.9
    improvement_epsilon: float = 1e-6

    @field_validator("warmup_steps", "patience_epochs", "batch_size", "max_epochs", "ssl_warmup_epochs")
    @classmethod
    def at_least_one(cls, v):
        if v < 1:
            raise ValueError("deve ser >= 1")
        return v

    @field_validator("base_lr")
    @classmethod
    def lr_positive(cls, v):
        if v <= 0:
            raise ValueError("base_lr deve ser positivo")
        return v

    @field_validator("ssl_decay_gamma")
    @classmethod
    def gamma_valid(cls, v):
        if v <= 0 or v > 1:
            raise ValueError("ssl_decay_gamma deve estar em (0, 1]")
        return v


class EvalConfig(StrictModel):
    """Pontuação e relatórios."""
    batch_size: int = 64
    max_missing_fraction: float = 0.01
    group_by: List[Literal["language", "source", "portion", "label"]] = Field(default_factory=lambda: ["language"])


class PathsConfig(StrictModel):
    work_dir: str = "runs"
    provenance_dir: Optional[str] = None


class RunConfig(StrictModel):
    """Documento único de configuração da execução."""
    frontend: FrontendConfig = Field(default_factory=FrontendConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    trainer: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    @classmethod
    def load(cls, path: Optional[Path]) -> "RunConfig":
        """
        Lê o arquivo de configuração (JSON). Sem arquivo, usa os valores padrão.

        Raises:
            NotFoundError: Se o arquivo não existir
            ValidationError: Se houver chaves desconhecidas ou valores inválidos
        """
        if path is None:
            return cls()
        path = Path(path)
        if not path.exists():
            raise NotFoundError("Arquivo de configuração", str(path))
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError(f"JSON inválido: {e.msg} (linha {e.lineno})") from e
        return parse_dto(cls, data)
