from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class MismatchRow:
    """EERs publicados de um modelo testado só em inglês e com idioma misto."""
    model: str
    eer_english: float
    eer_mixed: float
    relative_increase: float
    params_m: Optional[float] = None

    @classmethod
    def from_dict(cls, data: Dict):
        return cls(**data)


@dataclass(frozen=True)
class ExpansionSystem:
    system: int
    model: str
    portion: str
    samples: int
    augmented: bool
    eers: Tuple[float, ...]

    @classmethod
    def from_dict(cls, data: Dict):
        data = dict(data)
        data["eers"] = tuple(data["eers"])
        return cls(**data)


@dataclass(frozen=True)
class Comparison:
    """Sistema tratado contra o seu benchmark, com a variação relativa publicada."""
    system: int
    benchmark: int
    relative_change: float

    @classmethod
    def from_dict(cls, data: Dict):
        return cls(**data)


@dataclass(frozen=True)
class SingleSetComparison:
    system: int
    benchmark: int
    eer_benchmark: float
    eer_treated: float
    relative_change: float

    @classmethod
    def from_dict(cls, data: Dict):
        return cls(**data)


@dataclass(frozen=True)
class KnownDeviation:
    """Valor publicado que o recálculo não atinge, com o valor recalculado registrado."""
    entry: str
    recomputed: float
    note: str = ""

    @classmethod
    def from_dict(cls, data: Dict):
        return cls(**data)


@dataclass
class ReferenceValues:
    mismatch_rows: List[MismatchRow]
    average_relative_increase: float
    test_sets: List[str]
    systems: Dict[int, ExpansionSystem]
    comparisons: List[Comparison]
    singing_test_set: str
    singing: List[SingleSetComparison]
    known_deviations: Dict[str, KnownDeviation] = field(default_factory=dict)
