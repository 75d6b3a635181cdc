import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from accent_forge.business_model.utterance import Label

POLARITY = "higher-is-bona-fide"

# posição de cada classe na saída dos classificadores
CLASS_INDEX = {Label.SPOOF: 0, Label.BONA_FIDE: 1}


@dataclass(frozen=True)
class ScoreRecord:
    utt_id: str
    score: float
    label: Optional[Label] = None

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"{self.utt_id}: score não finito")
        if self.label is not None:
            object.__setattr__(self, "label", Label(self.label))


@dataclass(frozen=True)
class GroupResult:
    group_by: str
    key: str
    n_bona_fide: int
    n_spoof: int
    eer: Optional[float] = None
    threshold: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.eer is not None

    def to_dict(self) -> Dict:
        return {
            "group_by": self.group_by,
            "key": self.key,
            "n_bona_fide": self.n_bona_fide,
            "n_spoof": self.n_spoof,
            "eer": self.eer,
            "threshold": self.threshold,
        }


@dataclass
class EvalReport:
    overall: GroupResult
    groups: List[GroupResult] = field(default_factory=list)
    relative_changes: List[Dict] = field(default_factory=list)
    metadata: Dict = field(default_factory=dict)

    def eer_by(self, group_by: str) -> Dict[str, Optional[float]]:
        return {g.key: g.eer for g in self.groups if g.group_by == group_by}

    def to_dict(self) -> Dict:
        return {
            "overall": self.overall.to_dict(),
            "groups": [g.to_dict() for g in self.groups],
            "relative_changes": list(self.relative_changes),
            "metadata": dict(self.metadata),
        }
