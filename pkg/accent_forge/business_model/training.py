from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    valid_eer: float
    lr: float
    steps: int
    encoder_frozen: Optional[bool] = None


@dataclass
class TrainHistory:
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_metric: Optional[float] = None
    stop_reason: Optional[str] = None
    settings: Dict = field(default_factory=dict)

    @property
    def validations(self) -> int:
        return len(self.epochs)

    def to_dict(self) -> Dict:
        return {
            "epochs": [asdict(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_metric": self.best_metric,
            "stop_reason": self.stop_reason,
            "settings": dict(self.settings),
        }

    @classmethod
    def from_dict(cls, data: Dict):
        data = data.copy()
        data["epochs"] = [EpochRecord(**e) for e in data.get("epochs", [])]
        return cls(**data)
