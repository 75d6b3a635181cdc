import math
from dataclasses import asdict, dataclass
from typing import Dict


@dataclass(frozen=True)
class AugmentPlan:
    utt_id: str
    epoch: int
    apply_noise: bool
    snr_db: float
    noise_key: int
    apply_pitch: bool
    semitones: float
    apply_stretch: bool
    rate: float

    @property
    def is_identity(self) -> bool:
        noise = self.apply_noise and math.isfinite(self.snr_db)
        pitch = self.apply_pitch and self.semitones != 0
        stretch = self.apply_stretch and self.rate != 1
        return not (noise or pitch or stretch)

    def to_dict(self) -> Dict:
        return asdict(self)
