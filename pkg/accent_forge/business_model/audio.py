from dataclasses import dataclass, field
from typing import Dict

import numpy as np


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("waveform deve ser mono e não vazio")
        if np.max(np.abs(samples)) > 1.0 + 1e-6:
            raise ValueError("amostras fora de [-1, 1]")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_sec(self) -> float:
        return self.samples.size / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # [frequency_bins, frames]
    frame_hop_sec: float
    bin_spec: Dict = field(default_factory=dict)

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]
