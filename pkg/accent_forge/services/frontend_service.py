"""
Serviço de frontend.
Contém o carregamento de áudio, a normalização de duração e a extração de
energias log de banco de filtros lineares.
"""

import hashlib
import logging
from functools import lru_cache
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import librosa
import numpy as np
import soundfile as sf
import torch
from torch.utils.data import Dataset

from accent_forge.api.dto import FrontendConfig
from accent_forge.api.exceptions import AudioDecodeError, ValidationError
from accent_forge.business_model.audio import FeatureMatrix, Waveform
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.score import CLASS_INDEX
from accent_forge.services.randomness import rng_for

logger = logging.getLogger(__name__)

CROP_MODES = ("crop_random", "crop_center", "tile")


def load_audio(path: Path, target_rate: Optional[int] = None) -> Waveform:
    """
    Lê um arquivo PCM e devolve forma de onda mono na taxa pedida (None mantém a nativa).

    Canais são promediados; o sinal só é normalizado se o pico passar de 1.

    Raises:
        AudioDecodeError: Arquivo inexistente, ilegível ou vazio
    """
    path = Path(path)
    try:
        data, rate = sf.read(str(path), dtype="float32", always_2d=True)
    except (RuntimeError, OSError) as e:
        raise AudioDecodeError(str(path), str(e)) from e
    if data.size == 0:
        raise AudioDecodeError(str(path), "arquivo sem amostras")

    samples = data.mean(axis=1)
    if target_rate is None:
        target_rate = rate
    elif rate != target_rate:
        samples = librosa.resample(samples, orig_sr=rate, target_sr=target_rate)
    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        samples = samples / peak
    return Waveform(samples.astype(np.float32), target_rate)


def fix_duration(
    wave: Waveform,
    target_sec: float,
    mode: str,
    rng: Optional[np.random.Generator] = None,
) -> Waveform:
    """
    Ajusta a forma de onda para exatamente round(target_sec * taxa) amostras.

    Sinais curtos são repetidos e cortados a partir do início em qualquer modo;
    sinais longos são cortados no início (tile), no centro (crop_center) ou
    numa janela sorteada (crop_random).

    Args:
        wave: Forma de onda de entrada
        target_sec: Duração alvo em segundos
        mode: crop_random, crop_center ou tile
        rng: Gerador usado por crop_random

    Raises:
        ValidationError: Duração não positiva, modo desconhecido ou crop_random sem gerador
    """
    if target_sec <= 0:
        raise ValidationError("duração alvo deve ser positiva", "target_sec")
    if mode not in CROP_MODES:
        raise ValidationError(f"modo '{mode}' desconhecido", "mode")
    n = int(round(target_sec * wave.sample_rate))
    samples = wave.samples
    if samples.size == n:
        return Waveform(samples.copy(), wave.sample_rate)
    if samples.size < n:
        reps = -(-n // samples.size)
        return Waveform(np.tile(samples, reps)[:n], wave.sample_rate)

    excess = samples.size - n
    if mode == "tile":
        start = 0
    elif mode == "crop_center":
        start = excess // 2
    else:
        if rng is None:
            raise ValidationError("crop_random exige um gerador", "rng")
        start = int(rng.integers(0, excess + 1))
    return Waveform(samples[start:start + n].copy(), wave.sample_rate)


@lru_cache(maxsize=16)
def linear_filterbank(n_bins: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """
    Banco de filtros triangulares com centros igualmente espaçados em Hz.

    O filtro k (0-based) tem centro (k + 1) * (sr / 2) / (n_bins + 1) e bordas
    nos centros vizinhos.

    Returns:
        np.ndarray: Pesos [n_bins, n_fft // 2 + 1]
    """
    freqs = librosa.fft_frequencies(sr=sample_rate, n_fft=n_fft)
    edges = np.linspace(0.0, sample_rate / 2.0, n_bins + 2)
    weights = np.zeros((n_bins, freqs.size), dtype=np.float64)
    for k in range(n_bins):
        left, center, right = edges[k], edges[k + 1], edges[k + 2]
        rising = (freqs - left) / (center - left)
        falling = (right - freqs) / (right - center)
        weights[k] = np.maximum(0.0, np.minimum(rising, falling))
    weights.setflags(write=False)
    return weights


def frequency_to_bin(frequency: float, config: FrontendConfig) -> int:
    """Índice do filtro de maior peso na frequência dada."""
    edges = np.linspace(0.0, config.sample_rate / 2.0, config.n_bins + 2)
    centers = edges[1:-1]
    spacing = edges[1] - edges[0]
    response = np.maximum(0.0, 1.0 - np.abs(frequency - centers) / spacing)
    return int(np.argmax(response))


def extract_features(wave: Waveform, config: FrontendConfig) -> FeatureMatrix:
    """
    Energias log de banco de filtros lineares.

    frames = floor((N - window) / hop) + 1 (STFT sem padding).

    Args:
        wave: Forma de onda na taxa configurada
        config: Configuração do frontend

    Returns:
        FeatureMatrix: Matriz [n_bins, frames], finita

    Raises:
        ValidationError: Taxa diferente da configurada ou sinal menor que uma janela
    """
    if wave.sample_rate != config.sample_rate:
        raise ValidationError(
            f"taxa {wave.sample_rate} Hz diferente da configurada ({config.sample_rate} Hz)", "sample_rate"
        )
    if len(wave) < config.window:
        raise ValidationError(f"sinal com {len(wave)} amostras menor que a janela ({config.window})", "wave")

    spectrum = librosa.stft(
        wave.samples.astype(np.float64),
        n_fft=config.window,
        hop_length=config.hop,
        win_length=config.window,
        window="hann",
        center=False,
    )
    power = np.abs(spectrum) ** 2
    energies = linear_filterbank(config.n_bins, config.window, config.sample_rate) @ power
    values = np.log(np.maximum(energies, config.log_floor)).astype(np.float32)
    return FeatureMatrix(
        values=values,
        frame_hop_sec=config.hop / config.sample_rate,
        bin_spec={"scale": "linear", "count": config.n_bins},
    )


class FrontendService:
    """
    Pipeline de frontend de uma execução: carga, duração fixa e features,
    com cache opcional em disco por (utt_id, hash da configuração).

    Attributes:
        config: Configuração do frontend
        cache_dir: Diretório do cache (None desativa)
    """

    def __init__(self, config: FrontendConfig, cache_dir: Optional[Path] = None):
        self.config = config
        cache = cache_dir if cache_dir is not None else config.cache_dir
        self.cache_dir = Path(cache) if cache else None

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.config.model_dump_json(exclude={"cache_dir"}).encode("utf-8")).hexdigest()[:16]

    def load(self, path: Path) -> Waveform:
        return load_audio(path, self.config.sample_rate)

    def prepare(self, wave: Waveform, train: bool, rng: Optional[np.random.Generator] = None) -> Waveform:
        """Normaliza a duração com o modo de treino ou de avaliação."""
        mode = self.config.train_crop if train else self.config.eval_crop
        return fix_duration(wave, self.config.duration_sec, mode, rng)

    def features(self, wave: Waveform) -> FeatureMatrix:
        return extract_features(wave, self.config)

    def eval_features(self, utt_id: str, path: Path) -> FeatureMatrix:
        """
        Features determinísticas de avaliação de um arquivo, usando o cache se configurado.
        """
        cached = self._cache_path(utt_id)
        if cached is not None and cached.exists():
            return FeatureMatrix(
                np.load(cached), self.config.hop / self.config.sample_rate, {"scale": "linear", "count": self.config.n_bins}
            )

        wave = self.prepare(self.load(path), train=False, rng=rng_for(0, "eval-crop", utt_id))
        matrix = self.features(wave)
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            np.save(cached, matrix.values)
            logger.debug("feature cache write utt_id=%s path=%s", utt_id, cached)
        return matrix

    def _cache_path(self, utt_id: str) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        key = hashlib.sha256(utt_id.encode("utf-8")).hexdigest()
        return self.cache_dir / self.config_hash / key[:2] / f"{key}.npy"


class ManifestDataset(Dataset):
    """
    Dataset torch sobre um manifesto: (entrada, índice da classe).

    No treino aplica augmentations e corte chaveados por (seed, utt_id, época);
    na avaliação usa o corte determinístico e o cache de features.

    Attributes:
        manifest: Manifesto de origem
        frontend: Serviço de frontend
        waveform_input: Entrega a forma de onda em vez da matriz de features
        train: Modo de treino
        augment: Augmentations aplicadas no treino (opcional)
        seed: Seed da execução
    """

    def __init__(
        self,
        manifest: Manifest,
        frontend: FrontendService,
        waveform_input: bool = False,
        train: bool = False,
        augment: Optional[Callable[[Waveform, str, int], Waveform]] = None,
        seed: int = 0,
    ):
        self.manifest = manifest
        self.frontend = frontend
        self.waveform_input = waveform_input
        self.train = train
        self.augment = augment
        self.seed = seed
        self.epoch = 1

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    @property
    def labels(self) -> List[int]:
        return [CLASS_INDEX[r.label] for r in self.manifest]

    def __len__(self) -> int:
        return len(self.manifest)

    def __getitem__(self, index: int) -> Tuple[torch.Tensor, int]:
        record = self.manifest.records[index]
        path = self.manifest.resolve(record)
        target = CLASS_INDEX[record.label]
        if not self.train and not self.waveform_input:
            return torch.from_numpy(self.frontend.eval_features(record.utt_id, path).values), target

        wave = self.frontend.load(path)
        if self.train and self.augment is not None:
            wave = self.augment(wave, record.utt_id, self.epoch)
        wave = self.frontend.prepare(wave, self.train, rng_for(self.seed, "crop", record.utt_id, self.epoch))
        if self.waveform_input:
            return torch.from_numpy(wave.samples.copy()), target
        return torch.from_numpy(self.frontend.features(wave).values), target
