"""
Serviço de augmentations de forma de onda.
Contém ruído gaussiano com SNR controlado, pitch shift e time stretch (phase vocoder do librosa)
e a aplicação aleatória chaveada por (seed, utt_id, época).
"""

import logging
import math
from typing import Union

import librosa
import numpy as np

from accent_forge.api.dto import AugmentConfig
from accent_forge.api.exceptions import ValidationError
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.augment_plan import AugmentPlan
from accent_forge.services.randomness import rng_for

logger = logging.getLogger(__name__)

WaveLike = Union[Waveform, np.ndarray]

DEFAULT_N_FFT = 1024
DEFAULT_HOP = 256


def _samples(wave: WaveLike) -> np.ndarray:
    samples = wave.samples if isinstance(wave, Waveform) else wave
    return np.asarray(samples, dtype=np.float32)


def signal_power(samples: np.ndarray) -> float:
    return float(np.mean(np.square(samples, dtype=np.float64)))


def add_gaussian_noise(wave: WaveLike, snr_db: float, rng_key: int) -> np.ndarray:
    """
    Soma ruído gaussiano branco com a SNR pedida.

    O ruído sorteado é reescalado para que sua potência medida seja exatamente
    P_sinal / 10^(snr_db / 10).

    Args:
        wave: Forma de onda de entrada
        snr_db: Relação sinal-ruído em dB (+inf desativa)
        rng_key: Chave do gerador do ruído

    Returns:
        np.ndarray: Amostras com ruído, mesmo comprimento da entrada

    Raises:
        ValidationError: Se a entrada for vazia ou tiver potência nula
    """
    samples = _samples(wave)
    if samples.size == 0:
        raise ValidationError("forma de onda vazia", "wave")
    if math.isinf(snr_db) and snr_db > 0:
        return samples.copy()
    power = signal_power(samples)
    if power == 0.0:
        raise ValidationError("SNR indefinida para sinal de potência nula", "wave")

    noise = np.random.default_rng(rng_key).standard_normal(samples.size)
    noise *= math.sqrt(power / 10.0 ** (snr_db / 10.0) / signal_power(noise))
    return (samples.astype(np.float64) + noise).astype(np.float32)


def pitch_shift(
    wave: WaveLike,
    semitones: float,
    sample_rate: int,
    n_fft: int = DEFAULT_N_FFT,
    hop_length: int = DEFAULT_HOP,
) -> np.ndarray:
    """
    Desloca a frequência fundamental por 2^(semitones/12) mantendo a duração.

    Raises:
        ValidationError: Se |semitones| > 12
    """
    if abs(semitones) > 12:
        raise ValidationError(f"deslocamento de {semitones} semitons fora de [-12, 12]", "semitones")
    samples = _samples(wave)
    if semitones == 0:
        return samples.copy()
    shifted = librosa.effects.pitch_shift(
        samples, sr=sample_rate, n_steps=float(semitones), n_fft=n_fft, hop_length=hop_length
    )
    return shifted.astype(np.float32)


def time_stretch(
    wave: WaveLike,
    rate: float,
    n_fft: int = DEFAULT_N_FFT,
    hop_length: int = DEFAULT_HOP,
) -> np.ndarray:
    """
    Altera a duração por 1/rate preservando o pitch.

    Raises:
        ValidationError: Se rate estiver fora de (0.25, 4)
    """
    if not 0.25 < rate < 4:
        raise ValidationError(f"taxa {rate} fora de (0.25, 4)", "rate")
    samples = _samples(wave)
    if rate == 1:
        return samples.copy()
    stretched = librosa.effects.time_stretch(samples, rate=float(rate), n_fft=n_fft, hop_length=hop_length)
    return stretched.astype(np.float32)


def draw_plan(config: AugmentConfig, utt_id: str, epoch: int, global_seed: int) -> AugmentPlan:
    """
    Sorteia os parâmetros das augmentations de uma amostra em uma época.

    Todos os sorteios são consumidos sempre na mesma ordem, aplicados ou não,
    então o plano depende apenas de (global_seed, utt_id, epoch).
    """
    rng = rng_for(global_seed, "augment", utt_id, epoch)
    apply_noise = bool(rng.random() < config.apply_prob)
    snr_db = float(rng.uniform(*config.noise_snr_db_range))
    noise_key = int(rng.integers(0, 2**63 - 1))
    apply_pitch = bool(rng.random() < config.apply_prob)
    semitones = float(rng.uniform(*config.pitch_semitone_range))
    apply_stretch = bool(rng.random() < config.apply_prob)
    rate = float(rng.uniform(*config.stretch_rate_range))
    return AugmentPlan(
        utt_id=utt_id,
        epoch=epoch,
        apply_noise=apply_noise,
        snr_db=snr_db,
        noise_key=noise_key,
        apply_pitch=apply_pitch,
        semitones=semitones,
        apply_stretch=apply_stretch,
        rate=rate,
    )


def apply_plan(wave: Waveform, plan: AugmentPlan, config: AugmentConfig) -> Waveform:
    """Aplica um plano já sorteado: pitch, stretch e por fim ruído."""
    samples = wave.samples.copy()
    if plan.is_identity:
        return Waveform(samples, wave.sample_rate)
    if plan.apply_pitch:
        samples = pitch_shift(samples, plan.semitones, wave.sample_rate, config.n_fft, config.hop_length)
    if plan.apply_stretch:
        samples = time_stretch(samples, plan.rate, config.n_fft, config.hop_length)
    if plan.apply_noise and signal_power(samples) > 0:
        samples = add_gaussian_noise(samples, plan.snr_db, plan.noise_key)

    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        samples = samples / peak
    return Waveform(samples, wave.sample_rate)


def apply_random(wave: Waveform, config: AugmentConfig, utt_id: str, epoch: int, global_seed: int) -> Waveform:
    """
    Aplica as augmentations de forma estocástica e reprodutível.

    Args:
        wave: Forma de onda de entrada
        config: Política de augmentations
        utt_id: Identificador da amostra
        epoch: Época atual
        global_seed: Seed da execução

    Returns:
        Waveform: Resultado em [-1, 1]
    """
    if not config.enabled:
        return Waveform(wave.samples.copy(), wave.sample_rate)
    return apply_plan(wave, draw_plan(config, utt_id, epoch, global_seed), config)


class AugmentService:
    """
    Aplica a política de augmentations de uma execução de treino.

    Attributes:
        config: Política de augmentations
        global_seed: Seed da execução
    """

    def __init__(self, config: AugmentConfig, global_seed: int):
        self.config = config
        self.global_seed = global_seed

    def __call__(self, wave: Waveform, utt_id: str, epoch: int) -> Waveform:
        return apply_random(wave, self.config, utt_id, epoch, self.global_seed)
