"""
Fluxos pseudoaleatórios nomeados.

Cada operação sorteia de um fluxo derivado de (seed, nome da operação, chaves),
de modo que o resultado não depende da ordem de execução nem de outros sorteios.
"""

import hashlib

import numpy as np


def stream_entropy(seed: int, name: str, *keys) -> int:
    material = "\x1f".join([str(int(seed)), name, *(str(k) for k in keys)])
    return int.from_bytes(hashlib.sha256(material.encode("utf-8")).digest()[:16], "big")


def rng_for(seed: int, name: str, *keys) -> np.random.Generator:
    """
    Cria um gerador numpy determinístico para o fluxo nomeado.

    Args:
        seed: Seed global da execução
        name: Nome da operação (ex: "split", "augment")
        keys: Chaves adicionais (ex: utt_id, época)

    Returns:
        np.random.Generator: Gerador independente para o fluxo
    """
    return np.random.default_rng(np.random.SeedSequence(stream_entropy(seed, name, *keys)))


def stable_hash(*parts) -> bytes:
    return hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
