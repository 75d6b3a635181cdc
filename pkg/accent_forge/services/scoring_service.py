"""
Serviço de pontuação.
Contém a pontuação de manifestos com um checkpoint e a leitura/escrita do arquivo de scores.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd
import torch
from tqdm import tqdm

from accent_forge.api.dto import EvalConfig, FrontendConfig
from accent_forge.api.exceptions import AudioDecodeError, ScoringError, StorageError, ValidationError
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.score import CLASS_INDEX, POLARITY, ScoreRecord
from accent_forge.business_model.utterance import Label
from accent_forge.models.checkpoint import load_checkpoint
from accent_forge.models.factory import uses_waveform_input
from accent_forge.services.frontend_service import FrontendService
from accent_forge.services.randomness import rng_for

logger = logging.getLogger(__name__)


@dataclass
class ScoringResult:
    scores: List[ScoreRecord] = field(default_factory=list)
    excluded: List[Dict] = field(default_factory=list)


def save_scores(path: Path, scores: List[ScoreRecord], model_id: str) -> None:
    """
    Escreve o arquivo de scores: um cabeçalho com a polaridade e o modelo,
    depois "utt_id score" por linha. O score é o último campo, então o utt_id
    pode conter espaços.
    """
    path = Path(path)
    lines = [f"# polarity={POLARITY} model={model_id}"]
    lines.extend(f"{s.utt_id} {s.score!r}" for s in scores)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise StorageError(str(path), e.strerror or str(e)) from e


def load_scores(path: Path) -> Tuple[List[ScoreRecord], Dict[str, str]]:
    """
    Lê um arquivo de scores.

    Returns:
        Tuple[List[ScoreRecord], Dict[str, str]]: (scores em ordem do arquivo, cabeçalho)

    Raises:
        ValidationError: Cabeçalho ausente, polaridade diferente ou linha inválida
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValidationError(f"{path}: cabeçalho de polaridade ausente", "scores")
    header = dict(item.split("=", 1) for item in lines[0].lstrip("#").split() if "=" in item)
    if header.get("polarity") != POLARITY:
        raise ValidationError(f"{path}: polaridade '{header.get('polarity')}' não suportada", "scores")

    scores = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.rsplit(None, 1)
        try:
            if len(parts) != 2:
                raise ValueError("esperado 'utt_id score'")
            scores.append(ScoreRecord(parts[0], float(parts[1])))
        except ValueError as e:
            raise ValidationError(f"{path}:{number}: {e}", "scores") from e
    return scores, header


class ScoringService:
    """
    Pontua manifestos com um classificador treinado.

    Attributes:
        frontend_config: Configuração do frontend usada no treino
        eval_config: Tamanho de lote e fração máxima de áudios ausentes
    """

    def __init__(self, frontend_config: FrontendConfig, eval_config: EvalConfig):
        self.frontend = FrontendService(frontend_config)
        self.eval_config = eval_config

    def score_manifest(self, model: torch.nn.Module, manifest: Manifest) -> ScoringResult:
        """
        Um score por registro resolvível: log p(bona fide) - log p(spoof).

        Args:
            model: Classificador em modo de avaliação
            manifest: Manifesto a pontuar

        Returns:
            ScoringResult: Scores em ordem do manifesto e registros excluídos

        Raises:
            ScoringError: Se a fração de áudios ausentes passar do limite
        """
        waveform_input = uses_waveform_input(model.config)
        result = ScoringResult()
        inputs, ids = [], []
        model.eval()

        for record in tqdm(manifest, desc=f"score {manifest.name}", leave=False, disable=None):
            path = manifest.resolve(record)
            if not path.exists():
                result.excluded.append({"utt_id": record.utt_id, "audio_path": str(path), "reason": "missing"})
                continue
            try:
                inputs.append(self._input(record.utt_id, path, waveform_input))
            except AudioDecodeError as e:
                result.excluded.append({"utt_id": record.utt_id, "audio_path": str(path), "reason": e.message})
                continue
            ids.append(record.utt_id)

        if manifest and len(result.excluded) / len(manifest) > self.eval_config.max_missing_fraction:
            raise ScoringError(
                f"{len(result.excluded)} de {len(manifest)} áudios não resolvidos em '{manifest.name}'",
                result.excluded,
            )

        with torch.no_grad():
            for start in range(0, len(inputs), self.eval_config.batch_size):
                batch = torch.stack(inputs[start:start + self.eval_config.batch_size])
                log_probs = model(batch)
                margin = log_probs[:, CLASS_INDEX[Label.BONA_FIDE]] - log_probs[:, CLASS_INDEX[Label.SPOOF]]
                for utt_id, value in zip(ids[start:start + len(batch)], margin.double().tolist()):
                    if not math.isfinite(value):
                        raise ScoringError(f"score não finito para '{utt_id}'")
                    result.scores.append(ScoreRecord(utt_id, value))

        logger.info(
            "scored manifest=%s scores=%d excluded=%d", manifest.name, len(result.scores), len(result.excluded)
        )
        return result

    def _input(self, utt_id: str, path: Path, waveform_input: bool) -> torch.Tensor:
        if not waveform_input:
            return torch.from_numpy(self.frontend.eval_features(utt_id, path).values)
        wave = self.frontend.prepare(self.frontend.load(path), train=False, rng=rng_for(0, "eval-crop", utt_id))
        return torch.from_numpy(wave.samples.copy())

    def score_checkpoint(
        self, checkpoint_path: Path, manifest: Manifest, out_path: Path, model_id: Optional[str] = None
    ) -> ScoringResult:
        """
        Carrega o checkpoint, pontua o manifesto e grava o arquivo de scores.
        Registros excluídos vão para <out>.excluded.tsv; em falha o relatório é gravado antes do erro.
        """
        model, _ = load_checkpoint(checkpoint_path)
        model_id = model_id or Path(checkpoint_path).stem
        out_path = Path(out_path)
        excluded_path = out_path.with_name(out_path.name + ".excluded.tsv")
        try:
            result = self.score_manifest(model, manifest)
        except ScoringError as e:
            if e.missing:
                write_exclusions(excluded_path, e.missing)
            raise
        save_scores(out_path, result.scores, model_id)
        if result.excluded:
            write_exclusions(excluded_path, result.excluded)
        return result


def write_exclusions(path: Path, excluded: List[Dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(excluded, columns=["utt_id", "audio_path", "reason"]).to_csv(
        path, sep="\t", index=False, lineterminator="\n"
    )
