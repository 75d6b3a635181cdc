"""
Serviço de construção de conjuntos de teste entre idiomas.
Contém as receitas VC-CL3 (conversão de voz dentro do idioma) e TTS-CL
(síntese no idioma do subconjunto bona fide).
"""

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from accent_forge.api.exceptions import BusinessRuleError, SynthesisError, ValidationError
from accent_forge.backends.interfaces.synthesis_backend import SynthesisBackend, VoiceConversionBackend
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.tts_engine import Transcript
from accent_forge.business_model.utterance import Label, Portion, UtteranceRecord
from accent_forge.repositories.implementations.inmemory_engine_repository import InMemoryEngineRepository
from accent_forge.repositories.implementations.jsonl_manifest_repository import JsonlManifestRepository
from accent_forge.services.accent_expand_service import load_transcripts, write_wav
from accent_forge.services.frontend_service import load_audio
from accent_forge.services.randomness import rng_for

logger = logging.getLogger(__name__)


def group_by_language(records: Sequence[UtteranceRecord]) -> Dict[str, List[UtteranceRecord]]:
    groups: Dict[str, List[UtteranceRecord]] = defaultdict(list)
    for record in sorted(records, key=lambda r: r.utt_id):
        groups[record.language].append(record)
    return dict(sorted(groups.items()))


def transcripts_by_language(path: Path) -> Dict[str, List[Transcript]]:
    """Um arquivo <idioma>.txt por idioma; o nome do arquivo é o código do idioma."""
    groups: Dict[str, List[Transcript]] = defaultdict(list)
    for transcript in load_transcripts(path):
        groups[transcript.transcript_id.rsplit("-", 1)[0].lower()].append(transcript)
    return dict(groups)


def pick_target(record: UtteranceRecord, group: List[UtteranceRecord], seed: int) -> UtteranceRecord:
    """
    Sorteia a referência de conversão no mesmo idioma, excluindo o próprio registro
    e, quando há speaker_id, as falas do mesmo locutor.

    Raises:
        BusinessRuleError: Se não houver alvo distinto
    """
    candidates = [r for r in group if r.utt_id != record.utt_id]
    if record.speaker_id is not None:
        other_speakers = [r for r in candidates if r.speaker_id != record.speaker_id]
        if other_speakers:
            candidates = other_speakers
    if not candidates:
        raise BusinessRuleError(
            f"idioma '{record.language}' tem um só registro bona fide; não há alvo distinto para conversão"
        )
    return candidates[int(rng_for(seed, "vc-cl3", record.utt_id).integers(len(candidates)))]


def _as_absolute(manifest: Manifest, record: UtteranceRecord) -> UtteranceRecord:
    return record.replace(audio_path=manifest.resolve(record).resolve().as_posix())


class CrossLingualSetService:
    """
    Receitas de conjuntos de avaliação com backends plugáveis.

    Attributes:
        manifest_repository: Persistência dos manifestos gerados
        workers: Conversões/sínteses em paralelo
    """

    def __init__(self, manifest_repository: JsonlManifestRepository, workers: int = 4):
        self.manifest_repository = manifest_repository
        self.workers = workers

    def _run(self, jobs: Sequence, fn: Callable, desc: str) -> List:
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(tqdm(executor.map(fn, jobs), total=len(jobs), desc=desc, disable=None))

    def _finish(self, records: List[UtteranceRecord], name: str, output_dir: Path) -> Manifest:
        records.sort(key=lambda r: r.utt_id)
        manifest = Manifest(records, name, str(output_dir))
        self.manifest_repository.save(manifest, output_dir / "manifest.jsonl")
        return manifest

    # -------------------------------------------------------------------------
    # VC-CL3
    # -------------------------------------------------------------------------

    def build_vc_cl3(
        self, bona: Manifest, backend: VoiceConversionBackend, seed: int, output_dir: Path
    ) -> Manifest:
        """
        Converte cada fala bona fide exatamente uma vez, com alvo sorteado do mesmo idioma.

        O manifesto de saída contém os registros bona fide (caminhos absolutos) e um
        spoof "<utt_id>-vc" por registro, com origin_id e target_id preenchidos.

        Raises:
            ValidationError: Manifesto sem registros bona fide
            BusinessRuleError: Idioma com um só registro
        """
        records = [r for r in bona if r.is_bona_fide]
        if not records:
            raise ValidationError(f"manifesto '{bona.name}' sem registros bona fide", "bona")
        groups = group_by_language(records)
        pairs = [(record, pick_target(record, group, seed)) for group in groups.values() for record in group]
        output_dir = Path(output_dir)

        def convert(pair: Tuple[UtteranceRecord, UtteranceRecord]) -> UtteranceRecord:
            source_record, target_record = pair
            source = load_audio(bona.resolve(source_record))
            target = load_audio(bona.resolve(target_record), source.sample_rate)
            # o alvo é repetido/cortado para a duração da origem
            target = Waveform(np.resize(target.samples, len(source)), source.sample_rate)
            wave = backend.convert(source, source_record.utt_id, target, target_record.utt_id)
            utt_id = f"{source_record.utt_id}-vc"
            relative = Path("audio") / "vc" / source_record.language / f"{utt_id}.wav"
            write_wav(output_dir / relative, wave)
            return UtteranceRecord(
                utt_id=utt_id,
                audio_path=relative.as_posix(),
                label=Label.SPOOF,
                language=source_record.language,
                source=f"vc/{backend.name}",
                portion=Portion.TEST,
                accent=source_record.accent,
                duration_sec=round(wave.duration_sec, 6),
                speaker_id=target_record.speaker_id,
                origin_id=source_record.utt_id,
                target_id=target_record.utt_id,
            )

        spoofs = self._run(pairs, convert, "vc-cl3")
        manifest = self._finish([_as_absolute(bona, r) for r in records] + spoofs, "vc-cl3", output_dir)
        logger.info(
            "vc-cl3 built languages=%d bona=%d spoof=%d out=%s", len(groups), len(records), len(spoofs), output_dir
        )
        return manifest

    # -------------------------------------------------------------------------
    # TTS-CL
    # -------------------------------------------------------------------------

    def build_tts_cl(
        self,
        bona: Manifest,
        transcripts: Dict[str, Sequence[Transcript]],
        backend: SynthesisBackend,
        registry: InMemoryEngineRepository,
        vocoder_tag: str,
        output_dir: Path,
        spoof_ratio: float = 5.0,
    ) -> Manifest:
        """
        Gera round(spoof_ratio * n_bona) falas sintéticas por idioma do subconjunto bona fide.

        As transcrições do idioma são usadas em ciclo e as engines do idioma em rodízio.
        O campo source dos spoofs é "<backend>/<vocoder_tag>".

        Raises:
            ValidationError: Idioma sem engine, sem transcrições ou razão inválida
        """
        if spoof_ratio <= 0:
            raise ValidationError("spoof_ratio deve ser positivo", "spoof_ratio")
        records = [r for r in bona if r.is_bona_fide]
        if not records:
            raise ValidationError(f"manifesto '{bona.name}' sem registros bona fide", "bona")
        groups = group_by_language(records)
        supported = backend.capabilities.engine_ids

        jobs = []
        for language, group in groups.items():
            engines = [e for e in registry.by_language(language) if supported is None or e.engine_id in supported]
            if not engines:
                raise ValidationError(f"idioma '{language}' não suportado pelo backend '{backend.name}'", "language")
            texts = transcripts.get(language) or []
            if not texts:
                raise ValidationError(f"sem transcrições para o idioma '{language}'", "transcripts")
            for i in range(int(round(spoof_ratio * len(group)))):
                jobs.append((language, i, engines[i % len(engines)].engine_id, texts[i % len(texts)].text))

        output_dir = Path(output_dir)
        source = f"{backend.name}/{vocoder_tag}"

        def render(job: Tuple[str, int, str, str]) -> UtteranceRecord:
            language, index, engine_id, text = job
            wave = backend.synthesize(engine_id, text)
            utt_id = f"tts-{language}-{index:06d}"
            relative = Path("audio") / "tts" / language / f"{utt_id}.wav"
            write_wav(output_dir / relative, wave)
            return UtteranceRecord(
                utt_id=utt_id,
                audio_path=relative.as_posix(),
                label=Label.SPOOF,
                language=language,
                source=source,
                portion=Portion.TEST,
                duration_sec=round(wave.duration_sec, 6),
            )

        try:
            spoofs = self._run(jobs, render, "tts-cl")
        except SynthesisError:
            logger.error("tts-cl synthesis failed backend=%s", backend.name)
            raise
        manifest = self._finish([_as_absolute(bona, r) for r in records] + spoofs, "tts-cl", output_dir)
        logger.info(
            "tts-cl built languages=%d bona=%d spoof=%d out=%s", len(groups), len(records), len(spoofs), output_dir
        )
        return manifest
