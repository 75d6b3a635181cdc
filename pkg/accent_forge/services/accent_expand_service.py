"""
Serviço de expansão por sotaques.
Contém a leitura de transcrições e registros de engines, a atribuição de engines
e a síntese em lote que gera manifestos spoof da porção II.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import soundfile as sf
from tqdm import tqdm

from accent_forge.api.dto import EngineRegistryDTO, parse_dto
from accent_forge.api.exceptions import (
    BackendUnreachableError,
    NotFoundError,
    StorageError,
    SynthesisError,
    TransportError,
    ValidationError,
)
from accent_forge.backends.interfaces.synthesis_backend import SynthesisBackend
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.tts_engine import ENGLISH_ACCENTS, OTHER_LANGUAGE, TTSEngineSpec, Transcript
from accent_forge.business_model.utterance import Label, Portion, UtteranceRecord
from accent_forge.repositories.implementations.inmemory_engine_repository import InMemoryEngineRepository
from accent_forge.repositories.implementations.jsonl_manifest_repository import JsonlManifestRepository
from accent_forge.services.randomness import rng_for

logger = logging.getLogger(__name__)

ENGINES_DIR = Path(__file__).resolve().parent.parent / "engines"
PACKAGED_REGISTRIES = {
    ENGLISH_ACCENTS: ENGINES_DIR / "english_accents.json",
    OTHER_LANGUAGE: ENGINES_DIR / "other_languages.json",
}
GROUP_ALIASES = {"eng": ENGLISH_ACCENTS, "mix": OTHER_LANGUAGE}
POLICIES = ("uniform_random", "round_robin")

# o conteúdo continua em inglês mesmo quando a engine é de outro idioma
EXPANDED_LANGUAGE = "en"


def resolve_group(group: str) -> str:
    """Aceita "eng"/"mix" ou o nome completo do grupo."""
    resolved = GROUP_ALIASES.get(group, group)
    if resolved not in (ENGLISH_ACCENTS, OTHER_LANGUAGE):
        raise ValidationError(f"grupo '{group}' desconhecido (use eng ou mix)", "group")
    return resolved


# =============================================================================
# INGESTION
# =============================================================================

def load_transcripts(path: Path) -> List[Transcript]:
    """
    Lê transcrições, uma por linha, de um arquivo .txt ou de todos os .txt de um diretório.

    O id é <nome-do-arquivo>-<número-da-linha>; linhas em branco são ignoradas
    mas contam na numeração.

    Raises:
        NotFoundError: Se o caminho não existir
    """
    path = Path(path)
    if not path.exists():
        raise NotFoundError("Transcrições", str(path))
    files = [path] if path.is_file() else sorted(path.glob("*.txt"))
    source = path.stem if path.is_file() else path.name

    transcripts = []
    for file in files:
        for number, line in enumerate(file.read_text(encoding="utf-8").splitlines(), start=1):
            text = line.strip()
            if text:
                transcripts.append(Transcript(f"{file.stem}-{number}", text, source))
    logger.info("transcripts loaded path=%s files=%d transcripts=%d", path, len(files), len(transcripts))
    return transcripts


def load_registry(path: Union[Path, str]) -> Tuple[str, List[TTSEngineSpec]]:
    """
    Lê um registro de engines em JSON: {"name": ..., "engines": [{engine_id, language_code, accent_tag}]}.
    Aceita também o nome de um grupo empacotado (eng, mix, english-accents, other-language).

    Returns:
        Tuple[str, List[TTSEngineSpec]]: (nome do registro, engines na ordem do arquivo)

    Raises:
        NotFoundError: Se o arquivo não existir
        ValidationError: Se o documento for inválido
    """
    packaged = GROUP_ALIASES.get(str(path), str(path))
    path = PACKAGED_REGISTRIES.get(packaged, Path(path))
    if not path.exists():
        raise NotFoundError("Registro de engines", str(path))
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: JSON inválido ({e.msg})", "engines") from e
    dto = parse_dto(EngineRegistryDTO, data)
    return dto.name, [TTSEngineSpec(**engine.model_dump()) for engine in dto.engines]


def register_engines(specs: Sequence[TTSEngineSpec], name: str = "engines") -> InMemoryEngineRepository:
    """
    Raises:
        ConflictError: engine_id duplicado
    """
    return InMemoryEngineRepository(list(specs), name)


def assign_engines(
    transcripts: Sequence[Transcript], engines: Sequence[TTSEngineSpec], policy: str, seed: int
) -> List[Tuple[str, str]]:
    """
    Atribui exatamente uma engine a cada transcrição.

    round_robin percorre as engines na ordem do registro; uniform_random sorteia
    do fluxo "assign" da seed.

    Returns:
        List[Tuple[str, str]]: (transcript_id, engine_id) na ordem das transcrições

    Raises:
        ValidationError: Grupo de engines vazio ou política desconhecida
    """
    if policy not in POLICIES:
        raise ValidationError(f"política '{policy}' desconhecida", "policy")
    if not engines:
        raise ValidationError("grupo de engines vazio", "engines")
    if not transcripts:
        return []
    if policy == "round_robin":
        picks = [i % len(engines) for i in range(len(transcripts))]
    else:
        picks = rng_for(seed, "assign").integers(0, len(engines), size=len(transcripts)).tolist()
    return [(t.transcript_id, engines[k].engine_id) for t, k in zip(transcripts, picks)]


def synthesize(backend: SynthesisBackend, engine_id: str, text: str) -> Waveform:
    return backend.synthesize(engine_id, text)


def write_wav(path: Path, wave: Waveform) -> None:
    """Grava PCM linear de 16 bits na taxa nativa da engine."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        sf.write(str(path), np.asarray(wave.samples), wave.sample_rate, subtype="PCM_16", format="WAV")
    except (RuntimeError, OSError) as e:
        raise StorageError(str(path), str(e)) from e


# =============================================================================
# EXPANSION
# =============================================================================

@dataclass
class ExpansionResult:
    manifest: Manifest
    failures: List[Dict] = field(default_factory=list)
    manifest_path: Optional[Path] = None
    failures_path: Optional[Path] = None


class AccentExpandService:
    """
    Expansão de transcrições em inglês por engines de sotaque ou de outros idiomas.

    Attributes:
        backend: Backend de síntese
        manifest_repository: Persistência do manifesto gerado
        workers: Requisições de síntese em paralelo
    """

    def __init__(
        self, backend: SynthesisBackend, manifest_repository: JsonlManifestRepository, workers: int = 4
    ):
        if workers < 1:
            raise ValidationError("workers deve ser >= 1", "workers")
        self.backend = backend
        self.manifest_repository = manifest_repository
        self.workers = workers

    def expand(
        self,
        transcripts: Sequence[Transcript],
        registry: InMemoryEngineRepository,
        group: str,
        policy: str,
        seed: int,
        output_dir: Path,
    ) -> ExpansionResult:
        """
        Sintetiza uma fala por transcrição e grava manifest.jsonl e failures.jsonl em output_dir.

        Os áudios ficam em audio/<engine_id>/<utt_id>.wav. Sínteses que falham
        vão para o log de falhas e ficam fora do manifesto.

        Args:
            transcripts: Transcrições em inglês
            registry: Registro de engines
            group: eng / mix (ou o nome completo do grupo)
            policy: uniform_random ou round_robin
            seed: Seed da atribuição
            output_dir: Diretório de saída (raiz do manifesto)

        Returns:
            ExpansionResult: Manifesto, falhas e caminhos gravados

        Raises:
            BackendUnreachableError: Se todas as sínteses falharem por transporte
        """
        group = resolve_group(group)
        engines = registry.by_group(group)
        assignment = assign_engines(transcripts, engines, policy, seed)
        texts = {t.transcript_id: t.text for t in transcripts}
        output_dir = Path(output_dir)

        def job(item: Tuple[str, str]):
            transcript_id, engine_id = item
            try:
                return self._render(transcript_id, texts[transcript_id], registry.get(engine_id), output_dir)
            except (SynthesisError, ValidationError) as e:
                return e

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            outcomes = list(tqdm(
                executor.map(job, assignment), total=len(assignment), desc=f"expand {group}", disable=None
            ))

        records, failures, transport_failures = [], [], 0
        for (transcript_id, engine_id), outcome in zip(assignment, outcomes):
            if isinstance(outcome, UtteranceRecord):
                records.append(outcome)
                continue
            transport_failures += isinstance(outcome, TransportError)
            failures.append({
                "transcript_id": transcript_id,
                "engine_id": engine_id,
                "code": outcome.code,
                "message": outcome.message,
            })
            logger.warning("synthesis failed transcript=%s engine=%s code=%s", transcript_id, engine_id, outcome.code)

        if assignment and transport_failures == len(assignment):
            raise BackendUnreachableError(
                f"nenhuma das {len(assignment)} sínteses chegou ao backend '{self.backend.name}'"
            )

        records.sort(key=lambda r: r.utt_id)
        manifest = Manifest(records, f"accent-{group}", str(output_dir))
        manifest_path = output_dir / "manifest.jsonl"
        failures_path = output_dir / "failures.jsonl"
        self.manifest_repository.save(manifest, manifest_path)
        write_failures(failures_path, failures)

        logger.info(
            "expansion finished group=%s policy=%s records=%d failures=%d out=%s",
            group, policy, len(records), len(failures), output_dir,
        )
        return ExpansionResult(manifest, failures, manifest_path, failures_path)

    def _render(self, transcript_id: str, text: str, engine: TTSEngineSpec, output_dir: Path) -> UtteranceRecord:
        wave = synthesize(self.backend, engine.engine_id, text)
        utt_id = f"{transcript_id}_{engine.engine_id}"
        relative = Path("audio") / engine.engine_id / f"{utt_id}.wav"
        write_wav(output_dir / relative, wave)
        return UtteranceRecord(
            utt_id=utt_id,
            audio_path=relative.as_posix(),
            label=Label.SPOOF,
            language=EXPANDED_LANGUAGE,
            source=engine.engine_id,
            portion=Portion.II,
            accent=engine.record_accent,
            duration_sec=round(wave.duration_sec, 6),
        )


def write_failures(path: Path, failures: List[Dict]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for failure in failures:
                f.write(json.dumps(failure, ensure_ascii=False, sort_keys=True) + "\n")
    except OSError as e:
        raise StorageError(str(path), e.strerror or str(e)) from e
