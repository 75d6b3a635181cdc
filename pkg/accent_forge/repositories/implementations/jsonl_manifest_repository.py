import json
import logging
from pathlib import Path
from typing import Optional

from accent_forge.api.dto import UtteranceRecordDTO, parse_dto
from accent_forge.api.exceptions import ConflictError, ManifestParseError, NotFoundError, StorageError, ValidationError
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.utterance import UtteranceRecord
from accent_forge.repositories.interfaces.abstract_repository import AbstractManifestRepository

logger = logging.getLogger(__name__)


class JsonlManifestRepository(AbstractManifestRepository):
    """
    Persistência de manifestos em JSON Lines (UTF-8, um registro por linha).

    Cada linha é um objeto plano com exatamente os campos de UtteranceRecord;
    campos opcionais ausentes são omitidos.
    """

    def load(self, path: Path, name: Optional[str] = None, root: Optional[str] = None) -> Manifest:
        """
        Carrega um manifesto preservando a ordem do arquivo.

        Args:
            path: Caminho do arquivo
            name: Nome do manifesto (padrão: nome do arquivo sem extensão)
            root: Diretório base para caminhos relativos (padrão: diretório do arquivo)

        Returns:
            Manifest: Manifesto carregado

        Raises:
            NotFoundError: Se o arquivo não existir
            ManifestParseError: Linha inválida, com o número da linha
            ConflictError: utt_id duplicado
        """
        path = Path(path)
        if not path.exists():
            raise NotFoundError("Manifesto", str(path))
        records = []
        seen = {}
        with open(path, encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ManifestParseError(str(path), line_number, f"JSON inválido ({e.msg})") from e
                if not isinstance(data, dict):
                    raise ManifestParseError(str(path), line_number, "registro deve ser um objeto")
                try:
                    dto = parse_dto(UtteranceRecordDTO, data)
                except ValidationError as e:
                    raise ManifestParseError(str(path), line_number, e.message) from e
                if dto.utt_id in seen:
                    raise ConflictError(
                        f"utt_id duplicado '{dto.utt_id}' nas linhas {seen[dto.utt_id]} e {line_number} de {path}",
                        dto.utt_id,
                    )
                seen[dto.utt_id] = line_number
                records.append(UtteranceRecord.from_dict(dto.model_dump(exclude_none=True)))
        logger.debug("manifest loaded path=%s records=%d", path, len(records))
        return Manifest(records, name or path.stem, root if root is not None else str(path.parent))

    def save(self, manifest: Manifest, path: Path) -> None:
        """
        Salva o manifesto; a serialização é estável byte a byte.

        Caminhos relativos ficam como estão quando o destino está na raiz do
        manifesto, então carregar e salvar na mesma pasta reproduz o arquivo.
        Em outra pasta eles são reescritos como absolutos, resolvidos contra a raiz.

        Raises:
            StorageError: Se o destino não puder ser escrito
        """
        path = Path(path)
        # caminhos relativos só continuam válidos se o arquivo ficar na raiz do manifesto
        relocate = manifest.root is not None and Path(manifest.root).resolve() != path.parent.resolve()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                for record in manifest:
                    if relocate and not Path(record.audio_path).is_absolute():
                        record = record.replace(audio_path=manifest.resolve(record).resolve().as_posix())
                    f.write(serialize_record(record))
                    f.write("\n")
        except OSError as e:
            raise StorageError(str(path), e.strerror or str(e)) from e
        logger.debug("manifest saved path=%s records=%d", path, len(manifest))


def serialize_record(record: UtteranceRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False, separators=(", ", ": "))
