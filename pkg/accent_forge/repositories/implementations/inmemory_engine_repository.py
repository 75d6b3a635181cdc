from typing import Dict, List, Optional

from accent_forge.api.exceptions import ConflictError
from accent_forge.business_model.tts_engine import TTSEngineSpec
from accent_forge.repositories.interfaces.abstract_repository import AbstractRepository


class InMemoryEngineRepository(AbstractRepository[TTSEngineSpec]):
    """Registro de engines TTS, consultável por id, idioma e grupo de sotaque."""

    def __init__(self, initial_data: Optional[List[TTSEngineSpec]] = None, name: str = "engines"):
        self.name = name
        self._engines: Dict[str, TTSEngineSpec] = {}
        for spec in initial_data or []:
            self.add(spec)

    def add(self, entity: TTSEngineSpec) -> None:
        if entity.engine_id in self._engines:
            raise ConflictError(f"engine_id duplicado no registro: {entity.engine_id}", entity.engine_id)
        self._engines[entity.engine_id] = entity

    def get(self, entity_id: str) -> Optional[TTSEngineSpec]:
        return self._engines.get(entity_id)

    def all(self) -> List[TTSEngineSpec]:
        return list(self._engines.values())

    def __len__(self) -> int:
        return len(self._engines)

    def by_language(self, language_code: str) -> List[TTSEngineSpec]:
        return [e for e in self._engines.values() if e.language_code == language_code]

    def by_group(self, group: str) -> List[TTSEngineSpec]:
        return [e for e in self._engines.values() if e.group == group]

    def languages(self) -> List[str]:
        return sorted({e.language_code for e in self._engines.values()})
