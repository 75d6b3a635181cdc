from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, List, Optional, TypeVar

from accent_forge.business_model.manifest import Manifest

T = TypeVar('T')


class AbstractRepository(ABC, Generic[T]):
    @abstractmethod
    def add(self, entity: T) -> None:
        pass

    @abstractmethod
    def get(self, entity_id: str) -> Optional[T]:
        pass

    @abstractmethod
    def all(self) -> List[T]:
        pass


class AbstractManifestRepository(ABC):
    @abstractmethod
    def load(self, path: Path) -> Manifest:
        pass

    @abstractmethod
    def save(self, manifest: Manifest, path: Path) -> None:
        pass
