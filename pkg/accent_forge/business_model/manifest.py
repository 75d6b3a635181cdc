from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from accent_forge.api.exceptions import ConflictError
from accent_forge.business_model.utterance import Label, UtteranceRecord


class Manifest:
    def __init__(self, records: Iterable[UtteranceRecord], name: str, root: Optional[str] = None):
        self._records: Tuple[UtteranceRecord, ...] = tuple(records)
        self.name = name
        self.root = root
        self._index: Dict[str, int] = {}
        for i, record in enumerate(self._records):
            if record.utt_id in self._index:
                raise ConflictError(f"utt_id duplicado no manifesto '{name}': {record.utt_id}", record.utt_id)
            self._index[record.utt_id] = i

    @property
    def records(self) -> Tuple[UtteranceRecord, ...]:
        return self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[UtteranceRecord]:
        return iter(self._records)

    def __contains__(self, utt_id: str) -> bool:
        return utt_id in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Manifest):
            return NotImplemented
        return self.name == other.name and self._records == other._records

    def __repr__(self) -> str:
        return f"Manifest(name={self.name!r}, records={len(self)})"

    def get(self, utt_id: str) -> Optional[UtteranceRecord]:
        i = self._index.get(utt_id)
        return None if i is None else self._records[i]

    def ids(self) -> List[str]:
        return [r.utt_id for r in self._records]

    def label_counts(self) -> Dict[Label, int]:
        counts = Counter(r.label for r in self._records)
        return {label: counts.get(label, 0) for label in Label}

    def languages(self) -> List[str]:
        return sorted({r.language for r in self._records})

    def with_records(self, records: Iterable[UtteranceRecord], name: Optional[str] = None) -> "Manifest":
        return Manifest(records, name or self.name, self.root)

    def resolve(self, record: UtteranceRecord) -> Path:
        path = Path(record.audio_path)
        if self.root and not path.is_absolute():
            return Path(self.root) / path
        return path
