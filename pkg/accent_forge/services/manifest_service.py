"""
Serviço de manifestos.
Contém a construção, divisão, subamostragem, junção e sumarização de manifestos.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from accent_forge.api.exceptions import ConflictError, NotFoundError, ValidationError
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.utterance import Label, Portion, UtteranceRecord
from accent_forge.repositories.implementations.jsonl_manifest_repository import JsonlManifestRepository
from accent_forge.services.randomness import rng_for

logger = logging.getLogger(__name__)

GROUP_FIELDS = ("label", "language", "source", "portion")

# nome -> (porções combinadas, subamostrar até o tamanho da porção I)
CONFIGURATIONS: Dict[str, Tuple[Tuple[str, ...], bool]] = {
    "I": (("I",), False),
    "I+II(Eng)": (("I", "II_eng"), True),
    "I+II(Mix)": (("I", "II_mix"), True),
    "I+II(Ds)": (("I", "II_eng", "II_mix"), True),
    "I+II(Full)": (("I", "II_eng", "II_mix"), False),
    "I+III": (("I", "III"), False),
    "I+II+III": (("I", "II_eng", "II_mix", "III"), False),
}


def allocate(class_counts: Dict[Label, int], target: int) -> Dict[Label, int]:
    """
    Distribui `target` registros entre as classes proporcionalmente (maiores restos).

    Cada classe recebe floor(n_c * target / N) ou esse valor + 1.
    """
    total = sum(class_counts.values())
    if total == 0:
        return {label: 0 for label in class_counts}
    quotas = {label: divmod(n * target, total) for label, n in class_counts.items()}
    allocation = {label: q for label, (q, _) in quotas.items()}
    missing = target - sum(allocation.values())
    order = sorted(class_counts, key=lambda label: (-quotas[label][1], label.value))
    for label in order[:missing]:
        allocation[label] += 1
    return allocation


def _by_label(records: Iterable[UtteranceRecord]) -> Dict[Label, List[UtteranceRecord]]:
    groups: Dict[Label, List[UtteranceRecord]] = {label: [] for label in Label}
    for record in records:
        groups[record.label].append(record)
    for label in groups:
        groups[label].sort(key=lambda r: r.utt_id)
    return groups


def _sorted(records: Iterable[UtteranceRecord]) -> List[UtteranceRecord]:
    return sorted(records, key=lambda r: r.utt_id)


class ManifestService:
    """
    Serviço responsável pelas operações sobre manifestos.

    Todas as operações são puras dado (entrada, seed): manifestos são valores
    imutáveis e cada sorteio usa um fluxo pseudoaleatório nomeado.

    Attributes:
        manifest_repository: Repositório de persistência de manifestos
    """

    def __init__(self, manifest_repository: JsonlManifestRepository):
        self.manifest_repository = manifest_repository

    def load_manifest(self, path: Path, name: Optional[str] = None) -> Manifest:
        """Carrega um manifesto do disco (ordem do arquivo preservada)."""
        return self.manifest_repository.load(path, name=name)

    def save_manifest(self, manifest: Manifest, path: Path) -> None:
        """Salva um manifesto no disco."""
        self.manifest_repository.save(manifest, path)

    def split(self, manifest: Manifest, ratio_train: int, ratio_valid: int, seed: int) -> Tuple[Manifest, Manifest]:
        """
        Divide o manifesto em treino e validação, estratificado por rótulo.

        O tamanho do treino é arredondado para baixo: |treino| = floor(N * r_t / (r_t + r_v)),
        e o resto vai para a validação. Com N = 638.021 e 4:1, 638.021 * 4 / 5 = 510.416,8,
        logo 510.416 registros de treino e 127.605 de validação. Esse total é repartido
        entre os rótulos por maiores restos, mantendo a proporção de cada classe.

        Args:
            manifest: Manifesto de entrada
            ratio_train: Parte do treino (ex: 4)
            ratio_valid: Parte da validação (ex: 1)
            seed: Seed do sorteio

        Returns:
            Tuple[Manifest, Manifest]: (treino, validação), ordenados por utt_id

        Raises:
            ValidationError: Se a proporção não for positiva ou o manifesto estiver vazio
        """
        if ratio_train <= 0 or ratio_valid <= 0:
            raise ValidationError("as partes da proporção devem ser positivas", "ratio")
        if len(manifest) == 0:
            raise ValidationError("não é possível dividir um manifesto vazio", "manifest")

        n_train = len(manifest) * ratio_train // (ratio_train + ratio_valid)
        groups = _by_label(manifest)
        allocation = allocate({label: len(rs) for label, rs in groups.items()}, n_train)

        train, valid = [], []
        for label, records in groups.items():
            order = rng_for(seed, "split", label.value).permutation(len(records))
            k = allocation[label]
            train.extend(records[i] for i in order[:k])
            valid.extend(records[i] for i in order[k:])

        logger.info("split name=%s train=%d valid=%d seed=%d", manifest.name, len(train), len(valid), seed)
        return (
            manifest.with_records(_sorted(train), f"{manifest.name}-train"),
            manifest.with_records(_sorted(valid), f"{manifest.name}-valid"),
        )

    def downsample(self, manifest: Manifest, target_size: int, seed: int) -> Manifest:
        """
        Subamostra o manifesto para exatamente `target_size` registros,
        preservando a proporção de rótulos (±1 por classe).

        Raises:
            ValidationError: Se o alvo for maior que a entrada ou não positivo
        """
        if target_size <= 0:
            raise ValidationError("tamanho alvo deve ser positivo", "target_size")
        if target_size > len(manifest):
            raise ValidationError(
                f"tamanho alvo {target_size} maior que o manifesto ({len(manifest)})", "target_size"
            )
        groups = _by_label(manifest)
        allocation = allocate({label: len(rs) for label, rs in groups.items()}, target_size)

        kept = []
        for label, records in groups.items():
            order = rng_for(seed, "downsample", label.value).permutation(len(records))
            kept.extend(records[i] for i in order[: allocation[label]])

        logger.info("downsample name=%s from=%d to=%d seed=%d", manifest.name, len(manifest), target_size, seed)
        return manifest.with_records(_sorted(kept), f"{manifest.name}-ds")

    def merge(self, manifests: Sequence[Manifest], name: str) -> Manifest:
        """
        Concatena manifestos preservando a ordem de entrada.

        Raises:
            ValidationError: Se a lista estiver vazia
            ConflictError: Se um utt_id aparecer em mais de um manifesto
        """
        if not manifests:
            raise ValidationError("nenhum manifesto para juntar", "manifests")
        roots = {m.root for m in manifests}
        same_root = len(roots) == 1
        owner: Dict[str, str] = {}
        records = []
        for manifest in manifests:
            for record in manifest:
                if record.utt_id in owner:
                    raise ConflictError(
                        f"utt_id '{record.utt_id}' presente em '{owner[record.utt_id]}' e '{manifest.name}'",
                        record.utt_id,
                    )
                owner[record.utt_id] = manifest.name
                if not same_root:
                    record = record.replace(audio_path=str(manifest.resolve(record)))
                records.append(record)
        return Manifest(records, name, manifests[0].root if same_root else None)

    def filter(self, manifest: Manifest, name: Optional[str] = None, exclude_portions: Iterable[str] = (), **fields) -> Manifest:
        """
        Seleciona registros cujos campos coincidem com os valores dados.

        Args:
            manifest: Manifesto de entrada
            name: Nome do manifesto resultante
            exclude_portions: Porções descartadas (ex: "test")
            fields: label / language / source / portion
        """
        unknown = set(fields) - set(GROUP_FIELDS)
        if unknown:
            raise ValidationError(f"campos de filtro desconhecidos: {sorted(unknown)}", "filter")
        excluded = {Portion(p) for p in exclude_portions}

        def keep(record: UtteranceRecord) -> bool:
            if record.portion in excluded:
                return False
            return all(_field_value(record, key) == str(value) for key, value in fields.items() if value is not None)

        return manifest.with_records([r for r in manifest if keep(r)], name)

    def summarize(self, manifest: Manifest, group_by: Sequence[str] = ()) -> pd.DataFrame:
        """
        Conta bona fide / spoof / total por grupo.

        Args:
            manifest: Manifesto de entrada
            group_by: Subconjunto de {label, language, source, portion}

        Returns:
            pd.DataFrame: Colunas [*group_by, bona_fide, spoof, total]
        """
        group_by = list(group_by)
        invalid = [g for g in group_by if g not in GROUP_FIELDS]
        if invalid:
            raise ValidationError(f"agrupamento inválido: {invalid}", "group_by")
        columns = group_by + [Label.BONA_FIDE.value, Label.SPOOF.value, "total"]
        if len(manifest) == 0:
            return pd.DataFrame(columns=columns)

        frame = pd.DataFrame({key: [_field_value(r, key) for r in manifest] for key in GROUP_FIELDS})
        if group_by:
            counts = frame.groupby(group_by + ["label"]).size().unstack("label", fill_value=0)
        else:
            counts = frame.groupby(lambda _: 0)["label"].value_counts().unstack("label", fill_value=0)
        for label in Label:
            if label.value not in counts.columns:
                counts[label.value] = 0
        counts = counts[[Label.BONA_FIDE.value, Label.SPOOF.value]].astype(int)
        counts["total"] = counts[Label.BONA_FIDE.value] + counts[Label.SPOOF.value]
        table = counts.reset_index() if group_by else counts.reset_index(drop=True)
        table.columns.name = None
        return table[columns].sort_values(group_by).reset_index(drop=True) if group_by else table[columns]

    def compose_configuration(
        self,
        name: str,
        portions: Dict[str, Manifest],
        seed: int,
        ratio: Tuple[int, int] = (4, 1),
    ) -> Tuple[Manifest, Manifest]:
        """
        Monta uma das configurações de treino (I, I+II (Eng), ..., I+II+III).

        Registros de avaliação (porção "test") são descartados; as configurações
        Eng/Mix/Ds são subamostradas até o tamanho treinável da porção I antes da divisão.

        Args:
            name: Nome da configuração (espaços e caixa ignorados)
            portions: Manifestos por chave I, II_eng, II_mix, III
            seed: Seed de subamostragem e divisão
            ratio: Proporção treino:validação

        Returns:
            Tuple[Manifest, Manifest]: (treino, validação)

        Raises:
            NotFoundError: Configuração desconhecida ou porção ausente
        """
        key = _configuration_key(name)
        if key is None:
            raise NotFoundError("Configuração", name)
        parts, downsampled = CONFIGURATIONS[key]
        missing = [p for p in parts if p not in portions]
        if missing:
            raise NotFoundError("Porção", ", ".join(missing))

        trainable = [self.filter(portions[p], exclude_portions=["test"]) for p in parts]
        combined = self.merge(trainable, key)
        if downsampled:
            combined = self.downsample(combined, len(trainable[0]), seed)
            combined = combined.with_records(combined.records, key)
        logger.info("compose configuration=%s records=%d downsampled=%s", key, len(combined), downsampled)
        return self.split(combined, ratio[0], ratio[1], seed)


def _field_value(record: UtteranceRecord, key: str) -> str:
    value = getattr(record, key)
    return value.value if hasattr(value, "value") else str(value)


def _configuration_key(name: str) -> Optional[str]:
    normalized = name.replace(" ", "").lower()
    for key in CONFIGURATIONS:
        if key.lower() == normalized:
            return key
    return None
