"""
Serviço de reprodução das colunas derivadas.
Recalcula as variações relativas publicadas a partir dos EERs empacotados,
sem nenhum treino.
"""

import logging
from typing import Dict, List, Optional

import pandas as pd

from accent_forge.api.exceptions import ReproductionMismatchError, ValidationError
from accent_forge.business_model.reference import ReferenceValues
from accent_forge.services.eval_service import average_relative_increase, avg_relative_reduction, relative_change
from accent_forge.services.reference_loader import ReferenceLoader

logger = logging.getLogger(__name__)

# as colunas derivadas são publicadas com uma casa decimal
PUBLISHED_TOLERANCE = 0.05
COLUMNS = ["entry", "expected", "actual", "tolerance", "status", "passed"]

STATUS_PASSED = "passed"
STATUS_KNOWN_DEVIATION = "known_deviation"
STATUS_FAILED = "failed"


class ReproductionService:
    """
    Confere as colunas derivadas contra os valores de referência.

    Toda entrada é comparada com tolerância fixa de ±0.05. Uma entrada listada em
    `known_deviations` que não atinge o valor publicado ainda precisa bater com o
    valor recalculado registrado, e sai com status próprio.

    Attributes:
        reference: Valores publicados (EERs e colunas derivadas)
    """

    def __init__(self, reference: Optional[ReferenceValues] = None):
        self.reference = reference or ReferenceLoader.load()

    def _status(self, entry: str, expected: float, actual: float) -> str:
        if abs(actual - expected) <= PUBLISHED_TOLERANCE:
            return STATUS_PASSED
        deviation = self.reference.known_deviations.get(entry)
        if deviation is not None and abs(actual - deviation.recomputed) <= PUBLISHED_TOLERANCE:
            logger.warning(
                "known deviation entry=%s expected=%s actual=%.4f", entry, expected, actual
            )
            return STATUS_KNOWN_DEVIATION
        return STATUS_FAILED

    def _entry(self, entry: str, expected: float, actual: float) -> Dict:
        status = self._status(entry, expected, actual)
        return {
            "entry": entry,
            "expected": expected,
            "actual": round(actual, 4),
            "tolerance": PUBLISHED_TOLERANCE,
            "status": status,
            "passed": status != STATUS_FAILED,
        }

    def mismatch_entries(self) -> List[Dict]:
        rows = self.reference.mismatch_rows
        entries = []
        for row in rows:
            pair = (row.eer_english, row.eer_mixed)
            entries.append(self._entry(
                f"language_mismatch/{row.model}", row.relative_increase, relative_change(*pair)
            ))
        pairs = [(row.eer_english, row.eer_mixed) for row in rows]
        entries.append(self._entry(
            "language_mismatch/average",
            self.reference.average_relative_increase,
            average_relative_increase(pairs),
        ))
        return entries

    def expansion_entries(self) -> List[Dict]:
        systems = self.reference.systems
        entries = []
        for comparison in self.reference.comparisons:
            try:
                benchmark = systems[comparison.benchmark].eers
                treated = systems[comparison.system].eers
            except KeyError as e:
                raise ValidationError(f"sistema {e} ausente da referência", "systems") from e
            if len(benchmark) != len(self.reference.test_sets):
                raise ValidationError(
                    f"sistema {comparison.benchmark}: {len(benchmark)} EERs para {len(self.reference.test_sets)} conjuntos",
                    "eers",
                )
            entries.append(self._entry(
                f"accent_expansion/{comparison.system}_vs_{comparison.benchmark}",
                comparison.relative_change,
                avg_relative_reduction(benchmark, treated),
            ))
        return entries

    def singing_entries(self) -> List[Dict]:
        entries = []
        for comparison in self.reference.singing:
            pair = (comparison.eer_benchmark, comparison.eer_treated)
            entries.append(self._entry(
                f"singing/{comparison.system}_vs_{comparison.benchmark}",
                comparison.relative_change,
                relative_change(*pair),
            ))
        return entries

    def reproduce_tables(self) -> pd.DataFrame:
        """
        Recalcula todas as colunas derivadas.

        Returns:
            pd.DataFrame: Uma linha por valor com entry, expected, actual, tolerance, status e passed
        """
        entries = self.mismatch_entries() + self.expansion_entries() + self.singing_entries()
        table = pd.DataFrame(entries, columns=COLUMNS)
        logger.info(
            "reproduction entries=%d known_deviations=%d failed=%d",
            len(table),
            int((table["status"] == STATUS_KNOWN_DEVIATION).sum()),
            int((~table["passed"]).sum()),
        )
        return table

    @staticmethod
    def check(table: pd.DataFrame) -> None:
        """
        Raises:
            ReproductionMismatchError: Lista cada entrada fora da tolerância
        """
        failed = table[~table["passed"]]
        if not failed.empty:
            raise ReproductionMismatchError(failed[["entry", "expected", "actual"]].to_dict("records"))
