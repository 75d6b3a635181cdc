import json
import os

from accent_forge.api.exceptions import NotFoundError, ValidationError
from accent_forge.business_model.reference import (
    Comparison,
    ExpansionSystem,
    KnownDeviation,
    MismatchRow,
    ReferenceValues,
    SingleSetComparison,
)

REFERENCE_FILE = os.path.join(os.path.dirname(__file__), '..', 'reference_values.json')


class ReferenceLoader:
    @staticmethod
    def load(path: str = REFERENCE_FILE) -> ReferenceValues:
        if not os.path.exists(path):
            raise NotFoundError("Arquivo de valores de referência", path)
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
        try:
            mismatch = data["language_mismatch"]
            expansion = data["accent_expansion"]
            singing = data["singing"]
            systems = [ExpansionSystem.from_dict(d) for d in expansion["systems"]]
            deviations = {
                d.entry: d for d in (KnownDeviation.from_dict(item) for item in data.get("known_deviations", []))
            }
            return ReferenceValues(
                mismatch_rows=[MismatchRow.from_dict(d) for d in mismatch["rows"]],
                average_relative_increase=mismatch["average_relative_increase"],
                test_sets=list(expansion["test_sets"]),
                systems={s.system: s for s in systems},
                comparisons=[Comparison.from_dict(d) for d in expansion["comparisons"]],
                singing_test_set=singing["test_set"],
                singing=[SingleSetComparison.from_dict(d) for d in singing["comparisons"]],
                known_deviations=deviations,
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"{path}: estrutura inválida ({e})", "reference_values") from e
