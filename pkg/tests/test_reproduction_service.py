import json

import pytest

from accent_forge.api.exceptions import NotFoundError, ReproductionMismatchError, ValidationError
from accent_forge.services.reference_loader import REFERENCE_FILE, ReferenceLoader
from accent_forge.services.reproduction_service import (
    PUBLISHED_TOLERANCE,
    STATUS_FAILED,
    STATUS_KNOWN_DEVIATION,
    STATUS_PASSED,
    ReproductionService,
)

KNOWN_DEVIATIONS = {"accent_expansion/3_vs_1", "accent_expansion/11_vs_10"}


@pytest.fixture(scope="module")
def table():
    return ReproductionService().reproduce_tables().set_index("entry")


@pytest.fixture
def reference_data():
    with open(REFERENCE_FILE, encoding="utf-8") as f:
        return json.load(f)


def _service(data, tmp_path):
    path = tmp_path / "reference.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return ReproductionService(ReferenceLoader.load(str(path)))


def _actual(table, entry):
    return table.loc[entry, "actual"]


def test_every_published_value_is_reproduced(table):
    assert table["passed"].all()
    ReproductionService.check(table.reset_index())


def test_entry_count(table):
    assert len(table) == 7 + 1 + 8 + 4


def test_tolerance_is_fixed(table):
    assert (table["tolerance"] == PUBLISHED_TOLERANCE).all()
    assert PUBLISHED_TOLERANCE == 0.05


def test_only_named_entries_deviate(table):
    assert set(table.index[table["status"] == STATUS_KNOWN_DEVIATION]) == KNOWN_DEVIATIONS
    others = table.drop(index=list(KNOWN_DEVIATIONS))
    assert (others["status"] == STATUS_PASSED).all()
    assert ((others["actual"] - others["expected"]).abs() <= 0.05).all()


def test_language_mismatch_values(table):
    assert _actual(table, "language_mismatch/SENet-34") == pytest.approx(28.77, abs=0.01)
    assert _actual(table, "language_mismatch/average") == pytest.approx(20.1, abs=0.05)


def test_accent_expansion_values(table):
    assert _actual(table, "accent_expansion/7_vs_6") == pytest.approx(-28.5, abs=0.05)
    assert _actual(table, "accent_expansion/13_vs_12") == pytest.approx(-12.1, abs=0.05)
    assert _actual(table, "accent_expansion/11_vs_10") == pytest.approx(-16.76, abs=0.01)
    assert _actual(table, "accent_expansion/3_vs_1") == pytest.approx(-15.55, abs=0.01)


def test_singing_values(table):
    assert _actual(table, "singing/13_vs_12") == pytest.approx(2.8, abs=0.05)
    assert _actual(table, "singing/4_vs_1") == pytest.approx(-14.8, abs=0.05)


def test_value_off_by_half_a_point_fails(reference_data, tmp_path):
    comparisons = reference_data["accent_expansion"]["comparisons"]
    row = next(c for c in comparisons if (c["system"], c["benchmark"]) == (13, 12))
    row["relative_change"] = -12.6
    service = _service(reference_data, tmp_path)
    table = service.reproduce_tables().set_index("entry")
    assert table.loc["accent_expansion/13_vs_12", "status"] == STATUS_FAILED
    with pytest.raises(ReproductionMismatchError) as err:
        service.check(table.reset_index())
    assert [m["entry"] for m in err.value.mismatches] == ["accent_expansion/13_vs_12"]


def test_altered_reference_is_reported(reference_data, tmp_path):
    reference_data["accent_expansion"]["comparisons"][0]["relative_change"] = -9.0
    service = _service(reference_data, tmp_path)
    with pytest.raises(ReproductionMismatchError) as err:
        service.check(service.reproduce_tables())
    assert [m["entry"] for m in err.value.mismatches] == ["accent_expansion/2_vs_1"]


def test_deviation_must_match_recorded_value(reference_data, tmp_path):
    for deviation in reference_data["known_deviations"]:
        if deviation["entry"] == "accent_expansion/11_vs_10":
            deviation["recomputed"] = -16.9
    table = _service(reference_data, tmp_path).reproduce_tables().set_index("entry")
    assert table.loc["accent_expansion/11_vs_10", "status"] == STATUS_FAILED


def test_without_named_deviations_both_entries_fail(reference_data, tmp_path):
    del reference_data["known_deviations"]
    table = _service(reference_data, tmp_path).reproduce_tables().set_index("entry")
    assert set(table.index[~table["passed"]]) == KNOWN_DEVIATIONS


def test_missing_reference_file(tmp_path):
    with pytest.raises(NotFoundError):
        ReferenceLoader.load(str(tmp_path / "absent.json"))


def test_malformed_reference_file(tmp_path):
    path = tmp_path / "reference.json"
    path.write_text(json.dumps({"language_mismatch": {}}), encoding="utf-8")
    with pytest.raises(ValidationError):
        ReferenceLoader.load(str(path))
