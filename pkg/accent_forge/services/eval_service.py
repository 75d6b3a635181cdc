"""
Serviço de avaliação.
Contém o cálculo de EER, as métricas de variação relativa, o relatório por idioma
e a emissão de tabelas, resumo e gráfico radar.
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import matplotlib
import numpy as np
import pandas as pd

from accent_forge.api.exceptions import BusinessRuleError, ValidationError
from accent_forge.business_model.manifest import Manifest
from accent_forge.business_model.score import EvalReport, GroupResult, ScoreRecord
from accent_forge.business_model.utterance import Label

logger = logging.getLogger(__name__)

UNDEFINED = "undefined"


# =============================================================================
# EER
# =============================================================================

def det_points(bona: np.ndarray, spoof: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Taxas de erro em cada limiar candidato.

    Candidatos: -inf, os pontos médios entre scores distintos consecutivos e +inf.
    FRR = fração de bona fide abaixo do limiar; FAR = fração de spoof no limiar ou acima.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: (frr, far, limiares), com limiares crescentes
    """
    bona = np.sort(np.asarray(bona, dtype=np.float64))
    spoof = np.sort(np.asarray(spoof, dtype=np.float64))
    distinct = np.unique(np.concatenate([bona, spoof]))

    below_bona = np.searchsorted(bona, distinct, side="right")
    below_spoof = np.searchsorted(spoof, distinct, side="right")
    frr = np.concatenate([[0.0], below_bona / bona.size])
    far = np.concatenate([[1.0], 1.0 - below_spoof / spoof.size])
    thresholds = np.concatenate([[-np.inf], (distinct[:-1] + distinct[1:]) / 2.0, [np.inf]])
    return frr, far, thresholds


def compute_eer_arrays(bona: Sequence[float], spoof: Sequence[float]) -> Tuple[float, float]:
    """
    EER com interpolação linear entre o par de limiares em que FRR cruza FAR.

    Returns:
        Tuple[float, float]: (eer em [0, 1], limiar)

    Raises:
        BusinessRuleError: Se faltar uma das classes
    """
    bona = np.asarray(bona, dtype=np.float64)
    spoof = np.asarray(spoof, dtype=np.float64)
    if bona.size == 0 or spoof.size == 0:
        raise BusinessRuleError("EER exige ao menos um registro de cada classe")

    frr, far, thresholds = det_points(bona, spoof)
    gap = far - frr
    k = int(np.argmax(gap <= 0))
    alpha = gap[k - 1] / (gap[k - 1] - gap[k])
    eer = frr[k - 1] + alpha * (frr[k] - frr[k - 1])

    low, high = thresholds[k - 1], thresholds[k]
    if np.isfinite(low) and np.isfinite(high):
        threshold = low + alpha * (high - low)
    elif np.isfinite(low) or np.isfinite(high):
        threshold = low if np.isfinite(low) else high
    else:
        threshold = float(bona[0])
    return float(min(1.0, max(0.0, eer))), float(threshold)


def compute_eer(scores: Iterable[ScoreRecord]) -> Tuple[float, float]:
    """
    EER de uma lista de scores rotulados (maior = mais bona fide).

    Args:
        scores: ScoreRecords com label preenchido

    Returns:
        Tuple[float, float]: (eer, limiar)

    Raises:
        ValidationError: Score sem rótulo
        BusinessRuleError: Entrada com uma só classe
    """
    bona, spoof = [], []
    for record in scores:
        if record.label is None:
            raise ValidationError(f"score de '{record.utt_id}' sem rótulo", "label")
        (bona if record.label == Label.BONA_FIDE else spoof).append(record.score)
    return compute_eer_arrays(bona, spoof)


# =============================================================================
# RELATIVE CHANGE METRICS
# =============================================================================

def relative_change(eer_ref: float, eer_new: float) -> float:
    """
    Variação relativa em %: 100 * (novo - referência) / referência.

    Raises:
        ValidationError: Se a referência não for positiva
    """
    if eer_ref <= 0:
        raise ValidationError("EER de referência deve ser positivo", "eer_ref")
    return 100.0 * (eer_new - eer_ref) / eer_ref


def avg_relative_reduction(benchmark: Sequence[float], treated: Sequence[float]) -> float:
    """
    Média, sobre os conjuntos de teste, da variação relativa de cada par
    (negativo = redução).

    Raises:
        ValidationError: Listas de tamanhos diferentes, vazias ou referência não positiva
    """
    if len(benchmark) != len(treated):
        raise ValidationError(
            f"listas desalinhadas: {len(benchmark)} referências e {len(treated)} tratados", "treated"
        )
    if not benchmark:
        raise ValidationError("nenhum conjunto de teste", "benchmark")
    return float(np.mean([relative_change(b, t) for b, t in zip(benchmark, treated)]))


def average_relative_increase(rows: Sequence[Tuple[float, float]]) -> float:
    """Média da coluna de aumento relativo de pares (EER casado, EER descasado)."""
    if not rows:
        raise ValidationError("nenhuma linha", "rows")
    return float(np.mean([relative_change(ref, new) for ref, new in rows]))


def aggregate_runs(values: Sequence[float]) -> Dict[str, float]:
    """Média e desvio padrão amostral de repetições de uma execução."""
    if not values:
        raise ValidationError("nenhuma repetição", "values")
    array = np.asarray(values, dtype=np.float64)
    std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
    return {"mean": float(array.mean()), "std": std, "n": int(array.size)}


def best_of_runs(reports: Sequence[EvalReport], group_by: str = "language") -> Dict[str, Optional[float]]:
    """Menor EER por grupo entre várias execuções; grupos nunca definidos ficam None."""
    best: Dict[str, Optional[float]] = {}
    for report in reports:
        for key, eer in report.eer_by(group_by).items():
            if eer is None:
                best.setdefault(key, None)
            elif best.get(key) is None or eer < best[key]:
                best[key] = eer
    return dict(sorted(best.items()))


# =============================================================================
# REPORTS
# =============================================================================

def join_scores(scores: Iterable[ScoreRecord], manifest: Manifest) -> List[ScoreRecord]:
    """
    Associa cada score ao rótulo do registro do manifesto.

    Raises:
        ValidationError: utt_id ausente no manifesto
    """
    joined = []
    for record in scores:
        entry = manifest.get(record.utt_id)
        if entry is None:
            raise ValidationError(f"utt_id '{record.utt_id}' não existe no manifesto '{manifest.name}'", "utt_id")
        joined.append(ScoreRecord(record.utt_id, record.score, entry.label))
    return joined


def _group_result(group_by: str, key: str, scores: List[ScoreRecord]) -> GroupResult:
    n_bona = sum(1 for s in scores if s.label == Label.BONA_FIDE)
    n_spoof = len(scores) - n_bona
    if n_bona == 0 or n_spoof == 0:
        return GroupResult(group_by, key, n_bona, n_spoof)
    eer, threshold = compute_eer(scores)
    return GroupResult(group_by, key, n_bona, n_spoof, eer, threshold)


def per_language_report(
    scores: Iterable[ScoreRecord],
    manifest: Manifest,
    group_by: Sequence[str] = ("language",),
    metadata: Optional[Dict] = None,
) -> EvalReport:
    """
    EER geral (scores agrupados) e por grupo.

    Grupos com uma só classe ficam com EER indefinido em vez de serem omitidos.

    Args:
        scores: Scores da execução
        manifest: Manifesto com os rótulos e metadados
        group_by: Campos de agrupamento (padrão: idioma)
        metadata: Identificação do modelo, manifesto e configuração

    Returns:
        EvalReport: Relatório com grupos em ordem de chave
    """
    joined = join_scores(scores, manifest)
    overall = _group_result("overall", "all", joined)

    groups: List[GroupResult] = []
    for field in group_by:
        buckets: Dict[str, List[ScoreRecord]] = {}
        for record in joined:
            value = getattr(manifest.get(record.utt_id), field)
            key = value.value if hasattr(value, "value") else str(value)
            buckets.setdefault(key, []).append(record)
        groups.extend(_group_result(field, key, buckets[key]) for key in sorted(buckets))

    meta = {"manifest": manifest.name, "n_scores": len(joined)}
    meta.update(metadata or {})
    logger.info(
        "report manifest=%s overall_eer=%s groups=%d", manifest.name, overall.eer, len(groups)
    )
    return EvalReport(overall=overall, groups=groups, metadata=meta)


def compare_reports(report: EvalReport, benchmark: EvalReport) -> List[Dict]:
    """
    Variação relativa, em %, de cada grupo definido nos dois relatórios (inclui o geral).
    O resultado também é guardado em report.relative_changes.
    """
    reference = {(g.group_by, g.key): g.eer for g in [benchmark.overall, *benchmark.groups]}
    changes = []
    for result in [report.overall, *report.groups]:
        eer_ref = reference.get((result.group_by, result.key))
        if not result.defined or eer_ref is None or eer_ref <= 0:
            continue
        changes.append({
            "group_by": result.group_by,
            "key": result.key,
            "eer_benchmark": eer_ref,
            "eer": result.eer,
            "relative_change": relative_change(eer_ref, result.eer),
        })
    report.relative_changes = changes
    return changes


def report_table(report: EvalReport) -> pd.DataFrame:
    rows = []
    for result in [report.overall, *report.groups]:
        rows.append({
            "group_by": result.group_by,
            "key": result.key,
            "n_bona_fide": result.n_bona_fide,
            "n_spoof": result.n_spoof,
            "eer": f"{result.eer:.6f}" if result.defined else UNDEFINED,
            "eer_percent": f"{100 * result.eer:.2f}" if result.defined else UNDEFINED,
            "threshold": UNDEFINED if result.threshold is None else f"{result.threshold:.6f}",
        })
    return pd.DataFrame(rows, columns=["group_by", "key", "n_bona_fide", "n_spoof", "eer", "eer_percent", "threshold"])


def radar_table(report: EvalReport, group_by: str = "language") -> pd.DataFrame:
    """Dados do gráfico radar: uma linha por idioma, eixos em ordem alfabética."""
    eers = report.eer_by(group_by)
    return pd.DataFrame(
        [{"language": key, "eer": UNDEFINED if eers[key] is None else f"{eers[key]:.6f}"} for key in sorted(eers)],
        columns=["language", "eer"],
    )


def plot_radar(table: pd.DataFrame, path: Path, title: str = "") -> None:
    """Desenha o radar (EER em %) em SVG; eixos indefinidos aparecem em zero."""
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = list(table["language"])
    values = [0.0 if v == UNDEFINED else 100.0 * float(v) for v in table["eer"]]
    if not labels:
        return
    angles = np.linspace(0.0, 2 * math.pi, len(labels), endpoint=False).tolist()

    fig, ax = plt.subplots(figsize=(5, 5), subplot_kw={"polar": True})
    ax.plot(angles + angles[:1], values + values[:1], linewidth=1.5)
    ax.fill(angles + angles[:1], values + values[:1], alpha=0.2)
    ax.set_xticks(angles)
    ax.set_xticklabels(labels)
    if title:
        ax.set_title(title)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_report(report: EvalReport, out_dir: Path, group_by: str = "language") -> Dict[str, Path]:
    """
    Escreve report.tsv, summary.json, radar.tsv e radar.svg.

    Returns:
        Dict[str, Path]: Caminho de cada artefato
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "table": out_dir / "report.tsv",
        "summary": out_dir / "summary.json",
        "radar_data": out_dir / "radar.tsv",
        "radar_figure": out_dir / "radar.svg",
    }
    report_table(report).to_csv(paths["table"], sep="\t", index=False, lineterminator="\n")
    paths["summary"].write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    radar = radar_table(report, group_by)
    radar.to_csv(paths["radar_data"], sep="\t", index=False, lineterminator="\n")
    plot_radar(radar, paths["radar_figure"], report.metadata.get("model", ""))
    return paths
