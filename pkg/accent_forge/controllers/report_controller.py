"""
Controller de relatórios.
Define `report reproduce` (colunas derivadas a partir dos EERs empacotados)
e `report best-of` (melhor de várias execuções por idioma).
"""

from pathlib import Path

import click
import pandas as pd

from accent_forge.api.response import CliResponse
from accent_forge.services.eval_service import (
    UNDEFINED,
    aggregate_runs,
    best_of_runs,
    per_language_report,
    plot_radar,
)
from accent_forge.services.manifest_service import ManifestService
from accent_forge.services.reference_loader import ReferenceLoader
from accent_forge.services.reproduction_service import ReproductionService
from accent_forge.services.scoring_service import load_scores


def create_report_commands(manifest_service: ManifestService, reproduction_service: ReproductionService) -> click.Group:
    """
    Registra os subcomandos de relatório.

    Args:
        manifest_service: Leitura dos manifestos avaliados
        reproduction_service: Serviço com os valores de referência empacotados

    Returns:
        click.Group: Grupo `report` configurado
    """

    @click.group("report")
    def report():
        """Relatórios agregados."""

    @report.command("reproduce")
    @click.option("--reference", type=click.Path(path_type=Path), default=None, help="Arquivo JSON alternativo")
    @click.option("--out", type=click.Path(path_type=Path), default=None)
    def reproduce(reference, out):
        """Recalcula as variações relativas publicadas e falha se alguma divergir."""
        service = reproduction_service
        if reference is not None:
            service = ReproductionService(ReferenceLoader.load(str(reference)))
        table = service.reproduce_tables()
        CliResponse.table(table, out)
        service.check(table)
        return 0

    @report.command("best-of")
    @click.option("--scores", "scores_paths", type=click.Path(path_type=Path), multiple=True, required=True)
    @click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), required=True)
    @click.option("--out", type=click.Path(path_type=Path), default=None, help="Diretório do radar")
    def best_of(scores_paths, manifest_path, out):
        """Menor EER por idioma entre execuções repetidas, com média e desvio do EER geral."""
        manifest = manifest_service.load_manifest(manifest_path)
        reports = [per_language_report(load_scores(p)[0], manifest) for p in scores_paths]
        best = best_of_runs(reports)
        overall = [r.overall.eer for r in reports if r.overall.defined]
        table = pd.DataFrame(
            [{"language": k, "eer": UNDEFINED if v is None else f"{v:.6f}"} for k, v in best.items()],
            columns=["language", "eer"],
        )
        if out is not None:
            out = Path(out)
            out.mkdir(parents=True, exist_ok=True)
            table.to_csv(out / "radar.tsv", sep="\t", index=False, lineterminator="\n")
            plot_radar(table, out / "radar.svg", "best of runs")
        return CliResponse.document({
            "runs": len(reports),
            "overall": aggregate_runs(overall) if overall else None,
            "best_by_language": best,
        })

    return report
