"""
Controller de avaliação.
Define os subcomandos `score` (checkpoint -> arquivo de scores) e `eval`
(scores -> relatório por idioma).
"""

from pathlib import Path

import click

from accent_forge.api.response import CliResponse
from accent_forge.controllers.context import CliState
from accent_forge.services.eval_service import compare_reports, per_language_report, report_table, write_report
from accent_forge.services.manifest_service import GROUP_FIELDS, ManifestService
from accent_forge.services.scoring_service import ScoringService, load_scores


def create_eval_commands(manifest_service: ManifestService) -> list:
    """
    Registra os subcomandos de pontuação e avaliação.

    Args:
        manifest_service: Leitura dos manifestos avaliados

    Returns:
        list: Comandos `score` e `eval`
    """

    @click.command("score")
    @click.option("--checkpoint", type=click.Path(path_type=Path), required=True)
    @click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), required=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True, help="Arquivo de scores")
    @click.option("--model-id", default=None)
    @click.pass_obj
    def score(state: CliState, checkpoint, manifest_path, out, model_id):
        """Pontua cada registro resolvível: log p(bona fide) - log p(spoof)."""
        service = ScoringService(state.config.frontend, state.config.eval)
        result = service.score_checkpoint(checkpoint, manifest_service.load_manifest(manifest_path), out, model_id)
        return CliResponse.document({"scores": len(result.scores), "excluded": len(result.excluded), "out": str(out)})

    @click.command("eval")
    @click.option("--scores", "scores_path", type=click.Path(path_type=Path), required=True)
    @click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), required=True)
    @click.option("--by", "group_by", type=click.Choice(GROUP_FIELDS), multiple=True)
    @click.option("--benchmark", "benchmark_path", type=click.Path(path_type=Path), default=None,
                  help="Scores do sistema de referência para a variação relativa")
    @click.option("--out", type=click.Path(path_type=Path), default=None, help="Diretório do relatório")
    @click.pass_obj
    def evaluate(state: CliState, scores_path, manifest_path, group_by, benchmark_path, out):
        """EER geral e por grupo; grava tabela, resumo e dados do radar."""
        group_by = list(group_by) or list(state.config.eval.group_by)
        manifest = manifest_service.load_manifest(manifest_path)
        scores, header = load_scores(scores_path)
        metadata = {"model": header.get("model", ""), "config_hash": state.config.config_hash}
        report = per_language_report(scores, manifest, group_by, metadata)
        if benchmark_path is not None:
            benchmark_scores, _ = load_scores(benchmark_path)
            compare_reports(report, per_language_report(benchmark_scores, manifest, group_by))
        if out is not None:
            write_report(report, out, group_by[0])
        return CliResponse.table(report_table(report))

    return [score, evaluate]
