"""
Ponto de entrada do accent-forge.
Configura o logging e monta a CLI com todos os repositórios, serviços e subcomandos.
"""

import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import click

from accent_forge import __version__
from accent_forge.api.dto import RunConfig
from accent_forge.api.exceptions import AccentForgeException
from accent_forge.api.response import EXIT_OK, EXIT_RUNTIME, CliResponse
from accent_forge.repositories.implementations.jsonl_manifest_repository import JsonlManifestRepository

# Services
from accent_forge.services.manifest_service import ManifestService
from accent_forge.services.provenance import provenance_record, write_provenance
from accent_forge.services.reproduction_service import ReproductionService
from accent_forge.services.testset_service import CrossLingualSetService

# Controllers
from accent_forge.controllers.context import CliState
from accent_forge.controllers.eval_controller import create_eval_commands
from accent_forge.controllers.expand_controller import create_expand_commands
from accent_forge.controllers.manifest_controller import create_manifest_commands
from accent_forge.controllers.report_controller import create_report_commands
from accent_forge.controllers.testset_controller import create_testset_commands
from accent_forge.controllers.train_controller import create_train_commands

logger = logging.getLogger("accent_forge")

LOG_LEVEL_ENV = "ACCENT_FORGE_LOG_LEVEL"
LOG_FORMAT = "ts=%(asctime)s level=%(levelname)s logger=%(name)s msg=%(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Um único handler em stderr no logger do pacote, no formato chave=valor."""
    level = (level or os.environ.get(LOG_LEVEL_ENV) or "INFO").upper()
    package_logger = logging.getLogger("accent_forge")
    package_logger.setLevel(level)
    # o handler anterior pode apontar para um stderr já substituído
    for old in [h for h in package_logger.handlers if getattr(h, "_accent_forge", False)]:
        package_logger.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._accent_forge = True
    package_logger.addHandler(handler)


def create_cli() -> click.Group:
    """
    Factory da CLI: repositórios -> serviços -> subcomandos.

    Returns:
        click.Group: Grupo raiz `accent-forge`
    """

    @click.group("accent-forge")
    @click.version_option(__version__, prog_name="accent-forge")
    @click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
                  help="Arquivo JSON de configuração da execução")
    @click.option("--seed", type=int, default=None, help="Sobrescreve trainer.seed")
    @click.option("--deterministic", is_flag=True, default=False, help="Algoritmos determinísticos, um worker")
    @click.option("--provenance-dir", type=click.Path(path_type=Path), default=None)
    @click.pass_context
    def cli(ctx: click.Context, config_path, seed, deterministic, provenance_dir):
        """Expansão de dados por sotaques e avaliação anti-spoofing entre idiomas."""
        state = ctx.ensure_object(CliState)
        run_config = RunConfig.load(config_path)
        overrides = {}
        if seed is not None:
            overrides["seed"] = seed
        if deterministic:
            overrides["deterministic"] = True
        if overrides:
            trainer = run_config.trainer.model_copy(update=overrides)
            run_config = run_config.model_copy(update={"trainer": trainer})
        state.run_config = run_config
        state.command = ctx.invoked_subcommand
        state.provenance_dir = provenance_dir or Path(run_config.paths.provenance_dir or run_config.paths.work_dir)
        logger.debug("config loaded config_hash=%s seed=%d", run_config.config_hash, run_config.trainer.seed)

    # =========================================================================
    # INICIALIZAÇÃO DOS REPOSITÓRIOS
    # =========================================================================
    manifest_repository = JsonlManifestRepository()

    # =========================================================================
    # INICIALIZAÇÃO DOS SERVIÇOS
    # =========================================================================
    manifest_service = ManifestService(manifest_repository)
    builder = CrossLingualSetService(manifest_repository)
    reproduction_service = ReproductionService()

    # =========================================================================
    # REGISTRO DOS SUBCOMANDOS
    # =========================================================================
    cli.add_command(create_expand_commands(manifest_repository))
    cli.add_command(create_manifest_commands(manifest_service))
    cli.add_command(create_train_commands(manifest_service))
    for command in create_eval_commands(manifest_service):
        cli.add_command(command)
    cli.add_command(create_report_commands(manifest_service, reproduction_service))
    for command in create_testset_commands(manifest_service, builder):
        cli.add_command(command)
    return cli


def _record_provenance(state: CliState, argv: List[str], exit_code: int) -> None:
    if state.run_config is None or state.command is None:
        return
    status = "success" if exit_code == EXIT_OK else "failure"
    try:
        write_provenance(state.provenance_dir, provenance_record(state.command, argv, state.run_config, status, exit_code))
    except AccentForgeException as e:
        logger.warning("provenance not written reason=%s", e.message)


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Executa a CLI e devolve o código de saída.

    0 sucesso; 1 falha de execução; 2 uso inválido ou subcomando desconhecido;
    3 falha de validação. Erros saem como uma linha JSON em stderr.
    """
    configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    state = CliState()
    try:
        result = create_cli().main(args=argv, prog_name="accent-forge", standalone_mode=False, obj=state)
        exit_code = result if isinstance(result, int) else EXIT_OK
    except click.exceptions.Abort:
        CliResponse.error("execução interrompida", "ABORTED")
        exit_code = EXIT_RUNTIME
    except (click.ClickException, AccentForgeException) as e:
        exit_code = CliResponse.from_exception(e)
    except Exception as e:
        logger.exception("unexpected failure command=%s", state.command)
        exit_code = CliResponse.from_exception(e)
    _record_provenance(state, argv, exit_code)
    return exit_code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
