"""
Controller de treino.
Define o subcomando `train`.
"""

from pathlib import Path

import click

from accent_forge.api.response import CliResponse
from accent_forge.controllers.context import CliState
from accent_forge.services.manifest_service import ManifestService
from accent_forge.services.trainer_service import TrainerService


def create_train_commands(manifest_service: ManifestService) -> click.Command:
    """
    Registra o subcomando de treino.

    Args:
        manifest_service: Leitura dos manifestos de treino e validação

    Returns:
        click.Command: Comando `train`
    """

    @click.command("train")
    @click.option("--train", "train_path", type=click.Path(path_type=Path), required=True)
    @click.option("--valid", "valid_path", type=click.Path(path_type=Path), required=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True, help="Diretório do checkpoint")
    @click.pass_obj
    def train(state: CliState, train_path, valid_path, out):
        """Treina o classificador e grava checkpoint.pt e history.json."""
        service = TrainerService(state.config)
        checkpoint, history = service.train_from_manifests(
            manifest_service.load_manifest(train_path), manifest_service.load_manifest(valid_path), out
        )
        return CliResponse.document({
            "checkpoint": str(checkpoint),
            "best_epoch": history.best_epoch,
            "best_valid_eer": history.best_metric,
            "epochs": history.validations,
            "stop_reason": history.stop_reason,
            "config_hash": state.config.config_hash,
        })

    return train
