"""
Controller de expansão por sotaques.
Define o subcomando `expand` e a escolha do backend de síntese.
"""

from pathlib import Path
from typing import Sequence

import click

from accent_forge.api.response import CliResponse
from accent_forge.backends.implementations.mock_synthesis_backend import MockSynthesisBackend
from accent_forge.backends.implementations.remote_synthesis_backend import RemoteSynthesisBackend
from accent_forge.backends.interfaces.synthesis_backend import SynthesisBackend
from accent_forge.business_model.tts_engine import TTSEngineSpec
from accent_forge.controllers.context import CliState
from accent_forge.repositories.implementations.jsonl_manifest_repository import JsonlManifestRepository
from accent_forge.services.accent_expand_service import (
    AccentExpandService,
    POLICIES,
    load_registry,
    load_transcripts,
    register_engines,
)

BACKENDS = ("mock", "remote")


def make_synthesis_backend(kind: str, engines: Sequence[TTSEngineSpec], mock_duration: float = 1.0) -> SynthesisBackend:
    if kind == "remote":
        return RemoteSynthesisBackend.from_env(engines)
    return MockSynthesisBackend(engines, duration_sec=mock_duration)


def create_expand_commands(manifest_repository: JsonlManifestRepository) -> click.Command:
    """
    Registra o subcomando de expansão.

    Args:
        manifest_repository: Persistência dos manifestos gerados

    Returns:
        click.Command: Comando `expand`
    """

    @click.command("expand")
    @click.option("--transcripts", type=click.Path(path_type=Path), required=True, help="Arquivo ou diretório de .txt")
    @click.option("--group", type=click.Choice(["eng", "mix"]), required=True)
    @click.option("--engines", "registry_path", default=None, help="Registro JSON (padrão: o empacotado do grupo)")
    @click.option("--policy", type=click.Choice(POLICIES), default="uniform_random", show_default=True)
    @click.option("--backend", type=click.Choice(BACKENDS), default="mock", show_default=True)
    @click.option("--workers", type=click.IntRange(min=1), default=4, show_default=True)
    @click.option("--mock-duration", type=click.FloatRange(min=0.01), default=1.0, show_default=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True)
    @click.pass_obj
    def expand(state: CliState, transcripts, group, registry_path, policy, backend, workers, mock_duration, out):
        """
        Sintetiza as transcrições com as engines do grupo e grava o manifesto spoof (porção II).
        """
        name, specs = load_registry(registry_path or group)
        registry = register_engines(specs, name)
        service = AccentExpandService(make_synthesis_backend(backend, specs, mock_duration), manifest_repository, workers)
        result = service.expand(load_transcripts(transcripts), registry, group, policy, state.seed, out)
        return CliResponse.document({
            "records": len(result.manifest),
            "failures": len(result.failures),
            "manifest": str(result.manifest_path),
            "failure_log": str(result.failures_path),
            "registry": name,
            "seed": state.seed,
        })

    return expand
