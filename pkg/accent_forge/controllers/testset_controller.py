"""
Controller dos conjuntos de teste entre idiomas.
Define os subcomandos `build-vc-cl3` e `build-tts-cl`.
"""

from pathlib import Path
from typing import List

import click

from accent_forge.api.response import CliResponse
from accent_forge.backends.implementations.mock_conversion_backend import MockConversionBackend
from accent_forge.controllers.context import CliState
from accent_forge.controllers.expand_controller import BACKENDS, make_synthesis_backend
from accent_forge.services.accent_expand_service import load_registry, register_engines
from accent_forge.services.manifest_service import ManifestService
from accent_forge.services.testset_service import CrossLingualSetService, transcripts_by_language


def create_testset_commands(manifest_service: ManifestService, builder: CrossLingualSetService) -> List[click.Command]:
    """
    Registra os subcomandos de construção de conjuntos de teste.

    Args:
        manifest_service: Leitura dos manifestos bona fide e sumarização
        builder: Serviço das receitas VC-CL3 / TTS-CL

    Returns:
        List[click.Command]: Comandos `build-vc-cl3` e `build-tts-cl`
    """

    @click.command("build-vc-cl3")
    @click.option("--bona", type=click.Path(path_type=Path), required=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True)
    @click.pass_obj
    def build_vc_cl3(state: CliState, bona, out):
        """Um spoof por fala bona fide, convertido para um locutor do mesmo idioma."""
        manifest = builder.build_vc_cl3(manifest_service.load_manifest(bona), MockConversionBackend(), state.seed, out)
        return CliResponse.table(manifest_service.summarize(manifest, ["language"]))

    @click.command("build-tts-cl")
    @click.option("--bona", type=click.Path(path_type=Path), required=True)
    @click.option("--transcripts", type=click.Path(path_type=Path), required=True, help="Diretório com <idioma>.txt")
    @click.option("--engines", "registry_path", default="mix", show_default=True)
    @click.option("--vocoder-tag", default="wavernn", show_default=True)
    @click.option("--spoof-ratio", type=click.FloatRange(min=0, min_open=True), default=5.0, show_default=True)
    @click.option("--backend", type=click.Choice(BACKENDS), default="mock", show_default=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True)
    def build_tts_cl(bona, transcripts, registry_path, vocoder_tag, spoof_ratio, backend, out):
        """Spoofs sintetizados no idioma de cada subconjunto bona fide."""
        name, specs = load_registry(registry_path)
        manifest = builder.build_tts_cl(
            manifest_service.load_manifest(bona),
            transcripts_by_language(transcripts),
            make_synthesis_backend(backend, specs),
            register_engines(specs, name),
            vocoder_tag,
            out,
            spoof_ratio,
        )
        return CliResponse.table(manifest_service.summarize(manifest, ["language"]))

    return [build_vc_cl3, build_tts_cl]
