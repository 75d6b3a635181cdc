"""
Controller de manifestos.
Define os subcomandos de sumarização, divisão, subamostragem, junção, filtro
e composição das configurações de treino.
"""

from pathlib import Path
from typing import Tuple

import click

from accent_forge.api.exceptions import ValidationError
from accent_forge.api.response import CliResponse
from accent_forge.controllers.context import CliState
from accent_forge.services.manifest_service import CONFIGURATIONS, GROUP_FIELDS, ManifestService

PORTION_KEYS = ("I", "II_eng", "II_mix", "III")


def parse_ratio(text: str) -> Tuple[int, int]:
    """Converte "4:1" em (4, 1)."""
    try:
        train, valid = (int(part) for part in text.split(":"))
    except ValueError as e:
        raise ValidationError(f"proporção '{text}' inválida (use treino:validação, ex: 4:1)", "ratio") from e
    if train < 1 or valid < 1:
        raise ValidationError("os dois termos da proporção devem ser >= 1", "ratio")
    return train, valid


def create_manifest_commands(manifest_service: ManifestService) -> click.Group:
    """
    Registra os subcomandos de manifesto.

    Args:
        manifest_service: Instância do serviço de manifestos

    Returns:
        click.Group: Grupo `manifest` configurado
    """

    @click.group("manifest")
    def manifest():
        """Operações sobre manifestos (JSON Lines)."""

    @manifest.command("summarize")
    @click.option("--in", "in_path", type=click.Path(path_type=Path), required=True)
    @click.option("--by", "group_by", type=click.Choice(GROUP_FIELDS), multiple=True)
    @click.option("--out", type=click.Path(path_type=Path), default=None)
    def summarize(in_path, group_by, out):
        """Contagens bona fide / spoof / total por grupo."""
        loaded = manifest_service.load_manifest(in_path)
        return CliResponse.table(manifest_service.summarize(loaded, group_by), out)

    @manifest.command("split")
    @click.option("--in", "in_path", type=click.Path(path_type=Path), required=True)
    @click.option("--ratio", default="4:1", show_default=True)
    @click.option("--out-train", type=click.Path(path_type=Path), required=True)
    @click.option("--out-valid", type=click.Path(path_type=Path), required=True)
    @click.pass_obj
    def split(state: CliState, in_path, ratio, out_train, out_valid):
        """Divisão estratificada por rótulo em treino e validação."""
        train_ratio, valid_ratio = parse_ratio(ratio)
        loaded = manifest_service.load_manifest(in_path)
        train, valid = manifest_service.split(loaded, train_ratio, valid_ratio, state.seed)
        manifest_service.save_manifest(train, out_train)
        manifest_service.save_manifest(valid, out_valid)
        return CliResponse.document({"train": len(train), "valid": len(valid), "seed": state.seed})

    @manifest.command("downsample")
    @click.option("--in", "in_path", type=click.Path(path_type=Path), required=True)
    @click.option("--size", type=int, required=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True)
    @click.pass_obj
    def downsample(state: CliState, in_path, size, out):
        """Subamostragem preservando a proporção de classes."""
        loaded = manifest_service.load_manifest(in_path)
        result = manifest_service.downsample(loaded, size, state.seed)
        manifest_service.save_manifest(result, out)
        return CliResponse.document({"records": len(result), "seed": state.seed})

    @manifest.command("merge")
    @click.option("--in", "in_paths", type=click.Path(path_type=Path), multiple=True, required=True)
    @click.option("--name", default="merged", show_default=True)
    @click.option("--out", type=click.Path(path_type=Path), required=True)
    def merge(in_paths, name, out):
        """Junta manifestos; utt_id repetido é erro."""
        merged = manifest_service.merge([manifest_service.load_manifest(p) for p in in_paths], name)
        manifest_service.save_manifest(merged, out)
        return CliResponse.document({"records": len(merged), "inputs": len(in_paths)})

    @manifest.command("filter")
    @click.option("--in", "in_path", type=click.Path(path_type=Path), required=True)
    @click.option("--label", type=click.Choice(["bona_fide", "spoof"]), default=None)
    @click.option("--language", default=None)
    @click.option("--source", default=None)
    @click.option("--portion", type=click.Choice(["I", "II", "III", "test"]), default=None)
    @click.option("--exclude-portion", multiple=True, type=click.Choice(["I", "II", "III", "test"]))
    @click.option("--out", type=click.Path(path_type=Path), required=True)
    def filter_(in_path, label, language, source, portion, exclude_portion, out):
        """Seleciona registros por rótulo, idioma, origem ou porção."""
        loaded = manifest_service.load_manifest(in_path)
        result = manifest_service.filter(
            loaded, exclude_portions=exclude_portion, label=label, language=language, source=source, portion=portion
        )
        manifest_service.save_manifest(result, out)
        return CliResponse.document({"records": len(result)})

    @manifest.command("compose")
    @click.option("--name", "configuration", type=click.Choice(list(CONFIGURATIONS), case_sensitive=False), required=True)
    @click.option("--portion", "portions", multiple=True, required=True, help="CHAVE=manifesto, CHAVE em I, II_eng, II_mix, III")
    @click.option("--ratio", default="4:1", show_default=True)
    @click.option("--out-dir", type=click.Path(path_type=Path), required=True)
    @click.pass_obj
    def compose(state: CliState, configuration, portions, ratio, out_dir):
        """Monta uma configuração de treino e grava train.jsonl / valid.jsonl."""
        loaded = {}
        for item in portions:
            key, sep, path = item.partition("=")
            if not sep or key not in PORTION_KEYS:
                raise ValidationError(f"porção '{item}' inválida (use CHAVE=caminho)", "portion")
            loaded[key] = manifest_service.load_manifest(Path(path))
        train, valid = manifest_service.compose_configuration(configuration, loaded, state.seed, parse_ratio(ratio))
        out_dir = Path(out_dir)
        manifest_service.save_manifest(train, out_dir / "train.jsonl")
        manifest_service.save_manifest(valid, out_dir / "valid.jsonl")
        return CliResponse.document({
            "configuration": configuration,
            "train": len(train),
            "valid": len(valid),
            "seed": state.seed,
        })

    return manifest
