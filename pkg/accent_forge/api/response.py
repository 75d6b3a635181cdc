"""
Classe CliResponse para padronização das saídas da CLI.
Garante formato consistente de dados (stdout / --out) e de erros (stderr).
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

import click
import pandas as pd

from accent_forge.api.exceptions import (
    AccentForgeException,
    BusinessRuleError,
    ConflictError,
    ManifestParseError,
    ValidationError,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3


class CliResponse:
    """
    Classe utilitária para emitir respostas padronizadas da CLI.

    Formato de sucesso: dados (tabela ou documento) em stdout ou no arquivo --out.

    Formato de erro (uma única linha em stderr):
    {"success": false, "error": {"code": "ERROR_CODE", "message": "..."}}
    """

    @staticmethod
    def table(frame: pd.DataFrame, out: Optional[Path] = None, sep: str = "\t") -> int:
        """
        Emite uma tabela separada por delimitador.

        Args:
            frame: Tabela a ser emitida
            out: Arquivo de destino (stdout se None)
            sep: Delimitador de colunas

        Returns:
            int: Código de saída 0
        """
        text = frame.to_csv(sep=sep, index=False, lineterminator="\n")
        if out is None:
            click.echo(text, nl=False)
        else:
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            Path(out).write_text(text, encoding="utf-8")
        return EXIT_OK

    @staticmethod
    def document(data: Dict[str, Any], out: Optional[Path] = None) -> int:
        """Emite um documento JSON estruturado."""
        text = json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        if out is None:
            click.echo(text, nl=False)
        else:
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            Path(out).write_text(text, encoding="utf-8")
        return EXIT_OK

    @staticmethod
    def error(message: str, code: str = "ERROR", field: str = None, details: Dict = None) -> None:
        """
        Escreve o erro padronizado em stderr, em uma única linha.

        Args:
            message: Mensagem descritiva do erro
            code: Código do erro (ex: VALIDATION_ERROR)
            field: Campo relacionado ao erro (para erros de validação)
            details: Detalhes adicionais do erro
        """
        error_obj = {"code": code, "message": message.replace("\n", " ")}
        if field:
            error_obj["field"] = field
        if details:
            error_obj["details"] = details
        click.echo(json.dumps({"success": False, "error": error_obj}, ensure_ascii=False), err=True)

    @staticmethod
    def exit_code_for(exc: BaseException) -> int:
        """Mapeia uma exceção para o código de saída da CLI."""
        if isinstance(exc, click.UsageError):
            return EXIT_USAGE
        if isinstance(exc, (ValidationError, ConflictError, ManifestParseError, BusinessRuleError)):
            return EXIT_VALIDATION
        return EXIT_RUNTIME

    @staticmethod
    def from_exception(exc: BaseException) -> int:
        """Emite o erro correspondente à exceção e devolve o código de saída."""
        if isinstance(exc, AccentForgeException):
            CliResponse.error(exc.message, exc.code, getattr(exc, "field", None))
        elif isinstance(exc, click.UsageError):
            CliResponse.error(exc.format_message(), "USAGE_ERROR")
        else:
            CliResponse.error(f"{type(exc).__name__}: {exc}", "RUNTIME_ERROR")
        return CliResponse.exit_code_for(exc)
