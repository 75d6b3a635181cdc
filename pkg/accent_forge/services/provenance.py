"""
Registro de proveniência: cada execução da CLI acrescenta uma linha JSON com
comando, hash da configuração, seeds e versões das dependências.
"""

import json
import logging
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional

from accent_forge import __version__
from accent_forge.api.dto import RunConfig
from accent_forge.api.exceptions import StorageError

logger = logging.getLogger(__name__)

PROVENANCE_FILE = "provenance.jsonl"
TRACKED_PACKAGES = ("numpy", "torch", "librosa", "soundfile", "pandas", "pydantic", "click")


def package_versions() -> Dict[str, Optional[str]]:
    versions: Dict[str, Optional[str]] = {"accent-forge": __version__, "python": platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def provenance_record(command: str, argv: List[str], run_config: RunConfig, status: str, exit_code: int) -> Dict:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "command": command,
        "argv": list(argv),
        "config_hash": run_config.config_hash,
        "seeds": {"trainer": run_config.trainer.seed},
        "deterministic": run_config.trainer.deterministic,
        "status": status,
        "exit_code": exit_code,
        "versions": package_versions(),
    }


def write_provenance(directory: Path, record: Dict) -> Path:
    """
    Acrescenta o registro a <directory>/provenance.jsonl.

    Raises:
        StorageError: Se o arquivo não puder ser escrito
    """
    path = Path(directory) / PROVENANCE_FILE
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    except OSError as e:
        raise StorageError(str(path), e.strerror or str(e)) from e
    logger.debug("provenance written path=%s command=%s", path, record["command"])
    return path
