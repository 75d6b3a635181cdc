from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from accent_forge.api.dto import RunConfig


@dataclass
class CliState:
    """Estado compartilhado entre o grupo raiz e os subcomandos."""
    run_config: Optional[RunConfig] = None
    command: Optional[str] = None
    provenance_dir: Optional[Path] = None

    @property
    def config(self) -> RunConfig:
        return self.run_config or RunConfig()

    @property
    def seed(self) -> int:
        return self.config.trainer.seed
