"""Run identity shared by reports, checkpoints and audit logs."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from sparse_gp import __version__
from sparse_gp.config.loader import compute_config_hash, compute_payload_hash, serialize_config
from sparse_gp.config.models import EngineConfig


@dataclass(frozen=True)
class RunContext:
    """Who produced an artifact: config identity, seeds and engine version.

    ``config_hash`` hashes the file on disk when there is one; the
    materialized hash also covers overrides and defaults.
    """

    run_id: str
    config_path: Optional[Path]
    config_hash: str
    materialized_hash: str
    data_seed: int
    chain_seed: int
    started_at: datetime
    engine_version: str = __version__

    def to_json(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "config_path": None if self.config_path is None else str(self.config_path),
            "config_hash": self.config_hash,
            "materialized_hash": self.materialized_hash,
            "data_seed": self.data_seed,
            "chain_seed": self.chain_seed,
            "started_at": self.started_at.isoformat(),
            "engine_version": self.engine_version,
        }


def create_run_context(
    config: EngineConfig,
    config_path: Optional[str | Path] = None,
    run_id: Optional[str] = None,
) -> RunContext:
    path = None if config_path is None else Path(config_path)
    materialized_hash = compute_payload_hash(serialize_config(config))
    config_hash = compute_config_hash(path) if path is not None else materialized_hash
    started_at = datetime.now(timezone.utc)
    if run_id is None:
        stamp = started_at.strftime("%Y%m%dT%H%M%SZ")
        run_id = f"{config.run_id_prefix}-{stamp}-{materialized_hash[:8]}-s{config.mcmc.seed}"
    return RunContext(
        run_id=run_id,
        config_path=path,
        config_hash=config_hash,
        materialized_hash=materialized_hash,
        data_seed=config.data.seed,
        chain_seed=config.mcmc.seed,
        started_at=started_at,
    )
