"""Engine exception types."""

from __future__ import annotations

from typing import Any, Optional


class SparseGPError(Exception):
    pass


class InputError(SparseGPError, ValueError):
    pass


class HyperparameterError(SparseGPError, ValueError):
    pass


class ConfigError(SparseGPError, ValueError):
    pass


class AssemblyError(SparseGPError, RuntimeError):
    def __init__(self, message: str, block: Optional[tuple[int, int]] = None) -> None:
        super().__init__(message if block is None else f"{message} (block pair {block})")
        self.block = block


class DefinitenessError(SparseGPError, RuntimeError):
    pass


class SolverError(SparseGPError, RuntimeError):
    pass


class TrainingError(SparseGPError, RuntimeError):
    def __init__(self, message: str, diagnostics: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StaleCheckpointError(SparseGPError, RuntimeError):
    pass
