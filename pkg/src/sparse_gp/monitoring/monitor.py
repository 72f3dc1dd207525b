"""Numerical-health alert routing."""

from __future__ import annotations

from dataclasses import dataclass

from sparse_gp.monitoring.notifier import Notifier


@dataclass
class Monitor:
    notifier: Notifier

    def negative_variance(self, count: int, worst: float) -> None:
        self.notifier.notify("NEGATIVE_VARIANCE", f"{count} posterior variances clamped, most negative {worst:.3e}")

    def jitter_applied(self, jitter: float, attempts: int) -> None:
        self.notifier.notify("JITTER", f"diagonal jitter {jitter:.3e} after {attempts} factorization attempts")

    def solver_stalled(self, residual: float, iterations: int) -> None:
        self.notifier.notify("MINRES", f"no convergence after {iterations} iterations, residual {residual:.3e}")

    def training_failed(self, reason: str) -> None:
        self.notifier.notify("TRAINING", reason)
