"""Exact sparse Gaussian-process regression engine."""

__version__ = "0.1.0"

__all__ = ["kernels", "linalg", "assembly", "gp", "mcmc", "metrics", "bench", "config", "monitoring", "runtime"]
