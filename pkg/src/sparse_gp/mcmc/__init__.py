"""Block Metropolis-Hastings hyperparameter trainer."""

from sparse_gp.mcmc.models import ChainResult, ChainState, HyperparameterVector, MCMCConfig, TraceRecord
from sparse_gp.mcmc.sampler import (
    GPLogPosterior,
    adapt_scales,
    log_posterior,
    mh_step,
    propose_block,
    run_chain,
)
from sparse_gp.mcmc.trace import (
    ChainCheckpoint,
    append_trace,
    load_chain_checkpoint,
    read_trace,
    save_chain_checkpoint,
)

__all__ = [
    "ChainCheckpoint",
    "ChainResult",
    "ChainState",
    "GPLogPosterior",
    "HyperparameterVector",
    "MCMCConfig",
    "TraceRecord",
    "adapt_scales",
    "append_trace",
    "load_chain_checkpoint",
    "log_posterior",
    "mh_step",
    "propose_block",
    "read_trace",
    "run_chain",
    "save_chain_checkpoint",
]
