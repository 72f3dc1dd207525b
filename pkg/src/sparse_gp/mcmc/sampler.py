"""Block Metropolis-Hastings over bounded hyperparameters."""

from __future__ import annotations

import math
import time
from dataclasses import replace
from pathlib import Path
from typing import Callable, Mapping, Optional

import numpy as np

from sparse_gp.assembly.models import AssemblyPlan
from sparse_gp.errors import TrainingError
from sparse_gp.gp.likelihood import log_marginal_likelihood, make_context
from sparse_gp.gp.models import Dataset, LMLEvaluation, MeanFunction, NoiseModel, SolverSettings, collect_slots
from sparse_gp.kernels.models import KernelSpec
from sparse_gp.mcmc.models import ChainResult, ChainState, HyperparameterVector, MCMCConfig, TraceRecord
from sparse_gp.mcmc.trace import (
    ChainCheckpoint,
    append_trace,
    load_chain_checkpoint,
    read_trace,
    save_chain_checkpoint,
)
from sparse_gp.monitoring.audit import AuditLog
from sparse_gp.monitoring.monitor import Monitor

LogDensity = Callable[[Mapping[str, float]], float]

SCALE_FLOOR = 1e-6
SCALE_CEILING = 1e3


def log_posterior(theta: Mapping[str, float], vector: HyperparameterVector, likelihood: LogDensity) -> float:
    """Uniform bounded prior: -inf outside the box, otherwise the log likelihood."""
    if not vector.in_bounds(theta):
        return -math.inf
    value = float(likelihood(theta))
    return value if not math.isnan(value) else -math.inf


class GPLogPosterior:
    """Log posterior of the GP hyperparameters with evaluation counters."""

    def __init__(
        self,
        spec: KernelSpec,
        dataset: Dataset,
        noise: NoiseModel,
        mean: MeanFunction,
        plan: AssemblyPlan,
        solver: SolverSettings = SolverSettings(),
        audit_log: Optional[AuditLog] = None,
        monitor: Optional[Monitor] = None,
    ) -> None:
        self.spec = spec
        self.dataset = dataset
        self.noise = noise
        self.mean = mean
        self.plan = plan
        self.solver = solver
        self.audit_log = audit_log
        self.monitor = monitor
        self.vector = HyperparameterVector(collect_slots(spec, noise, mean))
        self.context = make_context(dataset)
        self.evaluations = 0
        self.invalid = 0
        self.out_of_bounds = 0
        self.last: Optional[LMLEvaluation] = None

    def __call__(self, theta: Mapping[str, float]) -> float:
        self.last = None
        if not self.vector.in_bounds(theta):
            self.out_of_bounds += 1
            return -math.inf
        self.evaluations += 1
        self.last = log_marginal_likelihood(
            self.spec,
            theta,
            self.dataset,
            self.noise,
            self.mean,
            self.plan,
            self.solver,
            context=self.context,
            audit_log=self.audit_log,
            monitor=self.monitor,
        )
        if not self.last.valid:
            self.invalid += 1
            return -math.inf
        return self.last.value

    def last_timings(self) -> dict[str, float]:
        if self.last is None:
            return {}
        timings = self.last.timings()
        if self.last.assembly is not None:
            timings["density"] = self.last.assembly.density
        return timings


def propose_block(
    state: ChainState,
    block: str,
    names: tuple[str, ...],
    vector: HyperparameterVector,
    rng: np.random.Generator,
) -> dict[str, float]:
    """Gaussian random walk on one block; steps are scale times the slot width."""
    candidate = dict(state.theta)
    steps = rng.standard_normal(len(names))
    scale = state.scales[block]
    for name, step in zip(names, steps):
        slot = vector.slot(name)
        candidate[name] = state.theta[name] + scale * (slot.upper - slot.lower) * float(step)
    return candidate


def mh_step(
    state: ChainState,
    block: str,
    names: tuple[str, ...],
    vector: HyperparameterVector,
    target: LogDensity,
    rng: np.random.Generator,
) -> tuple[ChainState, TraceRecord]:
    candidate = propose_block(state, block, names, vector, rng)
    started = time.perf_counter()
    candidate_lp = log_posterior(candidate, vector, target)
    elapsed = time.perf_counter() - started
    u = rng.uniform()
    log_u = math.log(u) if u > 0.0 else -math.inf
    accepted = candidate_lp > -math.inf and log_u < candidate_lp - state.log_posterior
    timings = dict(getattr(target, "last_timings", lambda: {})())
    timings.setdefault("total_s", elapsed)
    new_state = replace(state, theta=candidate, log_posterior=candidate_lp) if accepted else state
    record = TraceRecord(
        iteration=state.iteration,
        block=block,
        proposal={name: candidate[name] for name in names},
        accepted=bool(accepted),
        log_posterior=new_state.log_posterior,
        candidate_log_posterior=candidate_lp,
        scale=state.scales[block],
        timings=timings,
    )
    return new_state, record


def adapt_scales(
    scales: Mapping[str, float],
    acceptance: Mapping[str, float],
    config: MCMCConfig,
    initial: Mapping[str, float],
) -> dict[str, float]:
    """scale *= exp(rate * (acceptance - target)), kept within [1e-6, 1e3] x initial."""
    updated = dict(scales)
    for block, rate in acceptance.items():
        proposed = scales[block] * math.exp(config.adapt_rate * (rate - config.target_acceptance))
        updated[block] = float(np.clip(proposed, SCALE_FLOOR * initial[block], SCALE_CEILING * initial[block]))
    return updated


def run_chain(
    config: MCMCConfig,
    target: LogDensity,
    vector: HyperparameterVector,
    initial_theta: Optional[Mapping[str, float]] = None,
    trace_path: Optional[str | Path] = None,
    checkpoint_path: Optional[str | Path] = None,
    resume: bool = False,
    audit_log: Optional[AuditLog] = None,
) -> ChainResult:
    """Cycle the blocks in declared order for ``config.iterations`` sweeps.

    Scales adapt every ``adapt_window`` sweeps during burn-in only. The
    selected hyperparameters are the best state visited.
    """
    blocks = dict(config.blocks) if config.blocks else vector.blocks()
    covered = sorted(name for names in blocks.values() for name in names)
    if covered != sorted(vector.names):
        raise TrainingError(
            "block definitions must cover every hyperparameter exactly once",
            {"blocks": {k: list(v) for k, v in blocks.items()}, "hyperparameters": vector.names},
        )
    initial_scales = {block: config.scale_for(block) for block in blocks}
    rng = np.random.Generator(np.random.PCG64(config.seed))

    checkpoint = None
    if resume and checkpoint_path is not None and Path(checkpoint_path).exists():
        checkpoint = load_chain_checkpoint(checkpoint_path)
    if checkpoint is not None:
        rng.bit_generator.state = checkpoint.rng_state
        state = ChainState(dict(checkpoint.theta), checkpoint.log_posterior, dict(checkpoint.scales), 0)
        start = checkpoint.next_iteration
        best_theta, best_lp = dict(checkpoint.best_theta), checkpoint.best_log_posterior
        window_accepted, window_proposed = dict(checkpoint.window_accepted), dict(checkpoint.window_proposed)
        post_accepted, post_proposed = dict(checkpoint.post_accepted), dict(checkpoint.post_proposed)
        trace = []
        if trace_path is not None:
            # drop records of a sweep that was traced but not checkpointed
            trace = [record for record in read_trace(trace_path) if record.iteration < start]
            Path(trace_path).unlink(missing_ok=True)
            append_trace(trace_path, trace)
    else:
        theta = vector.initial(initial_theta)
        lp = log_posterior(theta, vector, target)
        if not lp > -math.inf:
            raise TrainingError("initial hyperparameters have no finite log posterior", {"theta": theta})
        state = ChainState(theta, lp, dict(initial_scales), 0)
        start = 0
        best_theta, best_lp = dict(theta), lp
        window_accepted = {block: 0 for block in blocks}
        window_proposed = {block: 0 for block in blocks}
        post_accepted = {block: 0 for block in blocks}
        post_proposed = {block: 0 for block in blocks}
        trace = []
        if trace_path is not None:
            Path(trace_path).unlink(missing_ok=True)

    burn_in = config.burn_in
    for iteration in range(start, config.iterations):
        state = replace(state, iteration=iteration)
        sweep: list[TraceRecord] = []
        for block, names in blocks.items():
            state, record = mh_step(state, block, names, vector, target, rng)
            sweep.append(record)
            if iteration < burn_in:
                window_proposed[block] += 1
                window_accepted[block] += int(record.accepted)
            else:
                post_proposed[block] += 1
                post_accepted[block] += int(record.accepted)
            if record.accepted and state.log_posterior > best_lp:
                best_theta, best_lp = dict(state.theta), state.log_posterior
            if config.verbose and audit_log is not None:
                audit_log.log("mh_step", record.to_json())
        trace.extend(sweep)
        if trace_path is not None:
            append_trace(trace_path, sweep)

        if iteration < burn_in and (iteration + 1) % config.adapt_window == 0:
            acceptance = {block: window_accepted[block] / max(window_proposed[block], 1) for block in blocks}
            state = replace(state, scales=adapt_scales(state.scales, acceptance, config, initial_scales))
            window_accepted = {block: 0 for block in blocks}
            window_proposed = {block: 0 for block in blocks}

        if checkpoint_path is not None:
            save_chain_checkpoint(
                checkpoint_path,
                ChainCheckpoint(
                    next_iteration=iteration + 1,
                    theta=state.theta,
                    log_posterior=state.log_posterior,
                    scales=state.scales,
                    rng_state=rng.bit_generator.state,
                    best_theta=best_theta,
                    best_log_posterior=best_lp,
                    window_accepted=window_accepted,
                    window_proposed=window_proposed,
                    post_accepted=post_accepted,
                    post_proposed=post_proposed,
                    seed=config.seed,
                ),
            )

    assert all(best_lp >= record.log_posterior for record in trace)
    total_post = sum(post_proposed.values())
    acceptance = {block: post_accepted[block] / post_proposed[block] for block in blocks if post_proposed[block]}
    if total_post >= config.min_post_burn_in_proposals and sum(post_accepted.values()) == 0:
        diagnostics = {
            "post_burn_in_proposals": total_post,
            "scales": state.scales,
            "log_posterior": state.log_posterior,
            "invalid_evaluations": getattr(target, "invalid", None),
        }
        if audit_log is not None:
            audit_log.log("training_failed", diagnostics)
        raise TrainingError("no proposal accepted after burn-in", diagnostics)

    if audit_log is not None:
        audit_log.log(
            "chain_complete",
            {
                "iterations": config.iterations,
                "burn_in": burn_in,
                "acceptance": acceptance,
                "log_posterior_selected": best_lp,
                "evaluations": getattr(target, "evaluations", None),
            },
        )
    return ChainResult(
        trace=trace,
        theta_selected=best_theta,
        log_posterior_selected=best_lp,
        state=state,
        acceptance=acceptance,
        burn_in=burn_in,
        evaluations=int(getattr(target, "evaluations", len(trace))),
    )
