"""End-to-end experiments: split, train, fit, predict, score and report."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from sparse_gp import __version__
from sparse_gp.bench.data import TrainingData, load_training_data
from sparse_gp.config.builders import build_kernel, build_mcmc, build_mean, build_noise, build_plan
from sparse_gp.config.loader import serialize_config
from sparse_gp.config.models import EngineConfig
from sparse_gp.errors import DefinitenessError, InputError
from sparse_gp.gp.checkpoint import save_checkpoint, write_predictions
from sparse_gp.gp.likelihood import dense_log_marginal_likelihood, log_marginal_likelihood
from sparse_gp.gp.models import Dataset, MeanFunction, NoiseModel, VarianceKind, collect_slots
from sparse_gp.gp.posterior import dense_reference_fit_predict, fit_cache, posterior_predict
from sparse_gp.kernels.presets import build_preset
from sparse_gp.mcmc.models import HyperparameterVector, MCMCConfig, TraceRecord
from sparse_gp.mcmc.sampler import GPLogPosterior, run_chain
from sparse_gp.metrics.scoring import PredictionSet, score
from sparse_gp.monitoring.audit import AuditLog
from sparse_gp.monitoring.monitor import Monitor
from sparse_gp.runtime.context import RunContext, create_run_context

REPORT_SCHEMA_VERSION = 1
PLOT_HEADER = ["x", "mean", "std", "truth"]
METRIC_KEYS = ("rmse", "crps", "brier")


@dataclass(frozen=True)
class TimingRow:
    """Mean per-evaluation costs at one dataset size."""

    size: int
    density: float
    covariance_s: float
    solve_s: float
    logdet_s: float
    total_s: float
    evaluations: int = 1

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def aggregate_timings(size: int, timings: list[dict[str, float]]) -> Optional[TimingRow]:
    measured = [item for item in timings if "density" in item and "covariance_s" in item]
    if not measured:
        return None

    def _mean(key: str) -> float:
        return float(np.mean([item.get(key, 0.0) for item in measured]))

    return TimingRow(
        size=size,
        density=_mean("density"),
        covariance_s=_mean("covariance_s"),
        solve_s=_mean("solve_s"),
        logdet_s=_mean("logdet_s"),
        total_s=_mean("total_s"),
        evaluations=len(measured),
    )


def trace_timings(size: int, trace: list[TraceRecord]) -> Optional[TimingRow]:
    return aggregate_timings(size, [record.timings for record in trace])


def write_plot_csv(path: str | Path, x: np.ndarray, mean: np.ndarray, std: np.ndarray, truth: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PLOT_HEADER)
        for row in zip(x, mean, std, truth):
            writer.writerow([repr(float(value)) for value in row])
    return path


class StageFailure(Exception):
    """Raised by ``run_experiment`` after the partial report is written."""

    def __init__(self, stage: str, error: BaseException, report_path: Path) -> None:
        super().__init__(f"stage {stage} failed: {error}")
        self.stage = stage
        self.error = error
        self.report_path = report_path


def _dense_target(spec, dataset: Dataset, noise: NoiseModel, mean: MeanFunction):
    def target(theta):
        try:
            return dense_log_marginal_likelihood(spec, theta, dataset, noise, mean)
        except DefinitenessError:
            return -math.inf

    return target


def _summary(values: list[dict[str, Any]]) -> tuple[dict[str, Any], dict[str, Any]]:
    mean: dict[str, Any] = {}
    std: dict[str, Any] = {}
    for key in METRIC_KEYS:
        column = [item[key] for item in values if item.get(key) is not None]
        mean[key] = float(np.mean(column)) if column else None
        std[key] = float(np.std(column)) if column else None
    mean["n_test"] = values[0]["n_test"] if values else 0
    return mean, std


class Experiment:
    """One configured run over ``repeats`` seed offsets."""

    def __init__(
        self,
        config: EngineConfig,
        output_dir: str | Path,
        run_context: Optional[RunContext] = None,
        workers: Optional[int] = None,
        monitor: Optional[Monitor] = None,
    ) -> None:
        self.config = config
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.materialized = serialize_config(config)
        self.run_context = run_context or create_run_context(config)
        self.workers = workers
        self.monitor = monitor
        self.audit_log = AuditLog(
            self.output_dir / config.experiment.audit_log_name,
            run_id=self.run_context.run_id,
            config_hash=self.run_context.config_hash,
        )
        self.variance_kind = VarianceKind(config.experiment.variance_kind)
        self.stage = "setup"

    def _log(self, event: str, payload: dict[str, Any]) -> None:
        self.audit_log.log(event, payload)

    def run(self, repeats: Optional[int] = None) -> dict[str, Any]:
        repeats = repeats or self.config.experiment.repeats
        report = self._base_report(repeats)
        try:
            for offset in range(repeats):
                report["repeats"].append(self._run_repeat(offset))
        except Exception as exc:
            report["status"] = "failed"
            report["stage_failed"] = self.stage
            report["error"] = f"{type(exc).__name__}: {exc}"
            self._log("stage_failed", {"stage": self.stage, "error": str(exc)})
            path = self._write_report(report)
            raise StageFailure(self.stage, exc, path) from exc

        report["metrics"], report["metrics_std"] = _summary([item["metrics"] for item in report["repeats"]])
        if self.config.experiment.base_gp:
            base = [item["base_gp"]["metrics"] for item in report["repeats"]]
            mean, std = _summary(base)
            report["base_gp"] = {"kernel": "matern32", "metrics": mean, "metrics_std": std}
        report["theta_selected"] = report["repeats"][0]["theta_selected"]
        report["timings"] = [item["timings"] for item in report["repeats"] if item["timings"] is not None]
        report["status"] = "ok"
        self._write_report(report)
        self._log("experiment_complete", {"metrics": report["metrics"], "repeats": repeats})
        return report

    def _base_report(self, repeats: int) -> dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "engine_version": __version__,
            "run_id": self.run_context.run_id,
            "config_hash": self.run_context.config_hash,
            "run": self.run_context.to_json(),
            "config": self.materialized,
            "variance_kind": self.variance_kind.value,
            "status": "running",
            "stage_failed": None,
            "error": None,
            "seeds": {
                "data": [self.config.data.seed + offset for offset in range(repeats)],
                "chain": [self.config.mcmc.seed + offset for offset in range(repeats)],
            },
            "repeats": [],
            "metrics": None,
            "metrics_std": None,
            "base_gp": None,
            "theta_selected": None,
            "timings": [],
        }

    def _write_report(self, report: dict[str, Any]) -> Path:
        path = self.output_dir / "report.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")
        return path

    def _run_repeat(self, offset: int) -> dict[str, Any]:
        config = self.config
        repeat_dir = self.output_dir / f"repeat_{offset:03d}"
        repeat_dir.mkdir(parents=True, exist_ok=True)

        self.stage = "data"
        data_config = replace(config.data, seed=config.data.seed + offset)
        data = load_training_data(data_config)
        if data.test is None:
            raise InputError("experiments need held-out rows: set data.test_path or data.test_fraction")
        train, test = data.train, data.test

        self.stage = "build"
        spec = build_kernel(config, train.dim)
        noise = build_noise(config.noise, data.noise_var)
        mean = build_mean(config.mean)
        plan = build_plan(config, train.n, self.workers)

        self.stage = "train"
        target = GPLogPosterior(spec, train, noise, mean, plan, config.solver, self.audit_log, self.monitor)
        started = time.perf_counter()
        chain = run_chain(
            build_mcmc(config, offset),
            target,
            target.vector,
            initial_theta=config.mcmc.initial_theta,
            trace_path=repeat_dir / "trace.ndjson",
            checkpoint_path=repeat_dir / "chain_checkpoint.json",
            audit_log=self.audit_log,
        )
        t_train = time.perf_counter() - started

        self.stage = "fit"
        model = fit_cache(spec, chain.theta_selected, train, noise, mean, plan, config.solver, self.audit_log, self.monitor)
        checkpoint_path = save_checkpoint(
            repeat_dir / "model.json",
            model,
            data_source=data.provenance,
            log_posterior=chain.log_posterior_selected,
            config=self.materialized,
        )

        self.stage = "predict"
        posterior = posterior_predict(
            model, test.x, self.variance_kind, data.test_noise_var, self.audit_log, self.monitor
        )
        predictions_path = write_predictions(repeat_dir / "predictions.csv", posterior)

        self.stage = "score"
        metrics = score(PredictionSet(posterior.mean, posterior.std, test.y))
        plot_path = self._plot(repeat_dir, model, data)

        result: dict[str, Any] = {
            "offset": offset,
            "data_seed": data_config.seed,
            "chain_seed": config.mcmc.seed + offset,
            "metrics": metrics,
            "theta_selected": chain.theta_selected,
            "log_posterior_selected": chain.log_posterior_selected,
            "acceptance": chain.acceptance,
            "evaluations": chain.evaluations,
            "invalid_evaluations": target.invalid,
            "assembly": model.assembly.to_json(),
            "timings": None,
            "train_seconds": t_train,
            "prediction": {"failed": int(posterior.failed.sum()), "clamped": posterior.clamped, "warned": posterior.warned},
            "artifacts": {
                "checkpoint": str(checkpoint_path),
                "trace": str(repeat_dir / "trace.ndjson"),
                "predictions": str(predictions_path),
                "plot": None if plot_path is None else str(plot_path),
            },
            "base_gp": None,
        }
        row = trace_timings(train.n, chain.trace)
        result["timings"] = None if row is None else row.to_json()

        if config.experiment.base_gp:
            self.stage = "base_gp"
            result["base_gp"] = self._base_gp(train, test, data, noise, mean, offset)
        return result

    def _plot(self, repeat_dir: Path, model, data: TrainingData) -> Optional[Path]:
        if data.grid_x is None or data.train.dim != 1:
            return None
        grid = posterior_predict(model, data.grid_x[:, None], VarianceKind.LATENT, audit_log=self.audit_log)
        return write_plot_csv(repeat_dir / "plot.csv", data.grid_x, grid.mean, grid.std, data.grid_truth)

    def _base_gp(
        self,
        train: Dataset,
        test: Dataset,
        data: TrainingData,
        noise: NoiseModel,
        mean: MeanFunction,
        offset: int,
    ) -> dict[str, Any]:
        """Dense Matern 3/2 GP trained and scored on the same split."""
        spec = build_preset("matern32", dim=train.dim)
        vector = HyperparameterVector(collect_slots(spec, noise, mean))
        chain = run_chain(
            MCMCConfig(
                iterations=self.config.experiment.base_gp_iterations,
                seed=self.config.mcmc.seed + offset,
                initial_scale=self.config.mcmc.initial_scale,
                adapt_window=self.config.mcmc.adapt_window,
                burn_in_fraction=self.config.mcmc.burn_in_fraction,
            ),
            _dense_target(spec, train, noise, mean),
            vector,
            audit_log=self.audit_log,
        )
        posterior = dense_reference_fit_predict(
            train, spec, chain.theta_selected, test.x, noise, mean, self.variance_kind, data.test_noise_var
        )
        return {
            "metrics": score(PredictionSet(posterior.mean, posterior.std, test.y)),
            "theta_selected": chain.theta_selected,
            "log_posterior_selected": chain.log_posterior_selected,
        }


def run_experiment(
    config: EngineConfig,
    output_dir: Optional[str | Path] = None,
    repeats: Optional[int] = None,
    run_context: Optional[RunContext] = None,
    workers: Optional[int] = None,
    monitor: Optional[Monitor] = None,
) -> dict[str, Any]:
    experiment = Experiment(
        config, output_dir or config.experiment.output_dir, run_context=run_context, workers=workers, monitor=monitor
    )
    return experiment.run(repeats)


def timing_sweep(
    config: EngineConfig,
    sizes: list[int],
    evaluations: int = 1,
    theta: Optional[dict[str, float]] = None,
    workers: Optional[int] = None,
    audit_log: Optional[AuditLog] = None,
) -> list[TimingRow]:
    """Time likelihood evaluations at fixed hyperparameters for each size."""
    rows = []
    for size in sizes:
        data_config = config.data
        if data_config.test_fraction is None:
            data_config = replace(data_config, n_train=size)
        data = load_training_data(data_config)
        train = data.train
        if train.n < size:
            raise InputError(f"benchmark size {size} exceeds the {train.n} available training rows")
        if train.n > size:
            train = train.subset(np.arange(size))
        spec = build_kernel(config, train.dim)
        noise_var = None if data.noise_var is None else data.noise_var[:size]
        noise = build_noise(config.noise, noise_var)
        mean = build_mean(config.mean)
        plan = build_plan(config, size, workers)
        vector = HyperparameterVector(collect_slots(spec, noise, mean))
        point = vector.initial({**config.mcmc.initial_theta, **(theta or {})})
        timings = []
        for _ in range(evaluations):
            evaluation = log_marginal_likelihood(spec, point, train, noise, mean, plan, config.solver, audit_log=audit_log)
            item = evaluation.timings()
            if evaluation.assembly is not None:
                item["density"] = evaluation.assembly.density
            timings.append(item)
        row = aggregate_timings(size, timings)
        if row is None:
            raise InputError(f"no covariance was assembled at size {size}")
        rows.append(row)
        if audit_log is not None:
            audit_log.log("timing_row", row.to_json())
    return rows


def run_benchmark(
    config: EngineConfig,
    output_dir: Optional[str | Path] = None,
    repeats: Optional[int] = None,
    run_context: Optional[RunContext] = None,
    workers: Optional[int] = None,
    monitor: Optional[Monitor] = None,
) -> dict[str, Any]:
    """Experiment over repeats plus one TimingRow per configured size."""
    output_dir = Path(output_dir or config.experiment.output_dir)
    experiment = Experiment(config, output_dir, run_context=run_context, workers=workers, monitor=monitor)
    report = experiment.run(repeats)
    rows = timing_sweep(
        config,
        config.benchmark.sizes,
        config.benchmark.evaluations,
        config.benchmark.theta,
        workers,
        experiment.audit_log,
    )
    benchmark = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "engine_version": __version__,
        "run_id": report["run_id"],
        "metrics": report["metrics"],
        "metrics_std": report["metrics_std"],
        "base_gp": report["base_gp"],
        "seeds": report["seeds"],
        "chain_timings": report["timings"],
        "timings": [row.to_json() for row in rows],
    }
    (output_dir / "benchmark.json").write_text(json.dumps(benchmark, indent=2, sort_keys=True), encoding="utf-8")
    return benchmark
