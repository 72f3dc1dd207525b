"""Command-line entry point: train, predict, evaluate, benchmark and inspect."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import yaml

from sparse_gp.bench.data import load_training_data, read_table, training_data_from_provenance
from sparse_gp.bench.experiment import StageFailure, run_benchmark
from sparse_gp.config.builders import build_kernel, build_mcmc, build_mean, build_noise, build_plan
from sparse_gp.config.loader import apply_overrides, load_config, serialize_config
from sparse_gp.config.models import EngineConfig
from sparse_gp.errors import (
    ConfigError,
    HyperparameterError,
    InputError,
    SparseGPError,
    StaleCheckpointError,
    TrainingError,
)
from sparse_gp.gp.checkpoint import (
    Checkpoint,
    load_checkpoint,
    read_predictions,
    restore_model,
    save_checkpoint,
    write_predictions,
)
from sparse_gp.gp.models import VarianceKind
from sparse_gp.gp.posterior import fit_cache, posterior_predict
from sparse_gp.kernels.serialization import node_to_dict
from sparse_gp.mcmc.sampler import GPLogPosterior, run_chain
from sparse_gp.metrics.scoring import PredictionSet, score
from sparse_gp.monitoring.audit import AuditLog
from sparse_gp.monitoring.monitor import Monitor
from sparse_gp.monitoring.notifier import LogNotifier
from sparse_gp.runtime.context import create_run_context

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TRAINING = 3
EXIT_STALE = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, StageFailure):
        exc = exc.error
    if isinstance(exc, StaleCheckpointError):
        return EXIT_STALE
    if isinstance(exc, (InputError, ConfigError, HyperparameterError)):
        return EXIT_INPUT
    return EXIT_TRAINING


def _load(args: argparse.Namespace) -> EngineConfig:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides += [f"data.seed={args.seed}", f"mcmc.seed={args.seed}"]
    if args.workers is not None:
        overrides.append(f"assembly.workers={args.workers}")
    if getattr(args, "repeats", None) is not None:
        overrides.append(f"experiment.repeats={args.repeats}")
    config = load_config(args.config)
    return apply_overrides(config, overrides) if overrides else config


def _out_dir(args: argparse.Namespace, config: Optional[EngineConfig] = None) -> Path:
    if args.out:
        path = Path(args.out)
    elif config is not None:
        path = Path(config.experiment.output_dir)
    else:
        path = Path(".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _monitor(args: argparse.Namespace) -> Optional[Monitor]:
    return Monitor(LogNotifier()) if args.verbose else None


def cmd_train(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    context = create_run_context(config, args.config)
    audit_log = AuditLog(out / config.experiment.audit_log_name, context.run_id, context.config_hash)
    monitor = _monitor(args)

    data = load_training_data(config.data)
    spec = build_kernel(config, data.train.dim)
    noise = build_noise(config.noise, data.noise_var)
    mean = build_mean(config.mean)
    plan = build_plan(config, data.train.n)
    target = GPLogPosterior(spec, data.train, noise, mean, plan, config.solver, audit_log, monitor)
    try:
        chain = run_chain(
            build_mcmc(config),
            target,
            target.vector,
            initial_theta=config.mcmc.initial_theta,
            trace_path=out / "trace.ndjson",
            checkpoint_path=out / "chain_checkpoint.json",
            resume=args.resume,
            audit_log=audit_log,
        )
    except TrainingError as exc:
        if monitor is not None:
            monitor.training_failed(str(exc))
        print(json.dumps({"error": str(exc), "diagnostics": exc.diagnostics}, indent=2, default=str))
        return EXIT_TRAINING

    model = fit_cache(spec, chain.theta_selected, data.train, noise, mean, plan, config.solver, audit_log, monitor)
    path = save_checkpoint(
        out / "model.json",
        model,
        data_source=data.provenance,
        log_posterior=chain.log_posterior_selected,
        config=serialize_config(config),
    )
    print(path)
    return EXIT_OK


def _recorded_seeds(args: argparse.Namespace, checkpoint: Optional[Checkpoint] = None) -> dict[str, Optional[int]]:
    seeds: dict[str, Optional[int]] = {"override": args.seed}
    if checkpoint is not None:
        seeds["data"] = checkpoint.data_source.get("seed")
        seeds["chain"] = checkpoint.config.get("mcmc", {}).get("seed")
    return seeds


def cmd_predict(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    data = training_data_from_provenance(checkpoint.data_source)
    out = _out_dir(args)
    audit_log = AuditLog(out / "audit.log")
    model = restore_model(checkpoint, data.train, workers=args.workers, audit_log=audit_log)
    table = read_table(args.test, require_target=False)
    kind = VarianceKind(args.variance_kind)
    test_noise = table.noise_var if kind == VarianceKind.OBSERVED else None
    posterior = posterior_predict(model, table.coords, kind, test_noise, audit_log, _monitor(args))
    path = write_predictions(out / "predictions.csv", posterior)
    run = {"command": "predict", "checkpoint": str(args.checkpoint), "seeds": _recorded_seeds(args, checkpoint)}
    audit_log.log("predict", run)
    (out / "run.json").write_text(json.dumps(run, indent=2, sort_keys=True), encoding="utf-8")
    print(path)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    predictions = read_predictions(args.predictions)
    truth = read_table(args.truth)
    m = truth.coords.shape[0]
    if predictions["index"].shape[0] != m or not np.array_equal(np.sort(predictions["index"]), np.arange(m)):
        raise InputError(f"prediction indices do not match the {m} truth rows")
    order = np.argsort(predictions["index"])
    variance = predictions["variance"][order]
    if np.any(variance < 0):
        raise InputError("prediction file has negative variances")
    metrics = score(PredictionSet(predictions["mean"][order], np.sqrt(variance), truth.y))
    kinds = sorted(set(predictions["variance_kind"].tolist()))
    metrics["variance_kind"] = kinds[0] if len(kinds) == 1 else kinds
    metrics["seeds"] = _recorded_seeds(args)
    text = json.dumps(metrics, indent=2, sort_keys=True)
    print(text)
    if args.out:
        path = _out_dir(args) / "metrics.json"
        path.write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    context = create_run_context(config, args.config)
    report = run_benchmark(config, out, run_context=context, monitor=_monitor(args))
    print(json.dumps({"metrics": report["metrics"], "timings": report["timings"]}, indent=2))
    return EXIT_OK


def describe_node(data: dict[str, Any], depth: int = 0) -> list[str]:
    pad = "  " * depth
    scalars = {
        key: value
        for key, value in data.items()
        if key not in ("kind", "children", "child", "farfield") and not isinstance(value, (dict, list))
    }
    params = ", ".join(f"{key}={value}" for key, value in scalars.items())
    lines = [f"{pad}{data['kind']}({params})"]
    for child in data.get("children", []):
        lines.extend(describe_node(child, depth + 1))
    for key in ("child", "farfield"):
        if key in data:
            lines.extend(describe_node(data[key], depth + 1))
    return lines


def cmd_inspect(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    bounds = {slot.name: slot for slot in (*checkpoint.spec.slots, *checkpoint.noise.slots, *checkpoint.mean.slots)}
    lines = ["kernel:"]
    lines.extend(describe_node(node_to_dict(checkpoint.spec.root), 1))
    lines.append("hyperparameters:")
    for name, value in sorted(checkpoint.theta.items()):
        slot = bounds.get(name)
        span = "" if slot is None else f"  [{slot.lower:.6g}, {slot.upper:.6g}] block={slot.block}"
        lines.append(f"  {name} = {value:.6g}{span}")
    lines.append(f"density: {checkpoint.assembly.get('density')}")
    lines.append(f"nnz: {checkpoint.assembly.get('nnz')}")
    lines.append(f"dataset: n={checkpoint.n} dim={checkpoint.dim} metric={checkpoint.metric.tag.value}")
    lines.append(f"fingerprint: {checkpoint.fingerprint}")
    seeds = _recorded_seeds(args, checkpoint)
    lines.append(f"seeds: data={seeds['data']} chain={seeds['chain']} override={seeds['override']}")
    lines.append(f"log_posterior: {checkpoint.log_posterior}")
    lines.append(f"engine_version: {checkpoint.engine_version}")
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-gp")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_config: bool = True) -> None:
        if with_config:
            p.add_argument("--config", required=True)
            p.add_argument("--set", action="append", metavar="KEY=VALUE", help="dotted config override")
        p.add_argument("--seed", type=int, help="data and chain seed; recorded by commands that draw no random numbers")
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("-v", "--verbose", action="store_true")

    train = sub.add_parser("train", help="sample hyperparameters and write a checkpoint")
    common(train)
    train.add_argument("--resume", action="store_true", help="continue from the chain checkpoint in --out")
    train.set_defaults(handler=cmd_train)

    predict = sub.add_parser("predict", help="posterior mean and variance for a test CSV")
    common(predict, with_config=False)
    predict.add_argument("--checkpoint", required=True)
    predict.add_argument("--test", required=True)
    predict.add_argument("--variance-kind", choices=[kind.value for kind in VarianceKind], default="f")
    predict.set_defaults(handler=cmd_predict)

    evaluate = sub.add_parser("evaluate", help="score a prediction CSV against a truth CSV")
    common(evaluate, with_config=False)
    evaluate.add_argument("--predictions", required=True)
    evaluate.add_argument("--truth", required=True)
    evaluate.set_defaults(handler=cmd_evaluate)

    benchmark = sub.add_parser("benchmark", help="repeated experiment plus timing sweep")
    common(benchmark)
    benchmark.add_argument("--repeats", type=int)
    benchmark.set_defaults(handler=cmd_benchmark)

    inspect = sub.add_parser("inspect", help="summarize a checkpoint")
    common(inspect, with_config=False)
    inspect.add_argument("--checkpoint", required=True)
    inspect.set_defaults(handler=cmd_inspect)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except StageFailure as exc:
        print(f"error: {exc} (partial report at {exc.report_path})", file=sys.stderr)
        return exit_code_for(exc)
    except SparseGPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except (OSError, yaml.YAMLError) as exc:
        error = InputError(str(exc))
        print(f"error: {error}", file=sys.stderr)
        return exit_code_for(error)


if __name__ == "__main__":
    raise SystemExit(main())
