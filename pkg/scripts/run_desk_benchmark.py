from __future__ import annotations

import argparse
import json
from pathlib import Path

from sparse_gp.bench import run_benchmark, run_experiment
from sparse_gp.config import load_config, verify_config_lock
from sparse_gp.monitoring import LogNotifier, Monitor
from sparse_gp.runtime import create_run_context


def main() -> None:
    parser = argparse.ArgumentParser(description="1-D synthetic benchmark at desk scale")
    parser.add_argument("--config", default="configs/f1_desk.yaml")
    parser.add_argument("--output-dir", default=None)
    parser.add_argument("--repeats", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--skip-sweep", action="store_true", help="only run the train/predict/score experiment")
    parser.add_argument("--require-lock", action="store_true")
    args = parser.parse_args()

    config_path = Path(args.config)
    if args.require_lock and not verify_config_lock(config_path):
        raise SystemExit(f"{config_path} does not match its lock file; run scripts/freeze_config.py")

    config = load_config(config_path)
    output_dir = Path(args.output_dir or config.experiment.output_dir)
    context = create_run_context(config, config_path)
    monitor = Monitor(LogNotifier())
    runner = run_experiment if args.skip_sweep else run_benchmark
    report = runner(config, output_dir, repeats=args.repeats, run_context=context, workers=args.workers, monitor=monitor)

    summary = {
        "run_id": context.run_id,
        "metrics": report["metrics"],
        "base_gp": report.get("base_gp"),
        "timings": report["timings"],
    }
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
