"""Synthetic data, CSV ingestion and experiment orchestration."""

from sparse_gp.bench.data import (
    CsvTable,
    TrainingData,
    load_csv,
    load_training_data,
    provenance,
    read_table,
    training_data_from_provenance,
    write_csv,
)
from sparse_gp.bench.experiment import (
    Experiment,
    StageFailure,
    TimingRow,
    aggregate_timings,
    run_benchmark,
    run_experiment,
    timing_sweep,
    write_plot_csv,
)
from sparse_gp.bench.synthetic import SyntheticSample, Split, make_synthetic_dataset, split_dataset, synth_f1

__all__ = [
    "CsvTable",
    "Experiment",
    "Split",
    "StageFailure",
    "SyntheticSample",
    "TimingRow",
    "TrainingData",
    "aggregate_timings",
    "load_csv",
    "load_training_data",
    "make_synthetic_dataset",
    "provenance",
    "read_table",
    "run_benchmark",
    "run_experiment",
    "split_dataset",
    "synth_f1",
    "timing_sweep",
    "training_data_from_provenance",
    "write_csv",
    "write_plot_csv",
]
