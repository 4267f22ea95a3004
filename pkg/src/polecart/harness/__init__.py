from polecart.harness.config import ConfigError, ExperimentConfig, dump_config, load_config, parse_config
from polecart.harness.runner import RunSummary, moving_average, run_experiment, run_seed
from polecart.harness.io import read_run_dir, write_csv
from polecart.harness.plot import emit_plot
from polecart.harness.compare import compare_runs

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunSummary",
    "compare_runs",
    "dump_config",
    "emit_plot",
    "load_config",
    "moving_average",
    "parse_config",
    "read_run_dir",
    "run_experiment",
    "run_seed",
    "write_csv",
]
