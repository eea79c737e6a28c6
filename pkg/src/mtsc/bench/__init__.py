"""Experiment drivers: synthetic data, scenario runs, sweeps, plots, CLI."""

from .config import (MODE_ALIASES, RunConfig, SweepSpec, build_run_config,
                     build_sweep_spec, config_hash, load_config_file,
                     parse_config_text)
from .plots import PALETTE, emit_plot, parse_plot_csv
from .runner import (FamilyRun, family_run, prepare_run, run_scenario,
                     size_sweep)
from .synth import KINDS, NOISE_SIGMA, RETURN_SCALE, gen_synthetic

__all__ = [
    "MODE_ALIASES", "RunConfig", "SweepSpec", "build_run_config",
    "build_sweep_spec", "config_hash", "load_config_file",
    "parse_config_text", "PALETTE", "emit_plot", "parse_plot_csv",
    "FamilyRun", "family_run", "prepare_run", "run_scenario", "size_sweep",
    "KINDS", "NOISE_SIGMA", "RETURN_SCALE", "gen_synthetic",
]
