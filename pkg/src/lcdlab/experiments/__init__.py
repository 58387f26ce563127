"""Experiment harness: distance-to-span runs, probes, and property suites."""

from .distance import (
    DistanceExperimentConfig,
    ExperimentRecord,
    PowerLawFit,
    fit_power_law,
    run_distance_experiment,
)
from .io import emit_records, parse_records, render_csv, write_plots
from .probes import (
    run_compressible_probe,
    run_tensorization_probe,
    run_unstructured_probe,
)
from .properties import run_property_suite

__all__ = [
    "DistanceExperimentConfig",
    "ExperimentRecord",
    "PowerLawFit",
    "fit_power_law",
    "run_distance_experiment",
    "emit_records",
    "parse_records",
    "render_csv",
    "write_plots",
    "run_compressible_probe",
    "run_tensorization_probe",
    "run_unstructured_probe",
    "run_property_suite",
]
