"""Neural-operator ground-motion pipeline.

Thin re-export of the compiled core: geology sampling, the elastic
wavefield solver, the U-shaped Fourier operator with its trainer, and
the waveform metrics used to compare predictions against simulations.
"""

from ._core import (
    GeologyConfig,
    GofReport,
    GofScores,
    SimConfig,
    SourceSpec,
    SurfaceRecord,
    TrainingConfig,
    TrainResult,
    EpochStats,
    UnoModel,
    UnoSchedule,
    compute_norm_stats,
    cwt_morlet,
    fourier_amplitude_spectrum,
    generate_geology,
    gof_envelope_phase,
    gof_report,
    interpolate_surface,
    log_spaced_freqs,
    mae_loss,
    mae_per_component,
    moment_tensor_from_angles,
    pgv_euclidean,
    pgv_per_component,
    read_tensor,
    run_simulation,
    source_time_function,
    split_dataset,
    train,
    write_tensor,
)

__all__ = [
    "GeologyConfig",
    "GofReport",
    "GofScores",
    "SimConfig",
    "SourceSpec",
    "SurfaceRecord",
    "TrainingConfig",
    "TrainResult",
    "EpochStats",
    "UnoModel",
    "UnoSchedule",
    "compute_norm_stats",
    "cwt_morlet",
    "fourier_amplitude_spectrum",
    "generate_geology",
    "gof_envelope_phase",
    "gof_report",
    "interpolate_surface",
    "log_spaced_freqs",
    "mae_loss",
    "mae_per_component",
    "moment_tensor_from_angles",
    "pgv_euclidean",
    "pgv_per_component",
    "read_tensor",
    "run_simulation",
    "source_time_function",
    "split_dataset",
    "train",
    "write_tensor",
]
