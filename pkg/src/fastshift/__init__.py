"""Mean-shift clustering, classical and seeded-batch, with benchmarks."""

from .baseline import PointTrajectory, follow_point, run_baseline, shift_once
from .controller import (
    ControllerState,
    coverage_probability,
    min_seed_bound,
    next_seed_count,
    run_adaptive,
)
from .core import (
    ClusterResult,
    ConfigError,
    ModeSet,
    NoConvergedSeedsError,
    NoModesError,
    ShiftConfig,
    VectorSet,
    assign_labels,
    estimate_bandwidth,
    euclidean_distance,
    kde_value,
    prune_modes,
    window_mask,
)
from .datagen import GenSpec, gen_blobs, gen_variants, generate
from .faster import (
    SeedBatch,
    batch_shift_iteration,
    early_stop_check,
    run_faster,
    sample_seeds,
)
from .kernels import active_backend, set_backend, set_threads
from .metrics import BenchRecord, bench_run, mode_match, rand_index

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "ClusterResult",
    "ConfigError",
    "ControllerState",
    "GenSpec",
    "ModeSet",
    "NoConvergedSeedsError",
    "NoModesError",
    "PointTrajectory",
    "SeedBatch",
    "ShiftConfig",
    "VectorSet",
    "active_backend",
    "assign_labels",
    "batch_shift_iteration",
    "bench_run",
    "coverage_probability",
    "early_stop_check",
    "estimate_bandwidth",
    "euclidean_distance",
    "follow_point",
    "gen_blobs",
    "gen_variants",
    "generate",
    "kde_value",
    "min_seed_bound",
    "mode_match",
    "next_seed_count",
    "prune_modes",
    "rand_index",
    "run_adaptive",
    "run_baseline",
    "run_faster",
    "sample_seeds",
    "set_backend",
    "set_threads",
    "shift_once",
    "window_mask",
]
