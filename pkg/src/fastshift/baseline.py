"""Classical per-point mean-shift: every input point walks to its mode.

This engine is the correctness reference for the seeded engine and the
slow column of the benchmark. No neighbor index, no sampling; each walker
repeatedly moves to the mean of the points inside its bandwidth window.
"""

from __future__ import annotations

from dataclasses import dataclass
import time

import numpy as np

from . import kernels
from .core import ClusterResult, ShiftConfig, VectorSet, assign_labels, prune_modes


@dataclass(frozen=True)
class PointTrajectory:
    """End state of one walker: final position, convergence flag, step count."""

    current: np.ndarray
    converged: bool
    iterations: int


def shift_once(x, points: VectorSet, h: float, chunk_size: int = 4096):
    """One window-mean update: ``(new_position, window_count)``.

    The new position is the arithmetic mean of every point within ``h`` of
    ``x`` (boundary included). An empty window is a fixpoint: ``x`` comes
    back unchanged with count 0.
    """
    row = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if row.shape[1] != points.d:
        raise ValueError(f"dimension mismatch: {row.shape[1]} vs {points.d}")
    out, counts = kernels.batch_step(row, points.data, h, chunk_size)
    return out[0], int(counts[0])


def follow_point(x0, points: VectorSet, cfg: ShiftConfig) -> PointTrajectory:
    """Iterate one walker until its shift is at most conv_tol*h or max_iter."""
    pos = np.asarray(x0, dtype=np.float64).copy()
    thresh2 = (cfg.conv_tol * cfg.bandwidth_h) ** 2
    iterations = 0
    converged = False
    while iterations < cfg.max_iter:
        new_pos, _ = shift_once(pos, points, cfg.bandwidth_h, cfg.chunk_size)
        iterations += 1
        shift2 = kernels.row_sq_dist(new_pos.reshape(1, -1), pos.reshape(1, -1))[0]
        pos = new_pos
        if shift2 <= thresh2:
            converged = True
            break
    return PointTrajectory(current=pos, converged=converged, iterations=iterations)


def run_baseline(points: VectorSet, cfg: ShiftConfig) -> ClusterResult:
    """Full classical mean-shift over every input point.

    All walkers advance in lockstep sweeps; a sweep updates only walkers
    that have not yet converged, so each walker's iterates are identical to
    running :func:`follow_point` on it alone. End positions (converged or
    not at max_iter) become raw modes of support 1 and are merged by
    ``prune_modes``; labels are nearest-mode over the original points.

    ``distance_evals`` counts window scans only (sum over walkers of
    iterations times n); pruning and labeling are excluded.
    """
    t0 = time.perf_counter()
    n = points.n
    h = cfg.bandwidth_h
    thresh2 = (cfg.conv_tol * h) ** 2

    positions = points.data.copy()
    done = np.zeros(n, dtype=bool)
    evals = 0
    sweeps = 0
    while not done.all() and sweeps < cfg.max_iter:
        idx = np.flatnonzero(~done)
        moved, _ = kernels.batch_step(positions[idx], points.data, h,
                                      cfg.chunk_size)
        evals += idx.size * n
        sweeps += 1
        shift2 = kernels.row_sq_dist(moved, positions[idx])
        positions[idx] = moved
        done[idx] = shift2 <= thresh2

    mode_set = prune_modes(positions, np.ones(n, dtype=np.int64), h,
                           cfg.min_mode_support)
    labels = assign_labels(points, mode_set, cfg.chunk_size)
    return ClusterResult(
        labels=labels,
        mode_set=mode_set,
        iterations_run=sweeps,
        seeds_used=0,
        seeds_discarded=0,
        wall_time_s=time.perf_counter() - t0,
        distance_evals=evals,
    )
