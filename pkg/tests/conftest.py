import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fastshift import GenSpec, gen_blobs
from fastshift import kernels

# numba's first-call JIT latency trips hypothesis' default deadline
settings.register_profile(
    "suite", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture
def restore_backend():
    """Let a test switch kernels backends without leaking the choice."""
    before = kernels.active_backend()
    yield
    kernels.set_backend(before)


def run_cli(*args, env_extra=None):
    """Invoke the installed CLI in a subprocess with a clean backend env."""
    env = os.environ.copy()
    env.pop("FASTSHIFT_BACKEND", None)   # tests pick the backend explicitly
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "fastshift.cli", *args],
                          capture_output=True, text=True, env=env)


def make_blobs(n=1500, k=10, sigma=0.1, seed=0):
    spec = GenSpec(kind="blobs", n_points=n, n_clusters=k,
                   noise_sigma=sigma, rng_seed=seed)
    return gen_blobs(spec)


def scalar_batch_step(rows, points, h):
    """Plain-python reference for the window-mean kernel, same fold order."""
    rows = np.asarray(rows, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    m, d = rows.shape
    out = np.empty((m, d))
    counts = np.empty(m, dtype=np.int64)
    h2 = h * h
    for s in range(m):
        acc = [0.0] * d
        cnt = 0
        for i in range(points.shape[0]):
            d2 = 0.0
            for k in range(d):
                diff = rows[s, k] - points[i, k]
                d2 += diff * diff
            if d2 <= h2:
                cnt += 1
                for k in range(d):
                    acc[k] += points[i, k]
        counts[s] = cnt
        for k in range(d):
            out[s, k] = acc[k] / cnt if cnt else rows[s, k]
    return out, counts
