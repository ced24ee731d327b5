"""Backend contract: numba and numpy kernels agree bit for bit, and the
fold order makes results independent of chunking and threading."""

import numpy as np
import pytest

from fastshift import kernels

from conftest import scalar_batch_step

rng = np.random.default_rng(1234)
POINTS = rng.normal(size=(257, 3))
ROWS = POINTS[rng.choice(257, size=41, replace=False)] + 0.01
H = 0.9

BACKENDS = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request, restore_backend):
    kernels.set_backend(request.param)
    return request.param


def test_batch_step_matches_scalar_loop_bitwise(backend):
    out, counts = kernels.batch_step(ROWS, POINTS, H, 64)
    ref_out, ref_counts = scalar_batch_step(ROWS, POINTS, H)
    assert out.tobytes() == ref_out.tobytes()
    assert np.array_equal(counts, ref_counts)


def test_batch_step_chunk_size_invariant_bitwise(backend):
    base, counts = kernels.batch_step(ROWS, POINTS, H, POINTS.shape[0])
    for chunk in (1, 7, 64, 4096):
        out, c = kernels.batch_step(ROWS, POINTS, H, chunk)
        assert out.tobytes() == base.tobytes(), f"chunk={chunk}"
        assert np.array_equal(c, counts)


def test_batch_step_backends_agree_bitwise(restore_backend):
    if not kernels.HAS_NUMBA:
        pytest.skip("numba not installed")
    kernels.set_backend("numba")
    a, ca = kernels.batch_step(ROWS, POINTS, H, 50)
    kernels.set_backend("numpy")
    b, cb = kernels.batch_step(ROWS, POINTS, H, 50)
    assert a.tobytes() == b.tobytes()
    assert np.array_equal(ca, cb)


def test_batch_step_row_blocking_path_bitwise(restore_backend):
    # enough rows to force the numpy row-block path (4M // chunk budget)
    big_rows = rng.normal(size=(1500, 2))
    pts = rng.normal(size=(3000, 2))
    kernels.set_backend("numpy")
    blocked, cb = kernels.batch_step(big_rows, pts, 1.2, 3000)
    ref, cr = scalar_batch_step(big_rows[:13], pts, 1.2)
    assert blocked[:13].tobytes() == ref.tobytes()
    if kernels.HAS_NUMBA:
        kernels.set_backend("numba")
        nb, cn = kernels.batch_step(big_rows, pts, 1.2, 3000)
        assert blocked.tobytes() == nb.tobytes()
        assert np.array_equal(cb, cn)


def test_batch_step_empty_window_keeps_row(backend):
    far = np.array([[1e6, 1e6, 1e6]])
    out, counts = kernels.batch_step(far, POINTS, H, 64)
    assert counts[0] == 0
    assert out.tobytes() == far.tobytes()


def test_thread_count_does_not_change_bits(restore_backend):
    if not kernels.HAS_NUMBA:
        pytest.skip("numba not installed")
    kernels.set_backend("numba")
    kernels.set_threads(1)
    a, _ = kernels.batch_step(ROWS, POINTS, H, 64)
    applied = kernels.set_threads(4)  # clamped to the host allowance
    b, _ = kernels.batch_step(ROWS, POINTS, H, 64)
    assert applied >= 1
    assert a.tobytes() == b.tobytes()


def test_set_threads_validation():
    with pytest.raises(ValueError):
        kernels.set_threads(0)


def test_nearest_labels_matches_argmin(backend):
    modes = rng.normal(size=(6, 3))
    labels = kernels.nearest_labels(POINTS, modes, 32)
    d2 = ((POINTS[:, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
    assert np.array_equal(labels, np.argmin(d2, axis=1))


def test_nearest_labels_tie_goes_to_lower_index(backend):
    modes = np.array([[1.0, 0.0], [-1.0, 0.0]])
    pts = np.array([[0.0, 0.0], [0.0, 5.0]])
    labels = kernels.nearest_labels(pts, modes, 16)
    assert labels.tolist() == [0, 0]


def test_greedy_prune_backends_agree(restore_backend):
    cands = rng.normal(size=(300, 2))
    supports = rng.integers(1, 10, size=300)
    kernels.set_backend("numpy")
    ia, sa = kernels.greedy_prune(cands, supports, 0.8)
    if kernels.HAS_NUMBA:
        kernels.set_backend("numba")
        ib, sb = kernels.greedy_prune(cands, supports, 0.8)
        assert np.array_equal(ia, ib)
        assert np.array_equal(sa, sb)
    # every accepted pair is separated by more than h
    kept = cands[ia]
    for i in range(len(ia)):
        for j in range(i + 1, len(ia)):
            assert np.linalg.norm(kept[i] - kept[j]) > 0.8
    assert sa.sum() == supports.sum()


def test_greedy_prune_folds_support_into_nearest(backend):
    cands = np.array([[0.0, 0.0], [0.05, 0.0], [10.0, 0.0], [10.1, 0.0]])
    supports = np.array([5, 3, 4, 2])
    idx, merged = kernels.greedy_prune(cands, supports, 1.0)
    assert idx.tolist() == [0, 2]
    assert merged.tolist() == [8, 6]


def test_backend_selection_validation(restore_backend):
    with pytest.raises(ValueError):
        kernels.set_backend("gpu")
    kernels.set_backend("numpy")
    assert kernels.active_backend() == "numpy"


def test_row_sq_dist_matches_scalar():
    a = rng.normal(size=(20, 4))
    b = rng.normal(size=(20, 4))
    got = kernels.row_sq_dist(a, b)
    for i in range(20):
        d2 = 0.0
        for k in range(4):
            diff = a[i, k] - b[i, k]
            d2 += diff * diff
        assert got[i] == d2
