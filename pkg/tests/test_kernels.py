import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evmod import _kernels, _pykernels
from conftest import brute_knn


def test_backend_switch_roundtrip():
    prev = _kernels.use_backend("python")
    assert _kernels.active_backend() == "python"
    _kernels.use_backend(prev)
    assert _kernels.active_backend() == prev


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.use_backend("fortran")


@pytest.mark.parametrize("n,k", [(5, 1), (40, 7), (120, 30)])
def test_knn_matches_reference(backend, rng, n, k):
    pts = rng.random((n, 3))
    assert _kernels.knn_bruteforce(pts, k).tolist() == brute_knn(pts, k)


def test_knn_ties_by_index(backend):
    # four points equidistant from the origin point
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=float)
    assert _kernels.knn_bruteforce(pts, 2)[0].tolist() == [1, 2]


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(4, 30), st.just(3)),
              elements=st.integers(0, 6).map(float)))
def test_knn_backends_agree_on_lattice_ties(pts):
    pts = np.unique(pts, axis=0)
    if len(pts) < 3:
        return
    k = min(3, len(pts) - 1)
    expected = _pykernels.knn_bruteforce(pts, k)
    for name in _kernels.available_backends():
        prev = _kernels.use_backend(name)
        try:
            assert np.array_equal(_kernels.knn_bruteforce(pts, k), expected)
        finally:
            _kernels.use_backend(prev)


def test_assign_nearest(backend, rng):
    X = rng.random((50, 4))
    C = rng.random((6, 4))
    labels, d2 = _kernels.assign_nearest(X, C)
    full = ((X[:, None, :] - C[None]) ** 2).sum(-1)
    assert np.array_equal(labels, full.argmin(1))
    np.testing.assert_allclose(d2, full.min(1), rtol=1e-12)


def test_assign_nearest_tie_goes_to_lower_centroid(backend):
    labels, _ = _kernels.assign_nearest(np.array([[0.5]]), np.array([[0.0], [1.0]]))
    assert labels[0] == 0


def test_cluster_distance_sums(backend, rng):
    X = rng.random((70, 3))
    labels = rng.integers(0, 4, 70)
    sums = _kernels.cluster_distance_sums(X, labels, 4)
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    ref = np.stack([D[:, labels == c].sum(1) for c in range(4)], axis=1)
    np.testing.assert_allclose(sums, ref, rtol=1e-12, atol=1e-12)


@pytest.mark.skipif(len(_kernels.available_backends()) < 2, reason="compiled extension not built")
def test_backends_give_same_detections():
    from evmod.detect import detect_partition
    from evmod.events import partition
    from evmod.synth import generate, well_separated

    scene = generate(well_separated(4, 6), 6)
    part = partition(scene.stream, scene.partition_spec)[0]
    out = {}
    for name in _kernels.available_backends():
        prev = _kernels.use_backend(name)
        try:
            d = detect_partition(part).to_dict()
        finally:
            _kernels.use_backend(prev)
        d["sc"] = round(d["sc"], 9)
        out[name] = d
    assert out["compiled"] == out["python"]


def test_benchmark_script_runs(capsys):
    import importlib.util
    import pathlib

    path = pathlib.Path(__file__).parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(["--repeat", "1"])
    assert "detect_partition" in capsys.readouterr().out
