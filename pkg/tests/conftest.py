import numpy as np
import pytest

from rangemos.kernels import _numpy_impl

try:
    from rangemos.kernels import _core
except ImportError:  # compiled extension missing; numpy-only run
    _core = None

KERNEL_IMPLS = [_numpy_impl] + ([_core] if _core is not None else [])


@pytest.fixture(params=KERNEL_IMPLS, ids=lambda impl: impl.BACKEND_NAME)
def kernel_backend(request, monkeypatch):
    """Run the test under each available kernel backend."""
    impl = request.param
    for module in ("rangemos.projection", "rangemos.association"):
        monkeypatch.setattr(f"{module}.scatter_argmin", impl.scatter_argmin)
    monkeypatch.setattr("rangemos.postprocess.knn_vote", impl.knn_vote)
    return impl


def random_cloud(rng: np.random.Generator, n: int, fov_up: float, fov_down: float):
    """Random points inside the vertical FOV at ranges 2..50 m."""
    from rangemos import PointCloud

    yaw = rng.uniform(-np.pi, np.pi, n)
    margin = 0.02 * (fov_up - fov_down)
    pitch = rng.uniform(fov_down + margin, fov_up - margin, n)
    r = rng.uniform(2.0, 50.0, n)
    xyz = np.column_stack(
        [
            r * np.cos(pitch) * np.cos(yaw),
            r * np.cos(pitch) * np.sin(yaw),
            r * np.sin(pitch),
        ]
    )
    return PointCloud(xyz, rng.uniform(0.0, 1.0, n))
