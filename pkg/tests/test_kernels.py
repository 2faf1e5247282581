import numpy as np
import pytest

from rangemos.kernels import _numpy_impl, backend_name

from conftest import KERNEL_IMPLS

cython_missing = len(KERNEL_IMPLS) < 2


class TestScatterArgmin:
    @pytest.mark.parametrize("impl", KERNEL_IMPLS, ids=lambda m: m.BACKEND_NAME)
    def test_basic_min_selection(self, impl):
        cells = np.array([3, 3, 1, 3], dtype=np.int64)
        values = np.array([5.0, 2.0, 9.0, 7.0])
        out = impl.scatter_argmin(cells, values, 4)
        assert out.tolist() == [-1, 2, -1, 1]

    @pytest.mark.parametrize("impl", KERNEL_IMPLS, ids=lambda m: m.BACKEND_NAME)
    def test_tie_goes_to_lowest_index(self, impl):
        cells = np.zeros(3, dtype=np.int64)
        values = np.array([4.0, 4.0, 4.0])
        assert impl.scatter_argmin(cells, values, 1).tolist() == [0]

    @pytest.mark.parametrize("impl", KERNEL_IMPLS, ids=lambda m: m.BACKEND_NAME)
    def test_empty(self, impl):
        out = impl.scatter_argmin(np.zeros(0, np.int64), np.zeros(0), 5)
        assert out.tolist() == [-1] * 5

    @pytest.mark.skipif(cython_missing, reason="compiled kernels unavailable")
    def test_backends_bit_identical(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(0, 5000))
            cells = rng.integers(0, 512, n).astype(np.int64)
            values = rng.uniform(0, 100, n)
            # inject exact duplicates to exercise tie-breaking
            if n > 10:
                values[::7] = values[0]
            a = KERNEL_IMPLS[0].scatter_argmin(cells, values, 512)
            b = KERNEL_IMPLS[1].scatter_argmin(cells, values, 512)
            np.testing.assert_array_equal(a, b)


class TestKnnVote:
    @staticmethod
    def _fixture(rng, n=2000, height=32, width=64):
        anchor_u = rng.integers(-1, width, n).astype(np.int64)
        anchor_v = np.where(anchor_u < 0, -1, rng.integers(0, height, n)).astype(np.int64)
        point_range = rng.uniform(1, 50, n)
        input_label = rng.integers(0, 2, n).astype(np.uint8)
        image_range = rng.uniform(1, 50, (height, width))
        image_valid = (rng.uniform(size=(height, width)) < 0.8).astype(np.uint8)
        pixel_label = rng.integers(0, 2, (height, width)).astype(np.uint8)
        return anchor_u, anchor_v, point_range, input_label, image_range, image_valid, pixel_label

    @pytest.mark.skipif(cython_missing, reason="compiled kernels unavailable")
    @pytest.mark.parametrize("k,window", [(1, 3), (5, 5), (3, 7)])
    def test_backends_agree(self, k, window):
        rng = np.random.default_rng(k * 10 + window)
        args = self._fixture(rng)
        a = KERNEL_IMPLS[0].knn_vote(*args, k, window, 2.0, False)
        b = KERNEL_IMPLS[1].knn_vote(*args, k, window, 2.0, False)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.skipif(cython_missing, reason="compiled kernels unavailable")
    def test_backends_agree_inverse_weighting(self):
        rng = np.random.default_rng(99)
        args = self._fixture(rng)
        a = KERNEL_IMPLS[0].knn_vote(*args, 5, 5, 2.0, True)
        b = KERNEL_IMPLS[1].knn_vote(*args, 5, 5, 2.0, True)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("impl", KERNEL_IMPLS, ids=lambda m: m.BACKEND_NAME)
    def test_negative_anchor_keeps_label(self, impl):
        out = impl.knn_vote(
            np.array([-1], dtype=np.int64),
            np.array([-1], dtype=np.int64),
            np.array([10.0]),
            np.array([1], dtype=np.uint8),
            np.full((4, 4), 10.0),
            np.ones((4, 4), dtype=np.uint8),
            np.zeros((4, 4), dtype=np.uint8),
            3,
            3,
            1.0,
            False,
        )
        assert out.tolist() == [1]


def test_backend_name_reports_active():
    assert backend_name() in ("cython", "numpy")
    assert _numpy_impl.BACKEND_NAME == "numpy"
