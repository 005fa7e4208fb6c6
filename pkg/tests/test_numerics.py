import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uwofdm_lab.numerics import block_partition, dft_matrix, hermitian, idft_matrix, pseudo_inverse, wrap_angle


def test_dft_small_cases():
    np.testing.assert_allclose(dft_matrix(2), [[1, 1], [1, -1]], atol=1e-15)
    assert abs(dft_matrix(4)[1, 1] - (-1j)) < 1e-15


def test_dft_idft_identity():
    assert np.abs(dft_matrix(64) @ idft_matrix(64) - np.eye(64)).max() < 1e-12
    np.testing.assert_allclose(idft_matrix(8), dft_matrix(8).conj().T / 8)


@pytest.mark.parametrize("n", [1, 3, 16, 64, 256])
def test_dft_scaled_unitary(n):
    F = dft_matrix(n)
    assert np.abs(F.conj().T @ F - n * np.eye(n)).max() < 1e-10


def test_dft_rejects_zero():
    with pytest.raises(ValueError):
        dft_matrix(0)


def test_dft_read_only():
    with pytest.raises(ValueError):
        dft_matrix(4)[0, 0] = 2


def test_pinv_examples():
    np.testing.assert_allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(pseudo_inverse(np.array([[2.0, 0], [0, 0]])), [[0.5, 0], [0, 0]])


def test_pinv_penrose(rng):
    M = rng.standard_normal((16, 48)) + 1j * rng.standard_normal((16, 48))
    P = pseudo_inverse(M)
    scale = np.linalg.norm(M)
    assert np.abs(M @ P @ M - M).max() < 1e-9
    assert np.abs(P @ M @ P - P).max() < 1e-10 * max(1, np.linalg.norm(P))
    assert np.abs(hermitian(M @ P) - M @ P).max() < 1e-10 * scale
    assert np.abs(hermitian(P @ M) - P @ M).max() < 1e-10 * scale


def test_pinv_square_is_inverse(rng):
    M = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    inv = np.linalg.inv(M)
    assert np.linalg.norm(pseudo_inverse(M) - inv) / np.linalg.norm(inv) < 1e-9


def test_block_partition_examples(rng):
    blocks = block_partition(np.eye(4), 2, 2)
    for b, ref in zip(blocks, (np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2))):
        np.testing.assert_array_equal(b, ref)
    M = rng.standard_normal((64, 48))
    parts = block_partition(M, 48, 32)
    assert [p.shape for p in parts] == [(48, 32), (48, 16), (16, 32), (16, 16)]
    np.testing.assert_array_equal(np.block([[parts[0], parts[1]], [parts[2], parts[3]]]), M)


@pytest.mark.parametrize("split", [(0, 1), (1, 0), (4, 1), (1, 4)])
def test_block_partition_rejects(split):
    with pytest.raises(ValueError):
        block_partition(np.eye(4), *split)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.data())
def test_block_partition_roundtrip(rows, cols, data):
    r = data.draw(st.integers(1, rows - 1))
    c = data.draw(st.integers(1, cols - 1))
    M = np.arange(rows * cols, dtype=float).reshape(rows, cols) * (1 + 1j)
    a, b, cc, d = block_partition(M, r, c)
    np.testing.assert_array_equal(np.block([[a, b], [cc, d]]), M)


@settings(max_examples=200, deadline=None)
@given(st.floats(-100, 100, allow_nan=False))
def test_wrap_angle_range(x):
    w = wrap_angle(x)
    assert -np.pi < w <= np.pi
    assert abs(np.exp(1j * w) - np.exp(1j * x)) < 1e-9


def test_determinism(rng):
    M = rng.standard_normal((8, 5))
    assert np.array_equal(pseudo_inverse(M), pseudo_inverse(M.copy()))
