"""The active kernel backend must agree exactly with the numpy fallback
(set DIFFNET_DISABLE_NUMBA=1 to run the whole suite on the fallback)."""

import numpy as np
import pytest

from diffnet import _kernels as K
from diffnet import geometry as G


@pytest.fixture(scope="module")
def batch():
    rng = np.random.default_rng(0)
    return np.stack([G.sample_haar_unitary(2, rng) for _ in range(256)])


@pytest.fixture(scope="module")
def near_identity():
    rng = np.random.default_rng(1)
    mats = np.stack([G.sample_haar_unitary(2, rng) for _ in range(60)])
    mats = 0.96 * np.eye(2) + 0.04 * mats
    u, _, vh = np.linalg.svd(mats)
    return np.ascontiguousarray(u @ vh)


def test_backend_name():
    assert K.backend_name() in ("numba", "numpy")
    assert K.backend_name() == ("numba" if K.USE_NUMBA else "numpy")


def test_pair_products(batch):
    a, b = batch[:20], batch[20:50]
    got = K.pair_products(a, b)
    want = K.pair_products_numpy(a, b)
    assert got.shape == (600, 2, 2)
    assert np.abs(got - want).max() < 1e-13
    assert np.abs(got[3 * 30 + 7] - a[3] @ b[7]).max() < 1e-13


def test_su2_vectors(batch):
    got = K.su2_vectors(batch)
    want = K.su2_vectors_numpy(batch)
    assert np.abs(got - want).max() < 1e-12


def test_su2_vectors_matches_eigendecomposition_path(batch):
    fast = K.su2_vectors(batch)
    slow = np.stack([G.unitary_to_vector(U) for U in batch])
    assert np.abs(fast - slow).max() < 1e-9


def test_su2_vectors_identity_and_minus_identity():
    mats = np.stack([np.eye(2), -np.eye(2), 1j * np.eye(2)]).astype(complex)
    assert np.abs(K.su2_vectors(mats)).max() < 1e-12


def test_unity_distances(batch):
    got = K.unity_distances(batch)
    want = K.unity_distances_numpy(batch)
    assert np.abs(got - want).max() < 1e-12
    slow = np.array([G.distance_d(np.eye(2), U) for U in batch])
    assert np.abs(got - slow).max() < 1e-9


def test_target_distances(batch):
    t = batch[0]
    got = K.target_distances(t, batch)
    want = K.target_distances_numpy(t, batch)
    assert np.abs(got - want).max() < 1e-12
    slow = np.array([G.distance_d(t, U) for U in batch])
    # arccos near 1 (t vs itself) only resolves sqrt(machine-eps)
    assert np.abs(got - slow).max() < 1e-7


def test_triple_scan(near_identity):
    got = K.triple_scan(near_identity, 0.15)
    want = K.triple_scan_numpy(near_identity, 0.15)
    assert got.shape == want.shape
    assert np.array_equal(got, want)
    assert got.shape[0] > 0
    # survivors really lie inside the radius; lexicographic order
    for i, j, k in got[:50]:
        P = near_identity[i] @ near_identity[j] @ near_identity[k]
        assert G.distance_d(np.eye(2), P) < 0.15
    assert np.array_equal(got, got[np.lexsort(got.T[::-1])])


def test_commutator_scan(near_identity):
    got = K.commutator_scan(near_identity, 0.01)
    want = K.commutator_scan_numpy(near_identity, 0.01)
    assert got.shape == want.shape
    assert np.array_equal(got, want)
    assert got.shape[0] > 0
    for i, j in got[:50]:
        A, B = near_identity[i], near_identity[j]
        P = A @ B @ A.conj().T @ B.conj().T
        assert G.distance_d(np.eye(2), P) < 0.01
