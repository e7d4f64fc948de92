import numpy as np
import pytest

from covertbeam import linalg


def test_eig_identity():
    vals, vecs = linalg.hermitian_eig(np.eye(3))
    assert np.allclose(vals, [1.0, 1.0, 1.0])
    assert np.allclose(vecs @ vecs.conj().T, np.eye(3))


def test_eig_diagonal_descending():
    vals, vecs = linalg.hermitian_eig(np.diag([2.0, 1.0]))
    assert np.allclose(vals, [2.0, 1.0])
    assert np.allclose(np.abs(vecs), np.eye(2))


def test_eig_reconstruction_oracle():
    rng = np.random.default_rng(1)
    a = linalg.random_hermitian(5, rng)
    vals, vecs = linalg.hermitian_eig(a)
    recon = (vecs * vals) @ vecs.conj().T
    assert np.linalg.norm(recon - a) <= 1e-10 * np.linalg.norm(a)
    assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(5)) <= 1e-10


def test_eig_property_sweep_dims_to_16():
    rng = np.random.default_rng(2)
    for dim in range(1, 17):
        a = linalg.random_hermitian(dim, rng)
        vals, vecs = linalg.hermitian_eig(a)
        assert np.all(np.diff(vals) <= 1e-12)
        recon = (vecs * vals) @ vecs.conj().T
        assert np.linalg.norm(recon - a) <= 1e-10 * max(np.linalg.norm(a), 1e-300)
        assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(dim)) <= 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(linalg.NotHermitianError):
        linalg.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_sqrt_identity_and_diagonal():
    assert np.allclose(linalg.psd_sqrt(np.eye(4)), np.eye(4))
    assert np.allclose(linalg.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_psd_sqrt_squaring_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        w = linalg.random_psd(6, rng)
        root = linalg.psd_sqrt(w)
        assert np.linalg.norm(root @ root - w) <= 1e-9 * np.linalg.norm(w)
        assert np.min(np.linalg.eigvalsh(root)) >= -1e-10 * np.linalg.norm(root)


def test_psd_sqrt_clamps_small_negatives():
    w = np.diag([1.0, -1e-12])
    root = linalg.psd_sqrt(w)
    assert root[1, 1] == 0.0


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(linalg.NotPsdError):
        linalg.psd_sqrt(np.diag([1.0, -0.5]))


def test_null_projector_basis_vector():
    p = linalg.null_projector(np.array([1.0, 0.0], dtype=complex))
    assert np.allclose(p, np.diag([0.0, 1.0]))


def test_null_projector_properties():
    rng = np.random.default_rng(4)
    for _ in range(10):
        t = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        p = linalg.null_projector(t)
        assert np.linalg.norm(p @ t) <= 1e-12 * np.linalg.norm(t)
        assert np.linalg.norm(p @ p - p) <= 1e-12
        assert np.linalg.norm(p - p.conj().T) <= 1e-12


def test_null_projector_zero_vector_is_identity():
    assert np.allclose(linalg.null_projector(np.zeros(3)), np.eye(3))


def test_rank_one_extract_construct_then_extract():
    u = np.array([1.0, 1.0j]) / np.sqrt(2.0)
    w = 4.0 * np.outer(u, u.conj())
    v = linalg.rank_one_extract(w)
    assert np.linalg.norm(np.outer(v, v.conj()) - w) <= 1e-9 * np.linalg.norm(w)


def test_rank_one_extract_zero_matrix():
    assert np.allclose(linalg.rank_one_extract(np.zeros((3, 3))), np.zeros(3))


def test_rank_one_extract_degenerate_spectrum():
    v1 = linalg.rank_one_extract(np.eye(2))
    v2 = linalg.rank_one_extract(np.eye(2))
    assert np.allclose(v1, v2)  # deterministic choice
    assert abs(np.linalg.norm(v1) - 1.0) <= 1e-12
