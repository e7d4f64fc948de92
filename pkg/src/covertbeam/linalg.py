"""Dense complex linear algebra kernel shared by the whole package.

Everything operates on plain numpy arrays. Hermitian inputs are validated
(and symmetrized) up front so downstream eigendecompositions are safe.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12


class NotHermitianError(ValueError):
    """Input matrix deviates from A = A^H beyond tolerance."""


class NotPsdError(ValueError):
    """Input matrix has an eigenvalue below the PSD tolerance."""


def as_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate that ``a`` is Hermitian within ``tol`` and return (a + a^H)/2.

    The tolerance is relative to the largest entry magnitude, so tiny
    asymmetries from solver round-off are absorbed while genuinely
    non-Hermitian inputs raise.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    dev = float(np.abs(a - a.conj().T).max())
    if dev > tol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |A - A^H| = {dev:.3e} (scale {scale:.3e})"
        )
    return 0.5 * (a + a.conj().T)


def hermitian_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with A = V diag(vals) V^H and V
    unitary. Raises NotHermitianError for inputs that fail validation.
    """
    h = as_hermitian(a)
    vals, vecs = np.linalg.eigh(h)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def psd_sqrt(w: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [-tol, 0) relative to the largest one are clamped to
    zero (interior-point solutions carry that much noise); anything more
    negative raises NotPsdError.
    """
    vals, vecs = hermitian_eig(w)
    scale = max(1.0, float(vals[0])) if vals.size else 1.0
    if vals.size and vals[-1] < -tol * scale:
        raise NotPsdError(f"matrix is not PSD: min eigenvalue {vals[-1]:.3e}")
    vals = np.clip(vals, 0.0, None)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    return 0.5 * (root + root.conj().T)


def null_projector(t: np.ndarray) -> np.ndarray:
    """Projector onto the orthogonal complement of a vector.

    P = I - t t^H / ||t||^2, so P t = 0 and P is Hermitian idempotent.
    A zero vector carries no constraint direction and yields the identity.
    """
    t = np.asarray(t).reshape(-1)
    n = t.shape[0]
    nrm2 = float(np.real(np.vdot(t, t)))
    if nrm2 == 0.0:
        return np.eye(n, dtype=complex)
    return np.eye(n, dtype=complex) - np.outer(t, t.conj()) / nrm2


def rank_one_extract(w: np.ndarray) -> np.ndarray:
    """Principal rank-one factor of a PSD matrix: sqrt(lambda_1) * v_1.

    For an exactly rank-one W this reconstructs the generating vector up
    to a global phase. With a degenerate top eigenvalue the first computed
    eigenvector is returned; callers must not assume uniqueness.
    """
    vals, vecs = hermitian_eig(w)
    if vals.size == 0:
        return np.zeros(0, dtype=complex)
    lead = max(float(vals[0]), 0.0)
    return np.sqrt(lead) * vecs[:, 0]


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with O(1) entries (testing helper)."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def random_psd(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix B B^H with optional rank control (testing helper)."""
    r = n if rank is None else rank
    b = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    w = b @ b.conj().T
    return 0.5 * (w + w.conj().T)
