"""Geometry of special-unitary matrices.

A unitary U (global phase ignored) is represented by a real vector r of
dimension d = N^2 - 1: the coefficients of the traceless part of -i log U
in an orthonormal basis of Hermitian traceless generators.  The identity
sits at the origin; distances between unitaries are lengths of such
vectors.  For qubit assemblies (N = 2^n) the vectors U and -U are
identified by a folding map that sends the outer surface of the r-ball
back toward the origin.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ValidationError

UNITARITY_TOL = 1e-10

# Re-unitarize long gate products once per this many multiplications to
# bound floating-point drift.
REUNITARIZE_EVERY = 32


def check_unitary(U: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    """Validate that U is unitary within tol (max-norm of U U^dag - I).

    Returns U as a complex array.  Raises ValidationError otherwise;
    inputs are never silently repaired.
    """
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {U.shape}")
    defect = np.abs(U @ U.conj().T - np.eye(U.shape[0])).max()
    if defect > tol:
        raise ValidationError(
            f"matrix is not unitary: max |U U^dag - I| = {defect:.3e} > {tol:.1e}"
        )
    return U


def project_unitary(M: np.ndarray) -> np.ndarray:
    """Nearest unitary to M in Frobenius norm (polar projection via SVD)."""
    W, _, Vh = np.linalg.svd(np.asarray(M, dtype=np.complex128))
    return W @ Vh


def make_generator_basis(N: int) -> np.ndarray:
    """Orthonormal Hermitian traceless generators of su(N), shape (d, N, N).

    Generalized Gell-Mann family rescaled so Tr(g_i g_j) = delta_ij.
    Ordering is fixed: symmetric pairs (j, k) with j < k in lexicographic
    order, then the antisymmetric pairs in the same order, then the
    diagonal generators.  For N = 2 this is (sigma_x, sigma_y, sigma_z)/sqrt(2).
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ValidationError(f"generator basis needs integer N >= 2, got {N!r}")
    gens = []
    s = 1.0 / np.sqrt(2.0)
    for j in range(N):
        for k in range(j + 1, N):
            g = np.zeros((N, N), dtype=np.complex128)
            g[j, k] = s
            g[k, j] = s
            gens.append(g)
    for j in range(N):
        for k in range(j + 1, N):
            g = np.zeros((N, N), dtype=np.complex128)
            g[j, k] = -1j * s
            g[k, j] = 1j * s
            gens.append(g)
    for l in range(1, N):
        diag = np.zeros(N)
        diag[:l] = 1.0
        diag[l] = -float(l)
        diag /= np.sqrt(l * (l + 1))
        gens.append(np.diag(diag).astype(np.complex128))
    return np.array(gens)


def _fold_threshold(N: int) -> float:
    # 2^(n/2 - 1) * pi for N = 2^n
    n = int(N).bit_length() - 1
    return 2.0 ** (n / 2.0 - 1.0) * np.pi


def _fold_max(N: int) -> float:
    n = int(N).bit_length() - 1
    return 2.0 ** (n / 2.0) * np.pi


def fold_vector(r: np.ndarray, N: int) -> np.ndarray:
    """Identify U and -U in vector coordinates (qubit assemblies only).

    If |r| exceeds half the ball radius, the point is reflected back:
    r -> -r (r_max - |r|) / |r|.  Idempotent.  Raises for N that is not
    a power of two, where the identification is undefined.
    """
    if N < 2 or (N & (N - 1)) != 0:
        raise ValidationError(
            f"folding is defined only for qubit assemblies (N = 2^n), got N={N}"
        )
    r = np.asarray(r, dtype=np.float64)
    norm = float(np.linalg.norm(r))
    if norm <= _fold_threshold(N):
        return r.copy()
    return -r * ((_fold_max(N) - norm) / norm)


def unitary_to_vector(U: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Map a unitary to its rotation vector r (length d = N^2 - 1).

    Principal matrix logarithm via a complex Schur decomposition
    (eigenphases in (-pi, pi]), global-phase (trace) part discarded,
    projected onto the generator basis, and folded when N is a power of
    two.  The Schur form of a normal matrix is diagonal, so the
    eigenvector columns are orthonormal even for degenerate spectra.
    """
    U = check_unitary(U)
    N = U.shape[0]
    if basis is None:
        basis = make_generator_basis(N)
    if basis.shape[1] != N:
        raise ValidationError(
            f"basis dimension {basis.shape[1]} does not match matrix dimension {N}"
        )
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diagonal(T))  # in (-pi, pi]
    phases = phases - phases.mean()  # discard global phase
    H = (Z * phases) @ Z.conj().T  # Hermitian traceless log
    r = np.real(np.einsum("ij,nji->n", H, basis))
    if N >= 2 and (N & (N - 1)) == 0:
        r = fold_vector(r, N)
    return r


def vector_to_unitary(r: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Inverse of the vector map: exp(i r . g).  Round-trips below the
    fold threshold within 1e-10."""
    r = np.asarray(r, dtype=np.float64)
    if not np.all(np.isfinite(r)):
        raise ValidationError("vector components must be finite")
    if r.shape[0] != basis.shape[0]:
        raise ValidationError(
            f"vector dimension {r.shape[0]} does not match basis size {basis.shape[0]}"
        )
    H = np.einsum("n,nij->ij", r, basis)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)) @ V.conj().T


def distance_d(U1: np.ndarray, U2: np.ndarray) -> float:
    """Rotation-vector distance: |r(U1^-1 U2)|, inverses taken as
    conjugate transposes.  Symmetric and invariant under global phases."""
    U1 = np.asarray(U1, dtype=np.complex128)
    U2 = np.asarray(U2, dtype=np.complex128)
    if U1.shape != U2.shape:
        raise ValidationError(f"dimension mismatch: {U1.shape} vs {U2.shape}")
    return float(np.linalg.norm(unitary_to_vector(U1.conj().T @ U2)))


def distance_df(U1: np.ndarray, U2: np.ndarray) -> float:
    """Fidelity distance sqrt((N - |Tr(U1 U2^-1)|) / N), phase-insensitive.

    Defined with N = 2 for qubits; for larger N the trace bound N replaces
    2 in both places.
    """
    U1 = np.asarray(U1, dtype=np.complex128)
    U2 = np.asarray(U2, dtype=np.complex128)
    if U1.shape != U2.shape:
        raise ValidationError(f"dimension mismatch: {U1.shape} vs {U2.shape}")
    N = U1.shape[0]
    t = min(abs(np.trace(U1 @ U2.conj().T)), float(N))
    return float(np.sqrt((N - t) / N))


def sample_haar_unitary(N: int, seed: int | np.random.Generator) -> np.ndarray:
    """Haar-distributed U(N) matrix: QR of a complex Ginibre matrix with
    the R-diagonal phases absorbed into Q.  Deterministic per seed."""
    if N < 2:
        raise ValidationError(f"need N >= 2, got {N}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    Z = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))
