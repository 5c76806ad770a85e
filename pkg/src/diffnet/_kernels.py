"""Hot numeric kernels: batch 2x2 products, rotation-vector extraction,
distance scans and tuple-product scans.

Every kernel exists in two variants: a numba @njit build (default) and a
pure-numpy fallback.  Set DIFFNET_DISABLE_NUMBA=1 to force the numpy
path; both produce identical results (no fastmath, same operation
order for the 2x2 contractions).  benchmarks/bench_kernels.py times the
two side by side.
"""

from __future__ import annotations

import os

import numpy as np

_SQRT2 = np.sqrt(2.0)
_FOLD_THRESH = np.pi / np.sqrt(2.0)  # single-qubit fold threshold
_FOLD_MAX = np.sqrt(2.0) * np.pi

_DISABLED = os.environ.get("DIFFNET_DISABLE_NUMBA", "") not in ("", "0")
if not _DISABLED:
    try:
        import numba
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

USE_NUMBA = not _DISABLED


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def pair_products_numpy(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """All products A[i] @ B[j], shape (len(A)*len(B), N, N); row index
    is i * len(B) + j."""
    P = np.einsum("aij,bjk->abik", A, B)
    return np.ascontiguousarray(P.reshape(-1, A.shape[1], A.shape[2]))


def su2_vectors_numpy(U: np.ndarray) -> np.ndarray:
    """Folded rotation vectors for a batch of 2x2 unitaries, shape (n, 3).

    Closed form: strip the determinant phase, read the rotation angle off
    the trace and the axis off the Pauli components.  Agrees with the
    general eigendecomposition path after folding.
    """
    U = np.asarray(U, dtype=np.complex128)
    det = U[:, 0, 0] * U[:, 1, 1] - U[:, 0, 1] * U[:, 1, 0]
    phase = np.exp(-0.5j * np.angle(det))
    V = U * phase[:, None, None]
    c = np.clip(np.real(V[:, 0, 0] + V[:, 1, 1]) * 0.5, -1.0, 1.0)
    half = np.arccos(c)  # half rotation angle in [0, pi]
    ax = np.empty((U.shape[0], 3))
    ax[:, 0] = -0.5 * (V[:, 0, 1].imag + V[:, 1, 0].imag)
    ax[:, 1] = 0.5 * (V[:, 1, 0].real - V[:, 0, 1].real)
    ax[:, 2] = -0.5 * (V[:, 0, 0].imag - V[:, 1, 1].imag)
    norm = np.sqrt(np.einsum("ni,ni->n", ax, ax))
    small = norm < 1e-300
    norm[small] = 1.0
    unit = ax / norm[:, None]
    # V = cos(half) I - i sin(half) (n.sigma) = exp(-i half n.sigma), so the
    # log coefficients point along -n.
    mag = -_SQRT2 * half
    over = -mag > _FOLD_THRESH
    mag = np.where(over, _FOLD_MAX + mag, mag)
    mag[small] = 0.0
    return unit * mag[:, None]


def unity_distances_numpy(U: np.ndarray) -> np.ndarray:
    """Folded |r| for a batch of 2x2 unitaries: sqrt(2) acos(|Tr U| / 2)."""
    tr = np.abs(U[:, 0, 0] + U[:, 1, 1])
    return _SQRT2 * np.arccos(np.clip(tr * 0.5, -1.0, 1.0))


def target_distances_numpy(target: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """Distances D(target, mats[i]) for 2x2 unitaries, via the trace of
    target^dag @ mats[i]."""
    tr = np.einsum("ji,nji->n", target.conj(), mats)
    return _SQRT2 * np.arccos(np.clip(np.abs(tr) * 0.5, -1.0, 1.0))


def triple_scan_numpy(mats: np.ndarray, r_max: float) -> np.ndarray:
    """Indices (i, j, k) of all ordered triples with the product
    mats[i] @ mats[j] @ mats[k] within distance r_max of the identity.
    Returned in lexicographic (i, j, k) order, shape (n, 3), int64.
    """
    K = mats.shape[0]
    pairs = pair_products_numpy(mats, mats)  # index j*K + k
    out = []
    for i in range(K):
        prods = np.einsum("ij,njk->nik", mats[i], pairs)
        dist = unity_distances_numpy(prods)
        hits = np.nonzero(dist < r_max)[0]
        if hits.size:
            idx = np.empty((hits.size, 3), dtype=np.int64)
            idx[:, 0] = i
            idx[:, 1] = hits // K
            idx[:, 2] = hits % K
            out.append(idx)
    if not out:
        return np.empty((0, 3), dtype=np.int64)
    return np.concatenate(out)


def commutator_scan_numpy(mats: np.ndarray, r_max: float) -> np.ndarray:
    """Indices (i, j) of ordered pairs whose commutator
    mats[i] mats[j] mats[i]^dag mats[j]^dag lies within r_max of the
    identity.  Lexicographic order, shape (n, 2), int64."""
    K = mats.shape[0]
    dag = mats.conj().transpose(0, 2, 1)
    out = []
    for i in range(K):
        left = np.einsum("ij,njk->nik", mats[i], mats)  # Mi Mj
        left = np.einsum("nij,jk->nik", left, dag[i])  # Mi Mj Mi^dag
        prods = np.einsum("nij,njk->nik", left, dag)  # ... Mj^dag
        dist = unity_distances_numpy(prods)
        hits = np.nonzero(dist < r_max)[0]
        if hits.size:
            idx = np.empty((hits.size, 2), dtype=np.int64)
            idx[:, 0] = i
            idx[:, 1] = hits
            out.append(idx)
    if not out:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _mat2_mul(A, B, C):
        C[0, 0] = A[0, 0] * B[0, 0] + A[0, 1] * B[1, 0]
        C[0, 1] = A[0, 0] * B[0, 1] + A[0, 1] * B[1, 1]
        C[1, 0] = A[1, 0] * B[0, 0] + A[1, 1] * B[1, 0]
        C[1, 1] = A[1, 0] * B[0, 1] + A[1, 1] * B[1, 1]

    @njit(cache=True)
    def _pair_products_nb(A, B):
        a, b = A.shape[0], B.shape[0]
        out = np.empty((a * b, 2, 2), dtype=np.complex128)
        for i in range(a):
            for j in range(b):
                _mat2_mul(A[i], B[j], out[i * b + j])
        return out

    @njit(cache=True)
    def _su2_vectors_nb(U):
        n = U.shape[0]
        out = np.empty((n, 3))
        for m in range(n):
            det = U[m, 0, 0] * U[m, 1, 1] - U[m, 0, 1] * U[m, 1, 0]
            phase = np.exp(-0.5j * np.angle(det))
            v00 = U[m, 0, 0] * phase
            v01 = U[m, 0, 1] * phase
            v10 = U[m, 1, 0] * phase
            v11 = U[m, 1, 1] * phase
            c = (v00.real + v11.real) * 0.5
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            half = np.arccos(c)
            ax = -0.5 * (v01.imag + v10.imag)
            ay = 0.5 * (v10.real - v01.real)
            az = -0.5 * (v00.imag - v11.imag)
            norm = np.sqrt(ax * ax + ay * ay + az * az)
            if norm < 1e-300:
                out[m, 0] = 0.0
                out[m, 1] = 0.0
                out[m, 2] = 0.0
                continue
            mag = -_SQRT2 * half
            if -mag > _FOLD_THRESH:
                mag = _FOLD_MAX + mag
            s = mag / norm
            out[m, 0] = ax * s
            out[m, 1] = ay * s
            out[m, 2] = az * s
        return out

    @njit(cache=True)
    def _unity_distances_nb(U):
        n = U.shape[0]
        out = np.empty(n)
        for m in range(n):
            t = np.abs(U[m, 0, 0] + U[m, 1, 1]) * 0.5
            if t > 1.0:
                t = 1.0
            out[m] = _SQRT2 * np.arccos(t)
        return out

    @njit(cache=True)
    def _target_distances_nb(target, mats):
        n = mats.shape[0]
        td = np.conj(target)
        out = np.empty(n)
        for m in range(n):
            tr = (td[0, 0] * mats[m, 0, 0] + td[1, 0] * mats[m, 1, 0]
                  + td[0, 1] * mats[m, 0, 1] + td[1, 1] * mats[m, 1, 1])
            t = np.abs(tr) * 0.5
            if t > 1.0:
                t = 1.0
            out[m] = _SQRT2 * np.arccos(t)
        return out

    @njit(cache=True)
    def _triple_scan_nb(mats, r_max):
        K = mats.shape[0]
        cos_min = np.cos(r_max / _SQRT2)
        buf = np.empty((K * K, 3), dtype=np.int64)
        chunks = []
        count = 0
        P = np.empty((2, 2), dtype=np.complex128)
        for i in range(K):
            n_i = 0
            for j in range(K):
                _mat2_mul(mats[i], mats[j], P)
                p00, p01 = P[0, 0], P[0, 1]
                p10, p11 = P[1, 0], P[1, 1]
                for k in range(K):
                    tr = (p00 * mats[k, 0, 0] + p01 * mats[k, 1, 0]
                          + p10 * mats[k, 0, 1] + p11 * mats[k, 1, 1])
                    if np.abs(tr) * 0.5 > cos_min:
                        buf[n_i, 0] = i
                        buf[n_i, 1] = j
                        buf[n_i, 2] = k
                        n_i += 1
            if n_i:
                chunks.append(buf[:n_i].copy())
                count += n_i
        out = np.empty((count, 3), dtype=np.int64)
        pos = 0
        for c in chunks:
            out[pos:pos + c.shape[0]] = c
            pos += c.shape[0]
        return out

    @njit(cache=True)
    def _commutator_scan_nb(mats, r_max):
        K = mats.shape[0]
        cos_min = np.cos(r_max / _SQRT2)
        buf = np.empty((K, 2), dtype=np.int64)
        chunks = []
        count = 0
        P = np.empty((2, 2), dtype=np.complex128)
        Q = np.empty((2, 2), dtype=np.complex128)
        R = np.empty((2, 2), dtype=np.complex128)
        dag = np.empty_like(mats)
        for i in range(K):
            dag[i, 0, 0] = np.conj(mats[i, 0, 0])
            dag[i, 0, 1] = np.conj(mats[i, 1, 0])
            dag[i, 1, 0] = np.conj(mats[i, 0, 1])
            dag[i, 1, 1] = np.conj(mats[i, 1, 1])
        for i in range(K):
            n_i = 0
            for j in range(K):
                _mat2_mul(mats[i], mats[j], P)
                _mat2_mul(P, dag[i], Q)
                _mat2_mul(Q, dag[j], R)
                t = np.abs(R[0, 0] + R[1, 1]) * 0.5
                if t > cos_min:
                    buf[n_i, 0] = i
                    buf[n_i, 1] = j
                    n_i += 1
            if n_i:
                chunks.append(buf[:n_i].copy())
                count += n_i
        out = np.empty((count, 2), dtype=np.int64)
        pos = 0
        for c in chunks:
            out[pos:pos + c.shape[0]] = c
            pos += c.shape[0]
        return out

    pair_products = _pair_products_nb
    su2_vectors = _su2_vectors_nb
    unity_distances = _unity_distances_nb
    target_distances = _target_distances_nb
    triple_scan = _triple_scan_nb
    commutator_scan = _commutator_scan_nb
else:
    pair_products = pair_products_numpy
    su2_vectors = su2_vectors_numpy
    unity_distances = unity_distances_numpy
    target_distances = target_distances_numpy
    triple_scan = triple_scan_numpy
    commutator_scan = commutator_scan_numpy
