"""Dense linear algebra for small Hermitian matrices.

Everything in this package runs on complex128 numpy arrays of side at most
a few dozen, so the routines here favour clarity and strict validation over
asymptotic cleverness.  All tolerances used across the package live in the
constants at the top of this module.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Hermiticity check: |m - m^dag| entrywise.
HERM_TOL = 1e-12
# Eigendecomposition reconstruction quality per unit dimension.
EIG_TOL = 1e-10
# An operator counts as PSD when its minimum eigenvalue is >= -PSD_TOL.
PSD_TOL = 1e-9
# Hard cap on the side of anything we eigendecompose.
MAX_DIM = 64
# Hard cap on the side of a Kronecker product result.
MAX_KRON_SIDE = 4096


def _as_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m.astype(np.complex128, copy=False)


def require_hermitian(m: np.ndarray, tol: float = HERM_TOL, name: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is Hermitian within ``tol`` and return (m + m^dag)/2.

    The symmetrised copy is returned so downstream eigensolvers see an
    exactly Hermitian operator even when ``m`` carries roundoff dust.
    """
    m = _as_square(m, name)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"{name} is not Hermitian: max deviation {dev:.3e} exceeds {tol:.1e}")
    return 0.5 * (m + m.conj().T)


def eig_hermitian(h: np.ndarray, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and columns of ``v``
    orthonormal eigenvectors, so ``v @ diag(w) @ v^dag`` reconstructs the
    input.  Rejects non-Hermitian input and matrices larger than ``MAX_DIM``.
    """
    h = require_hermitian(h, tol=tol, name="eig_hermitian input")
    if h.shape[0] > MAX_DIM:
        raise ValueError(f"eig_hermitian supports side <= {MAX_DIM}, got {h.shape[0]}")
    w, v = np.linalg.eigh(h)
    return w, v


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with a guard on the result size."""
    a = np.asarray(a)
    b = np.asarray(b)
    side_r = a.shape[0] * b.shape[0]
    side_c = a.shape[1] * b.shape[1]
    if side_r > MAX_KRON_SIDE or side_c > MAX_KRON_SIDE:
        raise ValueError(
            f"kron result of shape ({side_r}, {side_c}) exceeds the "
            f"{MAX_KRON_SIDE} per-side limit"
        )
    return np.kron(a, b)


def _check_bipartite(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    m = _as_square(m, "bipartite matrix")
    d0, d1 = dims
    if d0 <= 0 or d1 <= 0 or d0 * d1 != m.shape[0]:
        raise ValueError(f"dims {dims} do not factor a matrix of side {m.shape[0]}")
    return m


def partial_trace(m: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one tensor factor of a bipartite operator.

    ``dims = (d0, d1)`` gives the factor sizes in the same order as the
    Kronecker structure of ``m``; ``keep`` selects the factor (0 or 1) that
    survives.
    """
    m = _check_bipartite(m, dims)
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    d0, d1 = dims
    t = m.reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def partial_transpose(m: np.ndarray, dims: tuple[int, int], on: int) -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator.

    A pure index permutation, so applying it twice returns the input
    bit-identically.
    """
    m = _check_bipartite(m, dims)
    if on not in (0, 1):
        raise ValueError("on must be 0 or 1")
    d0, d1 = dims
    t = m.reshape(d0, d1, d0, d1)
    if on == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(d0 * d1, d0 * d1)


def trace_norm(m: np.ndarray, tol: float = HERM_TOL) -> float:
    """Trace norm of a Hermitian matrix (sum of absolute eigenvalues)."""
    w, _ = eig_hermitian(m, tol=tol)
    return float(np.sum(np.abs(w)))


def is_psd(m: np.ndarray, tol: float = PSD_TOL) -> bool:
    """Whether a Hermitian matrix is positive semidefinite within ``tol``."""
    w, _ = eig_hermitian(m, tol=max(tol, HERM_TOL))
    return bool(w[0] >= -tol)


@lru_cache(maxsize=None)
def _hermitian_basis_cached(dim: int) -> tuple[np.ndarray, ...]:
    out: list[np.ndarray] = []
    out.append(np.eye(dim, dtype=np.complex128) / np.sqrt(dim))
    # Diagonal traceless directions, generalised Gell-Mann style.
    for k in range(1, dim):
        d = np.zeros(dim)
        d[:k] = 1.0
        d[k] = -float(k)
        out.append(np.diag(d).astype(np.complex128) / np.sqrt(k * (k + 1)))
    # Off-diagonal symmetric and antisymmetric pairs.
    for i in range(dim):
        for j in range(i + 1, dim):
            s = np.zeros((dim, dim), dtype=np.complex128)
            s[i, j] = s[j, i] = 1.0 / np.sqrt(2.0)
            out.append(s)
            a = np.zeros((dim, dim), dtype=np.complex128)
            a[i, j] = -1j / np.sqrt(2.0)
            a[j, i] = 1j / np.sqrt(2.0)
            out.append(a)
    return tuple(out)


def hermitian_basis(dim: int) -> tuple[np.ndarray, ...]:
    """Orthonormal basis of the real space of ``dim x dim`` Hermitian matrices.

    Orthonormal under the trace inner product ``<A, B> = Tr(A B)``.  The
    first element is the normalised identity; the remaining ``dim**2 - 1``
    elements are traceless.  The ordering is deterministic: diagonal
    traceless directions first, then (real, imaginary) pairs for each
    off-diagonal position in row-major order.
    """
    if dim <= 0 or dim > MAX_DIM:
        raise ValueError(f"hermitian_basis needs 1 <= dim <= {MAX_DIM}, got {dim}")
    return _hermitian_basis_cached(dim)


def hermitian_coords(h: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in :func:`hermitian_basis`."""
    h = require_hermitian(h, tol=tol, name="hermitian_coords input")
    basis = hermitian_basis(h.shape[0])
    stack = np.stack(basis)
    return np.real(np.einsum("kij,ji->k", stack, h))


def hermitian_from_coords(coords: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`hermitian_coords`."""
    coords = np.asarray(coords, dtype=float)
    basis = hermitian_basis(dim)
    if coords.shape != (len(basis),):
        raise ValueError(f"expected {len(basis)} coordinates for dim {dim}, got {coords.shape}")
    return np.tensordot(coords, np.stack(basis), axes=1)


def real_embed(h: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Embed a Hermitian matrix as a real symmetric one of twice the side.

    ``H = A + iB`` maps to ``[[A, -B], [B, A]]``.  The embedding doubles
    every eigenvalue's multiplicity, so it preserves positive
    semidefiniteness in both directions and linear combinations commute
    with it.
    """
    h = require_hermitian(h, tol=tol, name="real_embed input")
    a = h.real
    b = h.imag
    top = np.hstack([a, -b])
    bot = np.hstack([b, a])
    return np.vstack([top, bot])
