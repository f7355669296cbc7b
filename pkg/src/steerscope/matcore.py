"""Small dense complex linear algebra used throughout the package.

Matrices are plain numpy arrays (complex128 for operators, float64 for the
3x3 correlation matrices). Qubit 0 is always the leftmost tensor factor,
i.e. Alice in a bipartite state, so ``kron(a, b)`` puts ``a`` on Alice.

The eigensolvers are cyclic Jacobi sweeps; every matrix handled here is at
most 8x8, where Jacobi is accurate to a few ulps and needs no pivoting logic.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

ATOL = 1e-10
JACOBI_RTOL = 1e-13
MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class LinalgError(ValueError):
    """Raised for malformed or mismatched matrix input."""


def as_matrix(a, *, real: bool = False) -> np.ndarray:
    """Coerce ``a`` to a finite square 2-d array."""
    arr = np.array(a, dtype=float if real else complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise LinalgError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError("matrix contains NaN or Inf entries")
    return arr


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise LinalgError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` is the left (lower-index) tensor factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def _check_qubits(dim: int, n_qubits: int) -> None:
    if n_qubits < 1 or dim != 2**n_qubits:
        raise LinalgError(f"matrix of dim {dim} is not a {n_qubits}-qubit operator")


def partial_trace(rho, n_qubits: int, keep: Sequence[int]) -> np.ndarray:
    """Reduce ``rho`` onto the qubits listed in ``keep``.

    ``keep`` must be non-empty, strictly increasing and within
    ``range(n_qubits)``; the kept qubits stay in their original order.

    >>> partial_trace(np.eye(4) / 4, 2, [1]).real
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    rho = as_matrix(rho)
    _check_qubits(rho.shape[0], n_qubits)
    keep = list(keep)
    if not keep:
        raise LinalgError("keep must name at least one qubit")
    if any(not isinstance(k, (int, np.integer)) for k in keep):
        raise LinalgError(f"qubit indices must be integers, got {keep}")
    if any(k < 0 or k >= n_qubits for k in keep):
        raise LinalgError(f"qubit index out of range for {n_qubits} qubits: {keep}")
    if any(k1 >= k2 for k1, k2 in zip(keep, keep[1:])):
        raise LinalgError(f"keep must be strictly increasing, got {keep}")

    traced = [k for k in range(n_qubits) if k not in keep]
    t = rho.reshape([2] * (2 * n_qubits))
    # contract ket/bra axes pairwise, highest index first so positions stay valid
    for k in reversed(traced):
        n_left = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + n_left)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalisation of a Hermitian (or real symmetric) matrix.

    Each rotation acts on the (p, q) plane: the phase of a[p, q] is first
    absorbed into column q, which leaves a real symmetric 2x2 block that a
    standard Givens rotation annihilates. Returns the diagonal of the rotated
    matrix and the accumulated unitary whose columns are eigenvectors.
    """
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=a.dtype)
    threshold = JACOBI_RTOL * (1.0 + float(np.linalg.norm(a)))
    complex_case = np.iscomplexobj(a)

    for _ in range(MAX_SWEEPS):
        if _offdiag_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                if complex_case:
                    phase = apq / mag
                    apq = mag
                    # column q *= conj(phase), row q *= phase
                    a[:, q] *= phase.conjugate()
                    a[q, :] *= phase
                    v[:, q] *= phase.conjugate()
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * apq.real)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise LinalgError("Jacobi iteration did not converge")
    return np.diag(a).real.copy(), v


def _sorted_desc(w: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # stable sort keeps the Jacobi output order for ties
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigensystem(a, tol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvector columns of a Hermitian matrix."""
    a = as_matrix(a)
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > tol:
        raise LinalgError(f"matrix is not Hermitian: max |A - A^dagger| = {asym:.3e}")
    a = 0.5 * (a + a.conj().T)
    return _sorted_desc(*_jacobi(a))


def hermitian_eigenvalues(a, tol: float = ATOL) -> np.ndarray:
    return hermitian_eigensystem(a, tol)[0]


def sym3_eigensystem(m, tol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric 3x3 matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues descending and
    eigenvectors stored as columns. Within a degenerate eigenspace the basis
    is whatever the rotations produced; callers must not rely on it.
    """
    m = as_matrix(m, real=True)
    if m.shape != (3, 3):
        raise LinalgError(f"expected a 3x3 matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.T)))
    if asym > tol:
        raise LinalgError(f"matrix is not symmetric: max |M - M^t| = {asym:.3e}")
    return _sorted_desc(*_jacobi(0.5 * (m + m.T)))
