"""Dense complex linear algebra primitives for operators on small Hilbert spaces.

Everything here is a pure function on immutable numpy arrays: no caching, no
global state, safe for concurrent use.  Dimensions are assumed small (d <= 64);
all algorithms are dense LAPACK calls.

Conventions used throughout the package:

* Bipartite composite index: ``|a> ⊗ |b>``  ->  flat index ``a * dim_b + b``
  (row-major, the ``numpy.kron`` convention).
* ``vec_to_op(phi, (dim_k, dim_h))`` reshapes a vector in K ⊗ H into the
  operator ``F: H -> K`` with ``<k_m| F |h_j> = <k_m ⊗ h_j | phi>``, so a
  product vector ``eta ⊗ k`` maps to the rank-one operator ``|eta><conj(k)|``.
* ``purify(sigma)`` returns ``sum_k sqrt(a_k) |v_k> ⊗ |v_k>`` in the eigenbasis
  of sigma with descending eigenvalues and phase-fixed eigenvectors, so both
  partial traces give back sigma exactly.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, DomainError, ValidationError

#: Absolute tolerance on Hermiticity violations (max |h - h^dag| entry).
TAU_HERM = 1e-8
#: Absolute tolerance on eigenvalue negativity when checking PSD.
TAU_PSD = 1e-8
#: Default rank cutoff, relative to the largest eigenvalue / singular value.
RANK_TOL = 1e-8


class BipartiteShape(NamedTuple):
    """Tensor split ``H_A ⊗ H_B`` of an ambient space of dimension dim_a*dim_b."""

    dim_a: int
    dim_b: int

    @property
    def total(self) -> int:
        return self.dim_a * self.dim_b


def as_square_matrix(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Coerce to a complex square 2-d array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] < 1:
        raise DimensionError(f"{name} must have positive dimension")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conjugate(a).T


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (a + a^dag) / 2."""
    return (a + dagger(a)) / 2


def herm_defect(a: np.ndarray) -> float:
    """Largest entry of |a - a^dag|."""
    return float(np.abs(a - dagger(a)).max())


def assert_hermitian(a: np.ndarray, tol: float = TAU_HERM, name: str = "operator") -> np.ndarray:
    m = as_square_matrix(a, name)
    defect = herm_defect(m)
    if defect > tol:
        raise ValidationError(f"{name} is not Hermitian: max |h - h^dag| = {defect:.3e} > {tol:.1e}")
    return hermitianize(m)


def hermitian_eig(h: np.ndarray, tol: float = TAU_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending.

    Returns ``(w, v)`` with ``w`` real and sorted descending and the columns of
    ``v`` orthonormal, phase-fixed so the first component larger than 1e-10 in
    modulus is real positive.  Raises ValidationError if ``h`` is not Hermitian
    within ``tol``.
    """
    m = assert_hermitian(h, tol)
    w, v = np.linalg.eigh(m)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    return w, _phase_fix(v)


def _phase_fix(v: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    """Rotate each column so its first component above ``cutoff`` is real positive."""
    out = v.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > cutoff)
        if idx.size:
            pivot = col[idx[0]]
            out[:, j] = col * (np.conjugate(pivot) / abs(pivot))
    return out


def min_eig(h: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``h``."""
    return float(np.linalg.eigvalsh(hermitianize(as_square_matrix(h)))[0])


def matrix_sqrt(p: np.ndarray, tol: float = TAU_PSD) -> np.ndarray:
    """Principal square root of a PSD operator.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero; anything below ``-tol``
    raises DomainError.
    """
    w, v = hermitian_eig(p)
    if w[-1] < -tol:
        raise DomainError(f"operator is not PSD: min eigenvalue {w[-1]:.3e} < {-tol:.1e}")
    w = np.clip(w, 0.0, None)
    return hermitianize((v * np.sqrt(w)) @ dagger(v))


def pinv_sqrt(p: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Inverse square root on the support of a PSD operator, zero on the kernel.

    Eigenvalues below ``rank_tol * max(eigenvalue)`` count as kernel.
    """
    w, v = hermitian_eig(p)
    if w[-1] < -TAU_PSD:
        raise DomainError(f"operator is not PSD: min eigenvalue {w[-1]:.3e}")
    cutoff = rank_tol * max(w[0], 0.0)
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.clip(w, 1e-300, None)), 0.0)
    return hermitianize((v * inv) @ dagger(v))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product, row-major composite indexing."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(op: np.ndarray, shape: BipartiteShape, side: str) -> np.ndarray:
    """Trace out subsystem ``side`` ("A" or "B") of an operator on A ⊗ B."""
    m = as_square_matrix(op)
    if m.shape[0] != shape.total:
        raise DimensionError(f"operator dimension {m.shape[0]} != {shape.dim_a}*{shape.dim_b}")
    r = m.reshape(shape.dim_a, shape.dim_b, shape.dim_a, shape.dim_b)
    if side == "A":
        return np.trace(r, axis1=0, axis2=2)
    if side == "B":
        return np.trace(r, axis1=1, axis2=3)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def vec_to_op(phi: np.ndarray, shape: BipartiteShape) -> np.ndarray:
    """Reshape a vector in K ⊗ H into the operator F: H -> K (see module docs)."""
    v = np.asarray(phi, dtype=complex).reshape(-1)
    if v.size != shape.total:
        raise DimensionError(f"vector length {v.size} != {shape.dim_a}*{shape.dim_b}")
    return v.reshape(shape.dim_a, shape.dim_b).copy()


def op_to_vec(f: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec_to_op`."""
    return np.asarray(f, dtype=complex).reshape(-1).copy()


def schmidt_decompose(
    phi: np.ndarray, shape: BipartiteShape
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt decomposition ``phi = sum_i c_i u_i ⊗ v_i`` of a bipartite vector.

    Returns ``(c, u, v)`` with nonnegative coefficients sorted descending,
    ``u[:, i]`` and ``v[:, i]`` orthonormal, and ``len(c) = min(dim_a, dim_b)``
    including zero coefficients.  Raises DomainError on the zero vector.
    """
    vec = np.asarray(phi, dtype=complex).reshape(-1)
    nrm = float(np.linalg.norm(vec))
    if nrm == 0.0:
        raise DomainError("cannot Schmidt-decompose the zero vector")
    f = vec_to_op(vec, shape)
    u, s, vh = np.linalg.svd(f)
    k = min(shape.dim_a, shape.dim_b)
    # phi[(m, j)] = sum_i s_i u[m, i] vh[i, j], so the B factors are the rows of vh.
    return s[:k].copy(), u[:, :k].copy(), vh[:k, :].T.copy()


def schmidt_rank_of_vector(phi: np.ndarray, shape: BipartiteShape, rank_tol: float = RANK_TOL) -> int:
    """Number of Schmidt coefficients above ``rank_tol`` times the largest."""
    c, _, _ = schmidt_decompose(phi, shape)
    return int(np.count_nonzero(c > rank_tol * c[0]))


def purify(sigma: np.ndarray, tol: float = TAU_PSD) -> np.ndarray:
    """Purification ``sum_k sqrt(a_k) |v_k> ⊗ |v_k>`` of a state in H ⊗ H.

    Uses the eigenbasis of sigma with descending eigenvalues; eigenvector
    phases are fixed as in :func:`hermitian_eig` so the output is reproducible.
    Both partial traces of the projector onto the result equal sigma.
    """
    w, v = hermitian_eig(sigma)
    if w[-1] < -tol:
        raise DomainError(f"state is not PSD: min eigenvalue {w[-1]:.3e}")
    w = np.clip(w, 0.0, None)
    # zero out eigenvalue-level noise: sqrt would amplify it to ~1e-8 components
    w[w < 1e-14 * max(w[0], 1e-300)] = 0.0
    return np.einsum("k,ik,jk->ij", np.sqrt(w), v, v).reshape(-1)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False).sum())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized trace distance ``||a - b||_1 / 2`` (1 for orthogonal pure states)."""
    return 0.5 * trace_norm(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex))


def frob_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)))


def extend_to_unitary(columns: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Complete a d x k matrix with orthonormal columns to a d x d unitary.

    Deterministic: the complement is built by Gram-Schmidt over the standard
    basis in order.
    """
    v = np.asarray(columns, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    d, k = v.shape
    if k > d:
        raise DimensionError(f"cannot extend {k} columns in dimension {d}")
    cols = [v[:, j].copy() for j in range(k)]
    for i in range(d):
        if len(cols) == d:
            break
        cand = np.zeros(d, dtype=complex)
        cand[i] = 1.0
        for c in cols:
            cand -= np.vdot(c, cand) * c
        nrm = np.linalg.norm(cand)
        if nrm > tol:
            cols.append(cand / nrm)
    if len(cols) != d:
        raise ValidationError("failed to complete orthonormal basis")
    u = np.column_stack(cols)
    return u


def transpose_in_basis(a: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Transpose of ``a`` taken in the orthonormal basis given by the columns of ``basis``."""
    u = np.asarray(basis, dtype=complex)
    return u @ (dagger(u) @ np.asarray(a, dtype=complex) @ u).T @ dagger(u)
