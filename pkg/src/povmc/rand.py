"""Seeded random generators for states, measurements and channels.

Used by the see-saw search and by the test suite.  Every function takes an
explicit ``numpy.random.Generator`` so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .linalg import BipartiteShape


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Complex Gaussian matrix with iid standard complex normal entries."""
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary via QR with the standard phase correction."""
    q, r = np.linalg.qr(ginibre(rng, dim, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = ginibre(rng, dim, 1).reshape(-1)
    return v / np.linalg.norm(v)


def pure_state_sr(rng: np.random.Generator, shape: BipartiteShape, rank: int) -> np.ndarray:
    """Haar-style random pure state on A ⊗ B with Schmidt rank at most ``rank``."""
    k = min(rank, shape.dim_a, shape.dim_b)
    g = ginibre(rng, shape.dim_a, k) @ ginibre(rng, k, shape.dim_b)
    v = g.reshape(-1)
    return v / np.linalg.norm(v)


def density_matrix(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random density matrix (Hilbert-Schmidt-style from a Ginibre factor)."""
    g = ginibre(rng, dim, rank if rank is not None else dim)
    rho = g @ linalg.dagger(g)
    return rho / np.trace(rho).real


def povm(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Random POVM: Wishart effects normalized by S^{-1/2} . S^{-1/2}."""
    raw = []
    for _ in range(outcomes):
        g = ginibre(rng, dim, dim)
        raw.append(g @ linalg.dagger(g))
    s = sum(raw)
    isq = linalg.pinv_sqrt(s, rank_tol=1e-12)
    return [linalg.hermitianize(isq @ e @ isq) for e in raw]


def kraus_channel(rng: np.random.Generator, dim_in: int, dim_out: int, n_kraus: int,
                  max_rank: int | None = None) -> list[np.ndarray]:
    """Random trace-preserving Kraus family, optionally with rank-bounded operators.

    With a rank bound, ``n_kraus * max_rank`` must reach ``dim_in`` or the
    family cannot be trace preserving.
    """
    if max_rank is not None and n_kraus * min(max_rank, dim_out) < dim_in:
        raise ValueError(
            f"{n_kraus} Kraus operators of rank <= {max_rank} cannot be "
            f"trace preserving on dimension {dim_in}")
    raw = []
    for _ in range(n_kraus):
        if max_rank is None or max_rank >= min(dim_in, dim_out):
            k = ginibre(rng, dim_out, dim_in)
        else:
            k = ginibre(rng, dim_out, max_rank) @ ginibre(rng, max_rank, dim_in)
        raw.append(k)
    s = sum(linalg.dagger(k) @ k for k in raw)
    isq = linalg.pinv_sqrt(s, rank_tol=1e-12)
    return [k @ isq for k in raw]


def stochastic_matrix(rng: np.random.Generator, outcomes: int, points: int) -> np.ndarray:
    """Column-stochastic response p(a | lambda), shape (outcomes, points)."""
    p = rng.random((outcomes, points)) + 1e-3
    return p / p.sum(axis=0, keepdims=True)


def simplex_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.random(n) + 1e-3
    return w / w.sum()
