"""Compression of measurement sets and dimension-bounded preparation of assemblages.

Connects three pictures of the same data:

* a **simulation model** (:class:`~povmc.objects.PointwiseKrausModel`):
  measurements realized as ``M_{a|x} = sum_l mu_l K_l^dag N_{a|x,l} K_l`` with
  every ``K_l`` of rank at most n;
* a **parent model** (:class:`~povmc.compat.ParentModel`): the n = 1 case,
  where branches collapse to classical post-processing of one POVM;
* a **preparation model** (:class:`PreparationModel`): an assemblage realized
  as a mixture of branches, each measuring a shared pure state of Schmidt
  rank at most n.

All conversions are constructive and exact up to floating point; they rely on
the identity ``tr_A[(N ⊗ I)|psi><psi|] = F^dag N^{T_u} F`` where
``psi = sum_i c_i u_i ⊗ v_i`` is a Schmidt decomposition,
``F = sum_i c_i |u_i><v_i|``, and ``T_u`` transposes in the (extended) u
basis.  The transpose bases are carried explicitly on model branches.

Continuous mixing measures are represented by finite weight vectors
throughout: at fixed finite dimension, discrete mixtures already realize
every reachable measurement set or assemblage (the feasible sets are compact
and convex), so nothing is lost by the restriction.

The see-saw search (:func:`seesaw_n_prep`) is a heuristic: it certifies
*reachability* of a visibility (the returned model is an explicit witness)
but can never certify optimality, and no exact certification method for
n >= 2 is known.  Its results are therefore flagged as lower bounds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import compat, linalg, sdp
from . import rand as qrand
from .errors import DomainError, ValidationError
from .linalg import BipartiteShape
from .objects import (Assemblage, DensityState, MeasurementSet,
                      PointwiseKrausModel, Povm, KrausChannel, choi_of_channel,
                      maximally_entangled, sandwich, unsandwich, validate)

logger = logging.getLogger(__name__)

DROP_TOL = 1e-12


# ---------------------------------------------------------------------------
# preparation models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PreparationModel:
    """Mixture of rank-bounded pure-state branches realizing an assemblage.

    Branch ``l`` holds a pure state (vector on A ⊗ B, Schmidt rank at most
    ``rank_bound``) and one POVM per setting on the A side; the realized
    assemblage is ``sum_l p_l tr_A[(N_{a|x,l} ⊗ I)|psi_l><psi_l|]``.
    """

    weights: np.ndarray
    states: tuple[np.ndarray, ...]
    measurements: tuple[tuple[Povm, ...], ...]
    shape: BipartiteShape
    rank_bound: int

    def __init__(self, weights, states, measurements, shape, rank_bound, check: bool = True):
        object.__setattr__(self, "weights", np.asarray(weights, dtype=float).reshape(-1))
        object.__setattr__(self, "states", tuple(np.asarray(s, dtype=complex).reshape(-1)
                                                 for s in states))
        object.__setattr__(self, "measurements", tuple(tuple(row) for row in measurements))
        object.__setattr__(self, "shape", BipartiteShape(*shape))
        object.__setattr__(self, "rank_bound", int(rank_bound))
        if check:
            self._validate()

    def _validate(self) -> None:
        if not (self.weights.size == len(self.states) == len(self.measurements)):
            raise ValidationError("weights / states / measurements lengths differ")
        if self.weights.min() < -1e-12:
            raise ValidationError("negative branch weight")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValidationError(f"branch weights sum to {self.weights.sum():.12f}")
        for i, s in enumerate(self.states):
            if s.size != self.shape.total:
                raise ValidationError(f"state {i} has length {s.size} != {self.shape.total}")
            if abs(np.linalg.norm(s) - 1.0) > 1e-9:
                raise ValidationError(f"state {i} is not normalized")
            if linalg.schmidt_rank_of_vector(s, self.shape) > self.rank_bound:
                raise ValidationError(f"state {i} exceeds Schmidt rank bound {self.rank_bound}")
        for i, row in enumerate(self.measurements):
            for x, p in enumerate(row):
                if p.dim != self.shape.dim_a:
                    raise ValidationError(f"branch {i} setting {x} POVM dimension mismatch")

    @property
    def branches(self) -> int:
        return len(self.states)

    @property
    def settings(self) -> int:
        return len(self.measurements[0])

    def realized_members(self) -> list[list[np.ndarray]]:
        db = self.shape.dim_b
        out: list[list[np.ndarray]] = []
        for x in range(self.settings):
            row = [np.zeros((db, db), dtype=complex)
                   for _ in range(self.measurements[0][x].outcomes)]
            for p_l, psi, ms_row in zip(self.weights, self.states, self.measurements):
                big = linalg.vec_to_op(psi, self.shape)  # A x B matrix of amplitudes
                for a, effect in enumerate(ms_row[x].effects):
                    row[a] += p_l * (big.conj().T @ effect @ big).T
            out.append([linalg.hermitianize(m) for m in row])
        return out

    def realized_total(self) -> np.ndarray:
        tot = np.zeros((self.shape.dim_b,) * 2, dtype=complex)
        for p_l, psi in zip(self.weights, self.states):
            big = linalg.vec_to_op(psi, self.shape)
            tot += p_l * (big.conj().T @ big).T
        return linalg.hermitianize(tot)

    def defect(self, asm: Assemblage) -> float:
        rec = self.realized_members()
        return max(float(np.abs(rec[x][a] - asm.member(x, a)).max())
                   for x in range(asm.settings) for a in range(asm.outcome_counts[x]))


@dataclass(frozen=True, eq=False)
class WeightedKrausChannel:
    """Channel in weighted pointwise Kraus form ``rho -> sum_i q_i K_i rho K_i^dag``."""

    weights: tuple[float, ...]
    kraus_ops: tuple[np.ndarray, ...]
    rank_bound: int

    def heisenberg(self, a: np.ndarray) -> np.ndarray:
        return linalg.hermitianize(sum(
            q * (linalg.dagger(k) @ np.asarray(a, dtype=complex) @ k)
            for q, k in zip(self.weights, self.kraus_ops)))

    def schroedinger(self, rho: np.ndarray) -> np.ndarray:
        return linalg.hermitianize(sum(
            q * (k @ np.asarray(rho, dtype=complex) @ linalg.dagger(k))
            for q, k in zip(self.weights, self.kraus_ops)))


@dataclass(frozen=True, eq=False)
class ChoiDecomposition:
    """Explicit pure decomposition of a Choi state with bounded Schmidt ranks."""

    weights: tuple[float, ...]
    vectors: tuple[np.ndarray, ...]
    shape: BipartiteShape
    rank_bound: int

    def reconstruct(self) -> np.ndarray:
        m = np.zeros((self.shape.total,) * 2, dtype=complex)
        for q, v in zip(self.weights, self.vectors):
            m += q * np.outer(v, np.conjugate(v))
        return linalg.hermitianize(m)


# ---------------------------------------------------------------------------
# model evaluation and the n = 1 dictionary
# ---------------------------------------------------------------------------


def eval_simulation(m: PointwiseKrausModel) -> MeasurementSet:
    """Measurement set ``sum_l mu_l K_l^dag N_{a|x,l} K_l`` realized by a model."""
    validate(m).raise_if_invalid()
    d = m.dim_in
    povms = []
    for x in range(m.settings):
        outcomes = m.local_measurements[0][x].outcomes
        effects = [np.zeros((d, d), dtype=complex) for _ in range(outcomes)]
        for mu, k, row in zip(m.weights, m.kraus_ops, m.local_measurements):
            kd = linalg.dagger(k)
            for a, n_eff in enumerate(row[x].effects):
                effects[a] += mu * (kd @ n_eff @ k)
        povms.append(Povm([linalg.hermitianize(e) for e in effects]))
    return MeasurementSet(povms)


def one_sim_from_jm(pm: compat.ParentModel, drop_tol: float = DROP_TOL) -> PointwiseKrausModel:
    """Rank-one simulation model from a parent model.

    The parent is refined to rank one by eigendecomposition; each refined
    effect ``g |w><w|`` becomes a branch with weight ``g/d``, compression
    operator ``sqrt(d) <w|`` onto a one-dimensional space, and trivial local
    POVMs weighted by the response kernel.
    """
    d = pm.parent.dim
    settings = len(pm.response)
    weights: list[float] = []
    kraus: list[np.ndarray] = []
    local: list[list[Povm]] = []
    for lam, g in enumerate(pm.parent.effects):
        w, v = linalg.hermitian_eig(g)
        for j in range(w.size):
            if w[j] <= drop_tol:
                continue
            weights.append(float(w[j]) / d)
            kraus.append(np.sqrt(d) * v[:, j].conj().reshape(1, d))
            local.append([
                Povm([np.array([[pm.response[x][a, lam]]], dtype=complex)
                      for a in range(pm.response[x].shape[0])])
                for x in range(settings)])
    return PointwiseKrausModel(np.array(weights), kraus, local, rank_bound=1)


def jm_from_one_sim(m: PointwiseKrausModel, rank_tol: float = linalg.RANK_TOL,
                    drop_tol: float = DROP_TOL) -> compat.ParentModel:
    """Parent model (POVM plus stochastic response kernel) from a rank-one model.

    Each branch contributes the parent effect ``mu_l K_l^dag K_l`` and the
    response ``p(a|x,l) = <u_l| N_{a|x,l} |u_l>`` evaluated in the branch's
    unit image vector; zero-weight branches are dropped.
    """
    validate(m).raise_if_invalid()
    if m.rank_bound != 1:
        raise DomainError(f"model has rank bound {m.rank_bound}, expected 1")
    effects: list[np.ndarray] = []
    cols: list[list[list[float]]] = []  # per setting: per outcome: per branch
    settings = m.settings
    outcomes = [m.local_measurements[0][x].outcomes for x in range(settings)]
    for mu, k, row in zip(m.weights, m.kraus_ops, m.local_measurements):
        if mu <= drop_tol:
            continue
        u_mat, s, _ = np.linalg.svd(k)
        if s.size > 1 and s[1] > rank_tol * s[0]:
            raise DomainError("branch operator has rank above one")
        u = u_mat[:, 0]
        effects.append(linalg.hermitianize(mu * (linalg.dagger(k) @ k)))
        cols.append([[float(np.real(np.vdot(u, n @ u))) for n in row[x].effects]
                     for x in range(settings)])
    s_tot = linalg.hermitianize(sum(effects))
    isq = linalg.pinv_sqrt(s_tot, rank_tol=1e-14)
    effects = [linalg.hermitianize(isq @ e @ isq) for e in effects]
    response = tuple(
        np.array([[cols[lam][x][a] for lam in range(len(cols))] for a in range(outcomes[x])])
        for x in range(settings))
    return compat.ParentModel(parent=Povm(effects), response=response)


# ---------------------------------------------------------------------------
# preparation <-> simulation translation
# ---------------------------------------------------------------------------


def _as_state_matrix(sigma) -> np.ndarray:
    return sigma.matrix if isinstance(sigma, DensityState) else linalg.as_square_matrix(sigma)


def _require_full_rank(sigma: np.ndarray, rank_tol: float) -> None:
    w = np.linalg.eigvalsh(sigma)
    if w[0] <= rank_tol * w[-1]:
        raise DomainError(
            f"total state is rank deficient (smallest eigenvalue {w[0]:.3e}); "
            "the compression operators K = F sigma^{-1/2} are not defined")


def prep_to_sim(pm: PreparationModel, sigma, rank_tol: float = linalg.RANK_TOL
                ) -> PointwiseKrausModel:
    """Simulation model for ``unsandwich`` of the assemblage realized by ``pm``.

    Per branch: Schmidt-decompose the state, set ``F_l = sum_i c_i |u_i><v_i|``
    and ``K_l = F_l sigma^{-1/2}``; the branch POVMs are stored transposed in
    the extended u basis so that ``eval_simulation`` reproduces the
    measurement set directly.  Mixed branch states must be pre-split by
    eigendecomposition (see :func:`split_mixed_branches`).
    """
    sig = _as_state_matrix(sigma)
    _require_full_rank(sig, rank_tol)
    isq = linalg.pinv_sqrt(sig, rank_tol=rank_tol)
    weights = []
    kraus = []
    local = []
    bases = []
    for p_l, psi, row in zip(pm.weights, pm.states, pm.measurements):
        c, us, vs = linalg.schmidt_decompose(psi, pm.shape)
        keep = c > rank_tol * c[0]
        c, us, vs = c[keep], us[:, keep], vs[:, keep]
        if c.size > pm.rank_bound:
            raise ValidationError("branch state exceeds the declared Schmidt rank bound")
        f = sum(c[i] * np.outer(us[:, i], vs[:, i].conj()) for i in range(c.size))
        basis = linalg.extend_to_unitary(us)
        weights.append(float(p_l))
        kraus.append(f @ isq)
        local.append([Povm([linalg.hermitianize(linalg.transpose_in_basis(e, basis))
                            for e in povm.effects])
                      for povm in row])
        bases.append(basis)
    return PointwiseKrausModel(np.array(weights), kraus, local,
                               rank_bound=pm.rank_bound, transpose_bases=bases)


def sim_to_prep(m: PointwiseKrausModel, sigma, rank_tol: float = linalg.RANK_TOL
                ) -> PreparationModel:
    """Preparation model for the sandwiched assemblage of a simulation model.

    Per branch: ``F_l = K_l sigma^{1/2}`` with singular value decomposition
    ``F_l = sum_i s_i u_i v_i^dag`` turns into the pure state
    ``eta_l = sum_i s_i u_i ⊗ v_i`` with weight ``mu_l ||eta_l||^2`` and
    measurements transposed back in the u basis.  Branches with vanishing
    ``eta`` are dropped and the weights renormalized.
    """
    validate(m).raise_if_invalid()
    sig = _as_state_matrix(sigma)
    _require_full_rank(sig, rank_tol)
    root = linalg.matrix_sqrt(sig)
    dim_a = max(k.shape[0] for k in m.kraus_ops)
    dim_b = sig.shape[0]
    weights = []
    states = []
    measurements = []
    dropped = 0.0
    for mu, k, row in zip(m.weights, m.kraus_ops, m.local_measurements):
        f = k @ root
        u_mat, s, vh = np.linalg.svd(f, full_matrices=False)
        keep = s > rank_tol * max(s[0], 1e-300)
        s, u_mat, vh = s[keep], u_mat[:, keep], vh[keep, :]
        norm_sq = float(np.sum(s ** 2))
        if mu * norm_sq <= DROP_TOL:
            dropped += mu * norm_sq
            continue
        if s.size > m.rank_bound:
            raise ValidationError("branch operator exceeds the declared rank bound")
        eta = sum(s[i] * np.kron(_pad(u_mat[:, i], dim_a), vh[i].conj()) for i in range(s.size))
        basis = linalg.extend_to_unitary(_pad_columns(u_mat, dim_a))
        povms = [Povm([linalg.hermitianize(
            linalg.transpose_in_basis(_pad_effect(e, dim_a, a == 0), basis))
            for a, e in enumerate(povm.effects)])
            for povm in row]
        weights.append(mu * norm_sq)
        states.append(eta / np.sqrt(norm_sq))
        measurements.append(povms)
    total = sum(weights)
    if abs(total - 1.0) > 1e-7:
        raise ValidationError(f"branch weights sum to {total:.8f} after conversion")
    if dropped > 0.0:
        logger.info("sim_to_prep dropped %.3e of weight in zero branches; renormalized", dropped)
    weights = [w / total for w in weights]
    return PreparationModel(np.array(weights), states, measurements,
                            shape=BipartiteShape(dim_a, dim_b), rank_bound=m.rank_bound)


def _pad(v: np.ndarray, dim: int) -> np.ndarray:
    if v.size == dim:
        return v
    out = np.zeros(dim, dtype=complex)
    out[:v.size] = v
    return out


def _pad_columns(u: np.ndarray, dim: int) -> np.ndarray:
    if u.shape[0] == dim:
        return u
    out = np.zeros((dim, u.shape[1]), dtype=complex)
    out[:u.shape[0], :] = u
    return out


def _pad_effect(e: np.ndarray, dim: int, absorb_pad: bool) -> np.ndarray:
    """Extend a POVM effect to a larger space; outcome 0 absorbs the pad identity."""
    k = e.shape[0]
    if k == dim:
        return e
    out = np.zeros((dim, dim), dtype=complex)
    out[:k, :k] = e
    if absorb_pad:
        out[k:, k:] = np.eye(dim - k)
    return out


def split_mixed_branches(weights: Sequence[float], states: Sequence[np.ndarray],
                         measurements: Sequence[Sequence[Povm]],
                         drop_tol: float = DROP_TOL):
    """Eigendecompose mixed branch states into pure branches, reusing the POVMs."""
    out_w, out_s, out_m = [], [], []
    for p_l, rho, row in zip(weights, states, measurements):
        rho = linalg.as_square_matrix(rho)
        w, v = linalg.hermitian_eig(rho)
        for j in range(w.size):
            if w[j] > drop_tol:
                out_w.append(p_l * float(w[j]))
                out_s.append(v[:, j].copy())
                out_m.append(row)
    return np.array(out_w), out_s, out_m


# ---------------------------------------------------------------------------
# rank-bounded channels and Choi decompositions
# ---------------------------------------------------------------------------


def kraus_to_choi_sn_witness(c: KrausChannel, rank_tol: float = linalg.RANK_TOL,
                             drop_tol: float = 1e-14) -> ChoiDecomposition:
    """Pure Choi decomposition whose members inherit the Kraus rank bound.

    The members are ``(K_l ⊗ I)|psi+>`` normalized, with weights given by the
    squared norms; the Schmidt rank of each member equals the rank of its
    Kraus operator, so the decomposition certifies (together with
    :func:`povmc.objects.sn_upper_from_decomposition`) a Schmidt-number upper
    bound on the Choi state.
    """
    validate(c).raise_if_invalid()
    d = c.dim_in
    psi = maximally_entangled(d)
    weights = []
    vectors = []
    max_rank = 1
    for k in c.kraus_ops:
        w = linalg.kron(k, np.eye(d)) @ psi
        q = float(np.real(np.vdot(w, w)))
        if q <= drop_tol:
            continue
        sv = np.linalg.svd(k, compute_uv=False)
        rank = int(np.count_nonzero(sv > rank_tol * max(sv[0], 1e-300)))
        max_rank = max(max_rank, rank)
        weights.append(q)
        vectors.append(w / np.sqrt(q))
    return ChoiDecomposition(tuple(weights), tuple(vectors),
                             BipartiteShape(c.dim_out, d), rank_bound=max_rank)


def peb_kraus_extraction(weights: Sequence[float], vectors: Sequence[np.ndarray],
                         sigma, shape: BipartiteShape,
                         rank_tol: float = linalg.RANK_TOL,
                         marginal_tol: float = 1e-7) -> WeightedKrausChannel:
    """Rank-bounded Kraus form of the channel encoded by a weighted Choi decomposition.

    Input: ``sum_i q_i |phi_i><phi_i|`` on out ⊗ in equal to
    ``(Lambda ⊗ id)(|psi_sigma><psi_sigma|)`` for the purification convention
    of :func:`povmc.linalg.purify` (so its in-marginal must equal ``sigma``).
    Output operators are ``K_i = F_i' D^{-1/2} V^dag`` built in sigma's
    eigenbasis (``sigma = V D V^dag``); each inherits the Schmidt rank of its
    vector, and ``sum_i q_i K_i^dag A K_i`` is the Heisenberg action of the
    encoded channel.
    """
    sig = _as_state_matrix(sigma)
    _require_full_rank(sig, rank_tol)
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    marg = sum(q * linalg.partial_trace(np.outer(v, v.conj()), shape, "A")
               for q, v in zip(weights, vecs))
    defect = float(np.abs(marg - sig).max())
    if defect > marginal_tol:
        raise ValidationError(
            f"decomposition in-marginal deviates from sigma by {defect:.3e} > {marginal_tol:.1e}")
    d_eigs, v_basis = linalg.hermitian_eig(sig)
    rot = linalg.kron(np.eye(shape.dim_a), linalg.dagger(v_basis))
    isq_d = np.diag(1.0 / np.sqrt(d_eigs))
    kraus = []
    max_rank = 1
    for phi in vecs:
        f_prime = linalg.vec_to_op(rot @ phi, shape)
        k = f_prime @ isq_d @ linalg.dagger(v_basis)
        sv = np.linalg.svd(k, compute_uv=False)
        rank = int(np.count_nonzero(sv > rank_tol * max(sv[0], 1e-300)))
        max_rank = max(max_rank, rank)
        kraus.append(k)
    return WeightedKrausChannel(tuple(float(q) for q in weights), tuple(kraus), max_rank)


# ---------------------------------------------------------------------------
# see-saw search for n-preparability
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class SeesawResult:
    model: PreparationModel
    visibility: float
    converged: bool
    restart_index: int
    rounds: int
    heuristic: bool = True  # lower bound only; never an optimality claim


def _seesaw_problem(asm: Assemblage, states: list[np.ndarray],
                    shape: BipartiteShape) -> sdp.SdpProblem:
    """Measurement-and-weight optimization at fixed branch states.

    Variables: subnormalized POVMs ``N_{l,x,a}`` (absorbing the branch weight
    ``p_l``), weights ``p_l``, visibility ``v``; maximizes v subject to exact
    reproduction of the v-noisy assemblage.
    """
    total = asm.total.matrix
    outcome_counts = asm.outcome_counts
    blocks: list[tuple[str, int]] = [("v", 1), ("v_slack", 1)]
    constraints: list[sdp.Equality] = []
    psi_mats = [linalg.vec_to_op(s, shape) for s in states]
    for j in range(len(states)):
        blocks.append((f"p{j}", 1))
        for x, o in enumerate(outcome_counts):
            for a in range(o):
                blocks.append((f"N{j}_{x}_{a}", shape.dim_a))
            constraints.append(sdp.Equality(
                f"povm{j}_{x}", np.zeros((shape.dim_a, shape.dim_a)),
                matrix_terms=tuple(sdp.MatrixTerm(f"N{j}_{x}_{a}") for a in range(o)),
                scalar_terms=(sdp.ScalarTerm(f"p{j}", -np.eye(shape.dim_a)),)))
    # sum_j p_j = 1 is implied by the trace of the marginal row (states are
    # normalized), so adding it separately would make the constraints dependent
    constraints.append(sdp.Equality(
        "marginal", total,
        scalar_terms=tuple(
            sdp.ScalarTerm(f"p{j}", linalg.hermitianize((m.conj().T @ m).T))
            for j, m in enumerate(psi_mats))))
    for x, o in enumerate(outcome_counts):
        for a in range(o - 1):
            target = np.trace(asm.member(x, a)).real * total
            drift = linalg.hermitianize(asm.member(x, a) - target)
            constraints.append(sdp.Equality(
                f"repr{x}_{a}", target,
                matrix_terms=tuple(
                    sdp.MatrixTerm(f"N{j}_{x}_{a}", left=psi_mats[j].conj().T, transpose=True)
                    for j in range(len(states))),
                scalar_terms=(sdp.ScalarTerm("v", -drift),)))
    constraints.append(sdp.Equality(
        "vcap", np.eye(1), matrix_terms=(sdp.MatrixTerm("v"), sdp.MatrixTerm("v_slack"))))
    objective = sdp.Objective(sense="max", block_coeffs={"v": np.eye(1)})
    return sdp.SdpProblem(blocks, constraints, objective)


def _anchor_states(asm: Assemblage, n: int, shape: BipartiteShape) -> list[np.ndarray]:
    """Deterministic candidates guaranteeing feasibility of the see-saw SDP.

    Product states carrying the eigenvectors of the total reproduce the fully
    noisy assemblage at v = 0 for any weights matching the spectrum; the
    Schmidt-truncated purification of the total is the natural candidate at
    n = dim and often near-optimal below.
    """
    w, v = linalg.hermitian_eig(asm.total.matrix)
    e0 = np.zeros(shape.dim_a, dtype=complex)
    e0[0] = 1.0
    anchors = [np.kron(e0, v[:, k]) for k in range(v.shape[1]) if w[k] > 1e-12]
    c = np.sqrt(np.clip(w[:shape.dim_a], 0.0, None))
    if np.linalg.norm(c) > 0 and n >= 2:
        trunc = sum(c[i] * np.kron(_unit(shape.dim_a, i), v[:, i])
                    for i in range(min(n, shape.dim_a, c.size)))
        anchors.append(trunc / np.linalg.norm(trunc))
    return anchors


def _unit(dim: int, i: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[i] = 1.0
    return e


def _witness_candidates(duals: dict[str, np.ndarray], asm: Assemblage, n: int,
                        shape: BipartiteShape, rng: np.random.Generator,
                        max_strategies: int = 32) -> list[np.ndarray]:
    """States targeted at the current dual witness of the reproduction rows."""
    db = shape.dim_b
    counts = asm.outcome_counts
    w_ops = []
    for x, o in enumerate(counts):
        row = [duals.get(f"repr{x}_{a}", np.zeros((db, db))) for a in range(o - 1)]
        row.append(np.zeros((db, db), dtype=complex))
        w_ops.append(row)
    w_marginal = duals.get("marginal", np.zeros((db, db)))
    strategies = compat.deterministic_strategies(counts)
    if len(strategies) > max_strategies:
        idx = rng.choice(len(strategies), size=max_strategies, replace=False)
        strategies = [strategies[i] for i in idx]
    cands = []
    for s in strategies:
        # a branch with B part beta can improve the objective only if
        # <beta| -sum_x W_{x,s(x)} - W_marginal |beta> is positive for some
        # outcome choice s: aim candidates at the top of that operator
        h = -sum(w_ops[x][s[x]] for x in range(len(counts))) - w_marginal
        w, v = linalg.hermitian_eig(linalg.hermitianize(h))
        k = min(n, shape.dim_a, db)
        coeffs = np.sqrt(np.clip(w[:k], 0.0, None) + 1e-12)
        coeffs = coeffs / np.linalg.norm(coeffs)
        psi = sum(coeffs[i] * np.kron(_unit(shape.dim_a, i), v[:, i]) for i in range(k))
        cands.append(psi / np.linalg.norm(psi))
        cands.append(np.kron(_unit(shape.dim_a, 0), v[:, 0]))
    return cands


def _dedupe_states(states: list[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for s in states:
        if all(abs(abs(np.vdot(s, t)) - 1.0) > tol for t in out):
            out.append(s)
    return out


def seesaw_n_prep(asm: Assemblage, n: int, restarts: int = 20, seed: int = 0,
                  pool_random: int | None = None, max_rounds: int = 40,
                  max_pool: int = 64, solver_tol: float = sdp.DEFAULT_SOLVER_TOL,
                  ) -> SeesawResult:
    """Heuristic search for the best rank-n preparation of a noisy assemblage.

    Alternates an exact measurement-and-weight SDP (at fixed branch states)
    with a witness-guided state update.  The returned visibility v comes with
    an explicit model reproducing ``v*sigma_ax + (1-v)*tr(sigma_ax)*total``
    within 1e-6, hence is a certified LOWER bound on the true n-preparability
    visibility; it is never an upper bound or an optimality claim.
    """
    validate(asm).raise_if_invalid()
    if n < 1:
        raise DomainError("rank bound must be at least 1")
    if n > asm.dim:
        raise DomainError(f"rank bound {n} exceeds the assemblage dimension {asm.dim}")
    shape = BipartiteShape(min(n, asm.dim), asm.dim)
    if pool_random is None:
        pool_random = max(4, 2 * asm.dim)
    anchors = _anchor_states(asm, n, shape)

    best: tuple[float, int, int, sdp.SdpSolution, list[np.ndarray]] | None = None
    converged = False
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        pool = _dedupe_states(
            anchors + [qrand.pure_state_sr(rng, shape, n) for _ in range(pool_random)])
        stall = 0
        last_v = -1.0
        for round_idx in range(max_rounds):
            problem = _seesaw_problem(asm, pool, shape)
            solution = sdp.solve(problem, solver_tol=solver_tol)
            if solution.status != "optimal":
                # degenerate pool (e.g. duplicated states); perturb and retry
                pool = _dedupe_states(
                    pool + [qrand.pure_state_sr(rng, shape, n)])[: max_pool]
                continue
            v = min(1.0, solution.value("v"))
            if best is None or v > best[0] + 1e-12:
                best = (v, r, round_idx, solution, list(pool))
            if v >= 1.0 - 1e-9:
                converged = True
                break
            if v - last_v < 1e-7:
                stall += 1
                if stall >= 5:
                    converged = True
                    break
            else:
                stall = 0
            last_v = v
            cands = _witness_candidates(solution.dual_values, asm, n, shape, rng)
            keep = _prune_pool(pool, solution, max_pool - len(cands))
            pool = _dedupe_states(keep + cands)[: max_pool]
        if best is not None and best[0] >= 1.0 - 1e-9:
            break

    if best is None:
        raise ValidationError("see-saw failed to solve any measurement step")
    v, r_idx, round_idx, solution, pool = best
    model = _model_from_solution(asm, solution, pool, n, shape)
    target = compat.depolarize_assemblage(asm, v)
    defect = model.defect(target)
    if defect > 1e-6:
        raise ValidationError(
            f"see-saw model reproduces the noisy assemblage only within {defect:.3e}")
    return SeesawResult(model=model, visibility=v, converged=converged,
                        restart_index=r_idx, rounds=round_idx + 1)


def _prune_pool(pool: list[np.ndarray], solution: sdp.SdpSolution, limit: int
                ) -> list[np.ndarray]:
    weights = [solution.value(f"p{j}") for j in range(len(pool))]
    order = np.argsort(weights)[::-1]
    kept = [pool[j] for j in order if weights[j] > 1e-10]
    return kept[: max(limit, 1)]


def _model_from_solution(asm: Assemblage, solution: sdp.SdpSolution,
                         pool: list[np.ndarray], n: int, shape: BipartiteShape
                         ) -> PreparationModel:
    counts = asm.outcome_counts
    weights = []
    states = []
    measurements = []
    for j, psi in enumerate(pool):
        p_j = solution.value(f"p{j}")
        if p_j <= 1e-10:
            continue
        povms = []
        for x, o in enumerate(counts):
            effects = [solution.block_values[f"N{j}_{x}_{a}"] / p_j for a in range(o)]
            effects = [_clip_effect(e) for e in effects]
            s = linalg.hermitianize(sum(effects))
            isq = linalg.pinv_sqrt(s, rank_tol=1e-14)
            proj = np.eye(shape.dim_a) - isq @ s @ isq
            effects = [linalg.hermitianize(isq @ e @ isq) for e in effects]
            effects[0] = linalg.hermitianize(effects[0] + proj)
            povms.append(Povm(effects))
        weights.append(p_j)
        states.append(psi)
        measurements.append(povms)
    total = sum(weights)
    weights = [w / total for w in weights]
    return PreparationModel(np.array(weights), states, measurements, shape, rank_bound=n)


def _clip_effect(e: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(linalg.hermitianize(e))
    return linalg.hermitianize((v * np.clip(w, 0.0, None)) @ linalg.dagger(v))


# ---------------------------------------------------------------------------
# compression dimension report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompressionEntry:
    n: int
    status: str            # "exact" for n = 1, "heuristic" above
    achieved: bool         # visibility 1 reached (within 1e-6)
    visibility: float
    margin: float | None = None


@dataclass(eq=False)
class CompressionReport:
    entries: tuple[CompressionEntry, ...]

    def entry(self, n: int) -> CompressionEntry:
        for e in self.entries:
            if e.n == n:
                return e
        raise KeyError(n)


def min_compression_dim(ms: MeasurementSet, sigma: DensityState, n_max: int,
                        seed: int = 0, restarts: int = 8,
                        cap: int = compat.DEFAULT_STRATEGY_CAP) -> CompressionReport:
    """Per-n compressibility report for a measurement set.

    The n = 1 entry is exact (joint measurability SDP).  Entries for n >= 2
    come from the see-saw on the sandwiched assemblage: visibility 1 means an
    explicit model was found (a certificate of n-simulability at numerical
    tolerance); anything less is only a heuristic lower bound, never a proof
    of non-simulability.
    """
    entries = []
    jm = compat.jm_test(ms, cap=cap)
    entries.append(CompressionEntry(
        n=1, status="exact", achieved=jm.feasible,
        visibility=1.0 if jm.feasible else float("nan"), margin=jm.margin))
    if n_max >= 2:
        asm = sandwich(sigma, ms)
        for n in range(2, n_max + 1):
            res = seesaw_n_prep(asm, n, restarts=restarts, seed=seed)
            entries.append(CompressionEntry(
                n=n, status="heuristic", achieved=res.visibility >= 1.0 - 1e-6,
                visibility=res.visibility))
            if entries[-1].achieved:
                break
    return CompressionReport(tuple(entries))
