"""Validated domain types: states, measurements, channels, assemblages.

Constructors check their structural invariants and raise ValidationError on
violation; pass ``check=False`` to build an intentionally broken object and
inspect it with :func:`validate`, which returns a report instead of raising.

Conventions:

* Choi matrices use the state-normalized convention: ``choi_of_channel``
  returns ``(Lambda ⊗ id)(|psi+><psi+|)`` with ``|psi+>`` the normalized
  maximally entangled vector, so the Choi matrix has trace one and its
  in-marginal is ``I / d_in``.  Multiply by ``d_in`` to get the unnormalized
  convention.
* Transposes are always taken in an explicitly passed basis, never implicitly.
* Assemblage members are stored subnormalized; the totals sum to a trace-one
  state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionError, DomainError, ValidationError
from .linalg import BipartiteShape

TAU_HERM = linalg.TAU_HERM
TAU_PSD = linalg.TAU_PSD
#: Tolerance on normalization sums (POVM completeness, trace preservation, ...).
TAU_SUM = 1e-9
#: Tolerance on state traces.
TAU_TRACE = 1e-10


@dataclass(frozen=True)
class Violation:
    name: str
    magnitude: float
    tolerance: float
    message: str


@dataclass(frozen=True)
class ValidationReport:
    subject: str
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self) -> None:
        if self.violations:
            lines = [f"{self.subject} failed validation:"]
            lines += [f"  {v.name}: {v.message}" for v in self.violations]
            raise ValidationError("\n".join(lines))


def _check(violations: list[Violation], name: str, magnitude: float, tol: float, message: str) -> None:
    if magnitude > tol:
        violations.append(Violation(name, float(magnitude), float(tol), message))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityState:
    """Trace-one PSD operator."""

    matrix: np.ndarray

    def __init__(self, matrix: np.ndarray, check: bool = True):
        object.__setattr__(self, "matrix", linalg.as_square_matrix(matrix, "state"))
        if check:
            validate(self).raise_if_invalid()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityState":
        return DensityState(np.eye(dim) / dim)


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite family of PSD effects summing to the identity."""

    effects: tuple[np.ndarray, ...]

    def __init__(self, effects: Sequence[np.ndarray], check: bool = True):
        mats = tuple(linalg.as_square_matrix(e, f"effect {i}") for i, e in enumerate(effects))
        object.__setattr__(self, "effects", mats)
        if check:
            validate(self).raise_if_invalid()

    @property
    def outcomes(self) -> int:
        return len(self.effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Labelled family of POVMs acting on a common space (outcome counts may differ)."""

    povms: tuple[Povm, ...]

    def __init__(self, povms: Sequence[Povm], check: bool = True):
        object.__setattr__(self, "povms", tuple(povms))
        if check:
            validate(self).raise_if_invalid()

    @property
    def settings(self) -> int:
        return len(self.povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return tuple(p.outcomes for p in self.povms)

    def effect(self, x: int, a: int) -> np.ndarray:
        return self.povms[x].effects[a]


@dataclass(frozen=True, eq=False)
class Assemblage:
    """Setting-indexed families of subnormalized states with a common total."""

    members: tuple[tuple[np.ndarray, ...], ...]
    total: DensityState

    def __init__(self, members: Sequence[Sequence[np.ndarray]], total: DensityState | None = None,
                 check: bool = True):
        mats = tuple(
            tuple(linalg.as_square_matrix(m, f"member ({x},{a})") for a, m in enumerate(row))
            for x, row in enumerate(members)
        )
        object.__setattr__(self, "members", mats)
        if total is None:
            total = DensityState(linalg.hermitianize(sum(mats[0])), check=check)
        object.__setattr__(self, "total", total)
        if check:
            validate(self).raise_if_invalid()

    @property
    def settings(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.total.dim

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return tuple(len(row) for row in self.members)

    def member(self, x: int, a: int) -> np.ndarray:
        return self.members[x][a]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving channel given by Kraus operators (d_in -> d_out)."""

    kraus_ops: tuple[np.ndarray, ...]

    def __init__(self, kraus_ops: Sequence[np.ndarray], check: bool = True):
        ops = tuple(np.asarray(k, dtype=complex) for k in kraus_ops)
        object.__setattr__(self, "kraus_ops", ops)
        if check:
            validate(self).raise_if_invalid()

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Trace-one Choi state on out ⊗ in with in-marginal I / d_in."""

    matrix: np.ndarray
    shape: BipartiteShape  # (dim_out, dim_in)

    def __init__(self, matrix: np.ndarray, shape: BipartiteShape, check: bool = True):
        object.__setattr__(self, "matrix", linalg.as_square_matrix(matrix, "Choi matrix"))
        object.__setattr__(self, "shape", BipartiteShape(*shape))
        if check:
            validate(self).raise_if_invalid()

    @property
    def dim_in(self) -> int:
        return self.shape.dim_b

    @property
    def dim_out(self) -> int:
        return self.shape.dim_a


@dataclass(frozen=True, eq=False)
class PointwiseKrausModel:
    """Simulation model: weights mu, rank-bounded branch operators K, local POVMs.

    A branch lambda compresses the d-dimensional input through ``K_lambda``
    (shape n_lambda x d, rank at most ``rank_bound``) and measures the local
    POVMs ``local_measurements[lambda][x]``.  The represented measurements are
    ``M_{a|x} = sum_lambda mu_lambda K_lambda^dag N_{a|x,lambda} K_lambda``.

    ``transpose_bases`` optionally carries, per branch, the unitary whose
    columns span the basis in which local measurements were transposed when
    the model was built from a shared-state preparation; converters use it to
    undo that transposition.
    """

    weights: np.ndarray
    kraus_ops: tuple[np.ndarray, ...]
    local_measurements: tuple[tuple[Povm, ...], ...]
    rank_bound: int
    transpose_bases: tuple[np.ndarray | None, ...] = ()

    def __init__(self, weights: np.ndarray, kraus_ops: Sequence[np.ndarray],
                 local_measurements: Sequence[Sequence[Povm]], rank_bound: int,
                 transpose_bases: Sequence[np.ndarray | None] | None = None,
                 check: bool = True):
        object.__setattr__(self, "weights", np.asarray(weights, dtype=float).reshape(-1))
        object.__setattr__(self, "kraus_ops", tuple(np.asarray(k, dtype=complex) for k in kraus_ops))
        object.__setattr__(self, "local_measurements", tuple(tuple(ms) for ms in local_measurements))
        object.__setattr__(self, "rank_bound", int(rank_bound))
        if transpose_bases is None:
            transpose_bases = (None,) * len(self.kraus_ops)
        object.__setattr__(self, "transpose_bases", tuple(transpose_bases))
        if check:
            validate(self).raise_if_invalid()

    @property
    def branches(self) -> int:
        return len(self.kraus_ops)

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def settings(self) -> int:
        return len(self.local_measurements[0])


@dataclass(frozen=True, eq=False)
class Instrument:
    """Family of CP trace-non-increasing branches summing to a channel."""

    branches: tuple[tuple[np.ndarray, ...], ...]
    output_dim: int

    def __init__(self, branches: Sequence[Sequence[np.ndarray]], output_dim: int | None = None,
                 check: bool = True):
        ops = tuple(tuple(np.asarray(k, dtype=complex) for k in br) for br in branches)
        object.__setattr__(self, "branches", ops)
        if output_dim is None:
            output_dim = max(k.shape[0] for br in ops for k in br)
        object.__setattr__(self, "output_dim", int(output_dim))
        if check:
            validate(self).raise_if_invalid()


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _validate_density(s: DensityState) -> list[Violation]:
    v: list[Violation] = []
    m = s.matrix
    _check(v, "hermitian", linalg.herm_defect(m), TAU_HERM, "matrix is not Hermitian")
    lo = linalg.min_eig(m)
    _check(v, "positive", max(0.0, -lo), TAU_PSD, f"smallest eigenvalue {lo:.3e}")
    _check(v, "trace", abs(np.trace(m).real - 1.0) + abs(np.trace(m).imag), TAU_TRACE,
           f"trace {np.trace(m):.12f} != 1")
    return v


def _validate_povm(p: Povm) -> list[Violation]:
    v: list[Violation] = []
    if not p.effects:
        v.append(Violation("nonempty", 1.0, 0.0, "POVM has no effects"))
        return v
    d = p.effects[0].shape[0]
    for i, e in enumerate(p.effects):
        if e.shape[0] != d:
            v.append(Violation("dims", 1.0, 0.0, f"effect {i} has dimension {e.shape[0]} != {d}"))
            return v
        _check(v, f"hermitian[{i}]", linalg.herm_defect(e), TAU_HERM, f"effect {i} is not Hermitian")
        lo = linalg.min_eig(e)
        _check(v, f"positive[{i}]", max(0.0, -lo), TAU_PSD,
               f"effect {i} has eigenvalue {lo:.3e}")
    defect = float(np.abs(sum(p.effects) - np.eye(d)).max())
    _check(v, "normalization", defect, TAU_SUM, f"effects sum to identity only within {defect:.3e}")
    return v


def _validate_measurement_set(ms: MeasurementSet) -> list[Violation]:
    v: list[Violation] = []
    if not ms.povms:
        v.append(Violation("nonempty", 1.0, 0.0, "measurement set has no settings"))
        return v
    d = ms.povms[0].dim
    for x, p in enumerate(ms.povms):
        if p.dim != d:
            v.append(Violation("dims", 1.0, 0.0, f"setting {x} acts on dimension {p.dim} != {d}"))
        v.extend(Violation(f"povm[{x}].{w.name}", w.magnitude, w.tolerance, w.message)
                 for w in _validate_povm(p))
    return v


def _validate_assemblage(asm: Assemblage) -> list[Violation]:
    v: list[Violation] = []
    d = asm.total.dim
    v.extend(Violation(f"total.{w.name}", w.magnitude, w.tolerance, w.message)
             for w in _validate_density(asm.total))
    for x, row in enumerate(asm.members):
        for a, m in enumerate(row):
            if m.shape[0] != d:
                v.append(Violation("dims", 1.0, 0.0, f"member ({x},{a}) dimension mismatch"))
                return v
            _check(v, f"hermitian[{x},{a}]", linalg.herm_defect(m), TAU_HERM,
                   f"member ({x},{a}) not Hermitian")
            lo = linalg.min_eig(m)
            _check(v, f"positive[{x},{a}]", max(0.0, -lo), TAU_PSD,
                   f"member ({x},{a}) has eigenvalue {lo:.3e}")
        defect = float(np.abs(sum(row) - asm.total.matrix).max())
        _check(v, f"nonsignalling[{x}]", defect, TAU_SUM,
               f"setting {x} sums to the total only within {defect:.3e}")
    return v


def _validate_kraus(c: KrausChannel) -> list[Violation]:
    v: list[Violation] = []
    if not c.kraus_ops:
        v.append(Violation("nonempty", 1.0, 0.0, "channel has no Kraus operators"))
        return v
    shape = c.kraus_ops[0].shape
    for i, k in enumerate(c.kraus_ops):
        if k.ndim != 2 or k.shape != shape:
            v.append(Violation("dims", 1.0, 0.0, f"Kraus operator {i} shape {k.shape} != {shape}"))
            return v
    s = sum(linalg.dagger(k) @ k for k in c.kraus_ops)
    defect = float(np.abs(s - np.eye(shape[1])).max())
    _check(v, "trace_preserving", defect, TAU_SUM,
           f"sum K^dag K deviates from identity by {defect:.3e}")
    return v


def _validate_choi(j: ChoiMatrix) -> list[Violation]:
    v: list[Violation] = []
    if j.matrix.shape[0] != j.shape.total:
        v.append(Violation("dims", 1.0, 0.0,
                           f"matrix dimension {j.matrix.shape[0]} != {j.shape.dim_a}*{j.shape.dim_b}"))
        return v
    _check(v, "hermitian", linalg.herm_defect(j.matrix), TAU_HERM, "Choi matrix is not Hermitian")
    lo = linalg.min_eig(j.matrix)
    _check(v, "positive", max(0.0, -lo), TAU_PSD, f"smallest eigenvalue {lo:.3e}")
    marg = linalg.partial_trace(j.matrix, j.shape, "A")
    defect = float(np.abs(marg - np.eye(j.dim_in) / j.dim_in).max())
    _check(v, "in_marginal", defect, TAU_SUM,
           f"in-marginal deviates from I/d by {defect:.3e}")
    return v


def _validate_pointwise(m: PointwiseKrausModel) -> list[Violation]:
    v: list[Violation] = []
    if not m.kraus_ops:
        v.append(Violation("nonempty", 1.0, 0.0, "model has no branches"))
        return v
    if m.weights.size != len(m.kraus_ops) or len(m.local_measurements) != len(m.kraus_ops):
        v.append(Violation("lengths", 1.0, 0.0, "weights / kraus / measurements lengths differ"))
        return v
    _check(v, "weights_nonneg", max(0.0, -float(m.weights.min())), 1e-12, "negative weight")
    _check(v, "weights_sum", abs(float(m.weights.sum()) - 1.0), TAU_SUM,
           f"weights sum to {m.weights.sum():.12f}")
    d = m.dim_in
    s = np.zeros((d, d), dtype=complex)
    for i, k in enumerate(m.kraus_ops):
        if k.shape[1] != d:
            v.append(Violation("dims", 1.0, 0.0, f"branch {i} input dimension mismatch"))
            return v
        sv = np.linalg.svd(k, compute_uv=False)
        rank = int(np.count_nonzero(sv > linalg.RANK_TOL * max(sv[0], 1e-300)))
        if rank > m.rank_bound:
            v.append(Violation(f"rank[{i}]", float(rank), float(m.rank_bound),
                               f"branch {i} has rank {rank} > bound {m.rank_bound}"))
        for x, povm in enumerate(m.local_measurements[i]):
            if povm.dim != k.shape[0]:
                v.append(Violation("dims", 1.0, 0.0,
                                   f"branch {i} setting {x} POVM dimension {povm.dim} != {k.shape[0]}"))
        s += m.weights[i] * (linalg.dagger(k) @ k)
    defect = float(np.abs(s - np.eye(d)).max())
    _check(v, "normalization", defect, TAU_SUM,
           f"sum mu K^dag K deviates from identity by {defect:.3e}")
    return v


def _validate_instrument(ins: Instrument) -> list[Violation]:
    v: list[Violation] = []
    ops = [k for br in ins.branches for k in br]
    if not ops:
        v.append(Violation("nonempty", 1.0, 0.0, "instrument has no Kraus operators"))
        return v
    d = ops[0].shape[1]
    s = sum(linalg.dagger(k) @ k for k in ops)
    defect = float(np.abs(s - np.eye(d)).max())
    _check(v, "trace_preserving", defect, TAU_SUM,
           f"total branch sum deviates from identity by {defect:.3e}")
    return v


_VALIDATORS = {
    DensityState: ("DensityState", _validate_density),
    Povm: ("Povm", _validate_povm),
    MeasurementSet: ("MeasurementSet", _validate_measurement_set),
    Assemblage: ("Assemblage", _validate_assemblage),
    KrausChannel: ("KrausChannel", _validate_kraus),
    ChoiMatrix: ("ChoiMatrix", _validate_choi),
    PointwiseKrausModel: ("PointwiseKrausModel", _validate_pointwise),
    Instrument: ("Instrument", _validate_instrument),
}


def validate(obj) -> ValidationReport:
    """Check all invariants of a domain object, returning a report (never raising)."""
    for cls, (name, fn) in _VALIDATORS.items():
        if isinstance(obj, cls):
            return ValidationReport(name, tuple(fn(obj)))
    raise TypeError(f"no validator for objects of type {type(obj).__name__}")


# ---------------------------------------------------------------------------
# channel representations
# ---------------------------------------------------------------------------


def apply_channel(c: KrausChannel, rho: DensityState | np.ndarray) -> np.ndarray:
    """Schroedinger action ``sum_i K_i rho K_i^dag``."""
    m = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho, dtype=complex)
    if m.shape[0] != c.dim_in:
        raise DimensionError(f"state dimension {m.shape[0]} != channel input {c.dim_in}")
    return sum(k @ m @ linalg.dagger(k) for k in c.kraus_ops)


def heisenberg_apply(c: KrausChannel, a: np.ndarray) -> np.ndarray:
    """Heisenberg action ``sum_i K_i^dag a K_i`` (dual to :func:`apply_channel`)."""
    m = np.asarray(a, dtype=complex)
    if m.shape[0] != c.dim_out:
        raise DimensionError(f"observable dimension {m.shape[0]} != channel output {c.dim_out}")
    return sum(linalg.dagger(k) @ m @ k for k in c.kraus_ops)


def maximally_entangled(dim: int) -> np.ndarray:
    """Normalized vector ``sum_k |k> ⊗ |k> / sqrt(d)``."""
    v = np.zeros(dim * dim, dtype=complex)
    for k in range(dim):
        v[k * dim + k] = 1.0
    return v / np.sqrt(dim)


def choi_of_channel(c: KrausChannel) -> ChoiMatrix:
    """Trace-one Choi state ``(Lambda ⊗ id)(|psi+><psi+|)`` on out ⊗ in."""
    d = c.dim_in
    psi = maximally_entangled(d)
    vecs = [linalg.kron(k, np.eye(d)) @ psi for k in c.kraus_ops]
    j = sum(np.outer(v, np.conjugate(v)) for v in vecs)
    return ChoiMatrix(linalg.hermitianize(j), BipartiteShape(c.dim_out, d))


def kraus_of_choi(j: ChoiMatrix, rank_tol: float = linalg.RANK_TOL) -> KrausChannel:
    """Kraus family from a Choi state; the operator count is the Choi rank at ``rank_tol``."""
    report = validate(j)
    report.raise_if_invalid()
    w, v = linalg.hermitian_eig(j.matrix)
    cutoff = rank_tol * max(w[0], 0.0)
    ops = []
    for i in range(w.size):
        if w[i] > cutoff:
            f = linalg.vec_to_op(v[:, i], j.shape)
            ops.append(np.sqrt(w[i] * j.dim_in) * f)
    return KrausChannel(ops)


# ---------------------------------------------------------------------------
# assemblages and the sandwich correspondence
# ---------------------------------------------------------------------------


def assemblage_from(rho: DensityState | np.ndarray, ms: MeasurementSet,
                    shape: BipartiteShape | None = None) -> Assemblage:
    """Assemblage ``sigma_{a|x} = tr_A[(M_{a|x} ⊗ I) rho]`` from a shared state.

    ``rho`` lives on A ⊗ B with the measurements acting on A.  The split is
    inferred from the measurement dimension unless ``shape`` is given.
    """
    m = rho.matrix if isinstance(rho, DensityState) else linalg.as_square_matrix(rho, "state")
    da = ms.dim
    if shape is None:
        if m.shape[0] % da != 0:
            raise DimensionError(f"state dimension {m.shape[0]} not divisible by {da}")
        shape = BipartiteShape(da, m.shape[0] // da)
    if shape.dim_a != da or shape.total != m.shape[0]:
        raise DimensionError("shape inconsistent with state and measurements")
    eye_b = np.eye(shape.dim_b)
    members = []
    for povm in ms.povms:
        row = [linalg.hermitianize(
            linalg.partial_trace(linalg.kron(e, eye_b) @ m, shape, "A"))
            for e in povm.effects]
        members.append(row)
    total = DensityState(linalg.hermitianize(linalg.partial_trace(m, shape, "A")))
    return Assemblage(members, total)


def sandwich(sigma: DensityState, ms: MeasurementSet,
             rank_tol: float = linalg.RANK_TOL) -> Assemblage:
    """Assemblage ``sigma^{1/2} M_{a|x} sigma^{1/2}`` from a full-rank state."""
    _require_full_rank(sigma, rank_tol)
    if sigma.dim != ms.dim:
        raise DimensionError("state and measurements act on different dimensions")
    root = linalg.matrix_sqrt(sigma.matrix)
    members = [[linalg.hermitianize(root @ e @ root) for e in p.effects] for p in ms.povms]
    return Assemblage(members, DensityState(sigma.matrix))


def unsandwich(asm: Assemblage, rank_tol: float = linalg.RANK_TOL) -> MeasurementSet:
    """Inverse of :func:`sandwich`: ``M_{a|x} = sigma^{-1/2} sigma_{a|x} sigma^{-1/2}``."""
    _require_full_rank(asm.total, rank_tol)
    isq = linalg.pinv_sqrt(asm.total.matrix, rank_tol=rank_tol)
    povms = []
    for row in asm.members:
        effects = [linalg.hermitianize(isq @ m @ isq) for m in row]
        povms.append(Povm(effects))
    return MeasurementSet(povms)


def _require_full_rank(sigma: DensityState, rank_tol: float) -> None:
    w = np.linalg.eigvalsh(sigma.matrix)
    if w[0] <= rank_tol * w[-1]:
        raise DomainError(
            f"state is rank deficient: smallest eigenvalue {w[0]:.3e} "
            f"(largest {w[-1]:.3e}, cutoff ratio {rank_tol:.1e})")


# ---------------------------------------------------------------------------
# Schmidt structure
# ---------------------------------------------------------------------------


def schmidt_rank(phi: np.ndarray, shape: BipartiteShape,
                 rank_tol: float = linalg.RANK_TOL) -> int:
    """Schmidt rank of a pure bipartite vector at the given relative cutoff."""
    return linalg.schmidt_rank_of_vector(phi, shape, rank_tol)


def sn_upper_from_decomposition(rho: DensityState | np.ndarray,
                                weights: Sequence[float],
                                vectors: Sequence[np.ndarray],
                                shape: BipartiteShape,
                                recon_tol: float = 1e-8,
                                rank_tol: float = linalg.RANK_TOL) -> int:
    """Schmidt-number upper bound from an explicit pure-state decomposition.

    Verifies ``sum_i w_i |phi_i><phi_i| = rho`` within ``recon_tol`` and returns
    the largest Schmidt rank among the members.  The result is a certified
    upper bound on SN(rho); the exact Schmidt number of a mixed state is not
    computed anywhere in this package.
    """
    m = rho.matrix if isinstance(rho, DensityState) else linalg.as_square_matrix(rho)
    rec = np.zeros_like(m)
    for w, phi in zip(weights, vectors):
        v = np.asarray(phi, dtype=complex).reshape(-1)
        rec = rec + w * np.outer(v, np.conjugate(v))
    defect = float(np.abs(rec - m).max())
    if defect > recon_tol:
        raise ValidationError(f"decomposition reconstructs the state only within {defect:.3e}")
    return max(schmidt_rank(phi, shape, rank_tol) for phi in vectors)


def sn_lower_entangled_fraction(rho: DensityState | np.ndarray, dim: int | None = None) -> int:
    """Schmidt-number lower bound from the maximally entangled fraction witness.

    Evaluates ``f = max_Phi <Phi| rho |Phi>`` over maximally entangled vectors
    ``Phi = (U ⊗ I)|psi+>``; every state with SN <= n satisfies ``f <= n/d``,
    so ``ceil(d*f)`` is a lower bound on SN(rho).  The maximization is
    heuristic (polar decomposition of reshaped leading eigenvectors), which
    only weakens, never invalidates, the bound.  Lower bound only.
    """
    m = rho.matrix if isinstance(rho, DensityState) else linalg.as_square_matrix(rho)
    if dim is None:
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise DimensionError("state dimension is not a perfect square; pass dim explicitly")
    else:
        d = dim
        if d * d != m.shape[0]:
            raise DimensionError(f"state dimension {m.shape[0]} != {d}^2")
    shape = BipartiteShape(d, d)
    w, v = linalg.hermitian_eig(m)
    best = 0.0
    for i in range(min(3, w.size)):
        if w[i] <= 0:
            break
        f = linalg.vec_to_op(v[:, i], shape)
        uu, _, vvh = np.linalg.svd(f)
        u = uu @ vvh  # closest unitary to the reshaped eigenvector
        phi = linalg.kron(u, np.eye(d)) @ maximally_entangled(d)
        val = float(np.real(np.vdot(phi, m @ phi)))
        best = max(best, val)
    k = int(np.ceil(d * best - 1e-9))
    return min(d, max(1, k))


def model_to_instrument(m: PointwiseKrausModel) -> Instrument:
    """Instrument whose branches are ``rho -> mu_lambda K_lambda rho K_lambda^dag``."""
    branches = [(np.sqrt(mu) * k,) for mu, k in zip(m.weights, m.kraus_ops)]
    out = max(k.shape[0] for k in m.kraus_ops)
    return Instrument(branches, output_dim=out)
