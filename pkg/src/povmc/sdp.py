"""Small-scale semidefinite feasibility/optimization with certificates.

Problems are stated over complex Hermitian PSD variable blocks plus optional
free real scalars, with affine equality constraints and an optional real
linear objective:

    optimize  sum_k <C_k, X_k> + sum_j g_j u_j
    subject   sum_k A_ik(X_k) + sum_j d_ij u_j = T_i     (Hermitian targets)
              X_k >= 0,   u_j free

Each constraint term acts on a block either by real scaling ``X -> c X`` or by
a congruence ``X -> c L X L^dag`` optionally followed by a transpose; both are
Hermiticity-preserving, which keeps every scalarized coefficient real.

Numerical backend: the problem is scalarized over an orthonormal Hermitian
basis, complex blocks are embedded as real symmetric blocks of twice the
dimension via ``H = R + iS  ->  [[R, -S], [S, R]]`` (PSD is preserved both
ways and ``tr(emb(A) emb(B)) = 2 tr(A B)``), and the resulting cone program is
handed to cvxopt's conelp, a primal-dual interior-point method with
Nesterov-Todd scaling.  Solutions are mapped back by projecting onto the
embedded structure, which preserves positivity and all constraint values.
One-dimensional blocks bypass the embedding through the nonnegative orthant.

Infeasibility is only ever declared together with an explicit Farkas
certificate (per-constraint Hermitian ray matrices R_i with
``sum_i <R_i, T_i> = -1``, ``sum_i A_ik^adj(R_i) >= 0`` for every block and
``sum_i <R_i, D_ij> = 0`` for every free scalar), and every certificate can be
re-verified from scratch with :func:`verify_certificate`.  A deterministic
alternating-projection fallback handles pure feasibility problems when the
interior-point method reports numerical trouble.  Nothing here is randomized:
identical inputs give identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from cvxopt import matrix as cvxmatrix
from cvxopt import solvers as cvxsolvers

from . import linalg
from .errors import DimensionError, ValidationError

DEFAULT_SOLVER_TOL = 1e-7
DEFAULT_MAX_ITERATIONS = 500

SCHEMA = "povmc-sdp/1"


# ---------------------------------------------------------------------------
# problem statement
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatrixTerm:
    """Contribution ``scale * L X L^dag`` (transposed if requested) of one block.

    ``left=None`` means the plain scaling ``scale * X`` (block and target must
    then have equal dimension).
    """

    block: str
    scale: float = 1.0
    left: np.ndarray | None = None
    transpose: bool = False


@dataclass(frozen=True, eq=False)
class ScalarTerm:
    """Contribution ``value * matrix`` of a free scalar or a 1x1 block."""

    name: str
    matrix: np.ndarray


def trace_terms(block: str, dim: int, scale: float = 1.0) -> tuple[MatrixTerm, ...]:
    """Terms expressing ``X -> scale * [[tr X]]`` against a 1x1 target."""
    eye = np.eye(dim)
    return tuple(MatrixTerm(block, scale=scale, left=eye[k:k + 1, :]) for k in range(dim))


@dataclass(frozen=True, eq=False)
class Equality:
    """Affine equality with a Hermitian target."""

    label: str
    target: np.ndarray
    matrix_terms: tuple[MatrixTerm, ...] = ()
    scalar_terms: tuple[ScalarTerm, ...] = ()


@dataclass(frozen=True, eq=False)
class Objective:
    sense: Literal["min", "max"]
    block_coeffs: dict[str, np.ndarray] = field(default_factory=dict)
    scalar_coeffs: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """Blocks, free scalars, equality constraints and an optional objective."""

    blocks: tuple[tuple[str, int], ...]
    constraints: tuple[Equality, ...]
    objective: Objective | None = None
    free_scalars: tuple[str, ...] = ()

    def __init__(self, blocks: Sequence[tuple[str, int]], constraints: Sequence[Equality],
                 objective: Objective | None = None, free_scalars: Sequence[str] = ()):
        object.__setattr__(self, "blocks", tuple((str(n), int(d)) for n, d in blocks))
        object.__setattr__(self, "constraints", tuple(constraints))
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "free_scalars", tuple(free_scalars))
        _validate_problem(self)

    @property
    def block_dims(self) -> dict[str, int]:
        return dict(self.blocks)


@dataclass(frozen=True, eq=False)
class InfeasibilityCertificate:
    """Farkas ray proving the constraint system empty on the PSD cone.

    ``ray[label]`` is a Hermitian matrix per constraint; see the module
    docstring for the three verified conditions.
    """

    ray: dict[str, np.ndarray]
    value: float  # sum_i <R_i, T_i>, normalized to -1 by the solver


@dataclass(eq=False)
class SdpSolution:
    status: Literal["optimal", "infeasible", "numerical_trouble"]
    block_values: dict[str, np.ndarray] | None = None
    free_values: dict[str, float] | None = None
    dual_values: dict[str, np.ndarray] | None = None
    objective_value: float | None = None
    dual_objective_value: float | None = None
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    gap: float = float("nan")
    certificate: InfeasibilityCertificate | None = None
    iterations: int = 0
    solver_tol: float = DEFAULT_SOLVER_TOL
    method: str = "interior_point"
    message: str = ""

    def value(self, name: str) -> float:
        """Scalar value of a free scalar or a 1x1 block."""
        if self.free_values is not None and name in self.free_values:
            return self.free_values[name]
        if self.block_values is not None and name in self.block_values:
            return float(self.block_values[name][0, 0].real)
        raise KeyError(name)


@dataclass(frozen=True)
class CertificateCheck:
    name: str
    value: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class CertificateReport:
    checks: tuple[CertificateCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CertificateCheck]:
        return [c for c in self.checks if not c.passed]


# ---------------------------------------------------------------------------
# validation and scalarization
# ---------------------------------------------------------------------------


def _validate_problem(p: SdpProblem) -> None:
    dims = {}
    for name, d in p.blocks:
        if name in dims:
            raise ValidationError(f"duplicate block label {name!r}")
        if d < 1:
            raise ValidationError(f"block {name!r} has nonpositive dimension")
        dims[name] = d
    for name in p.free_scalars:
        if name in dims:
            raise ValidationError(f"label {name!r} used for both a block and a free scalar")
    scalars = set(p.free_scalars) | {n for n, d in p.blocks if d == 1}
    labels = set()
    for c in p.constraints:
        if c.label in labels:
            raise ValidationError(f"duplicate constraint label {c.label!r}")
        labels.add(c.label)
        t = linalg.as_square_matrix(c.target, f"target of {c.label!r}")
        if linalg.herm_defect(t) > linalg.TAU_HERM:
            raise ValidationError(f"target of {c.label!r} is not Hermitian")
        m = t.shape[0]
        for term in c.matrix_terms:
            if term.block not in dims:
                raise ValidationError(f"constraint {c.label!r} references unknown block {term.block!r}")
            bd = dims[term.block]
            if term.left is None:
                if bd != m:
                    raise DimensionError(
                        f"constraint {c.label!r}: block {term.block!r} has dimension {bd}, target {m}")
            else:
                L = np.asarray(term.left)
                if L.shape != (m, bd):
                    raise DimensionError(
                        f"constraint {c.label!r}: left factor shape {L.shape} != ({m},{bd})")
        for term in c.scalar_terms:
            if term.name not in scalars:
                raise ValidationError(
                    f"constraint {c.label!r} scalar term {term.name!r} is not a free scalar or 1x1 block")
            D = linalg.as_square_matrix(term.matrix, f"scalar term of {c.label!r}")
            if D.shape[0] != m or linalg.herm_defect(D) > linalg.TAU_HERM:
                raise ValidationError(f"constraint {c.label!r}: scalar coefficient invalid")
    if p.objective is not None:
        for name, cmat in p.objective.block_coeffs.items():
            if name not in dims:
                raise ValidationError(f"objective references unknown block {name!r}")
            cm = linalg.as_square_matrix(cmat, "objective coefficient")
            if cm.shape[0] != dims[name] or linalg.herm_defect(cm) > linalg.TAU_HERM:
                raise ValidationError(f"objective coefficient for {name!r} invalid")
        for name in p.objective.scalar_coeffs:
            if name not in p.free_scalars:
                raise ValidationError(f"objective scalar coefficient {name!r} is not a free scalar")


def hermitian_basis(dim: int) -> list[np.ndarray]:
    """Orthonormal basis of the real space of dim x dim Hermitian matrices."""
    basis = []
    for pnt in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[pnt, pnt] = 1.0
        basis.append(e)
    for pnt in range(dim):
        for q in range(pnt + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[pnt, q] = e[q, pnt] = 1.0 / np.sqrt(2.0)
            basis.append(e)
            e = np.zeros((dim, dim), dtype=complex)
            e[pnt, q] = -1j / np.sqrt(2.0)
            e[q, pnt] = 1j / np.sqrt(2.0)
            basis.append(e)
    return basis


def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[R, -S], [S, R]] of H = R + iS."""
    r, s = h.real, h.imag
    return np.block([[r, -s], [s, r]])


def unembed_symmetric(m: np.ndarray) -> np.ndarray:
    """Project a real symmetric 2d x 2d matrix back onto embedded Hermitian form."""
    n = m.shape[0] // 2
    r = (m[:n, :n] + m[n:, n:]) / 2.0
    s = (m[n:, :n] - m[:n, n:]) / 2.0
    return linalg.hermitianize(r + 1j * s)


def _row_matrix(term: MatrixTerm, b_r: np.ndarray) -> np.ndarray:
    """Hermitian A with <B_r, term(X)> = <A, X>."""
    base = b_r.T if term.transpose else b_r
    if term.left is None:
        return term.scale * base
    L = np.asarray(term.left, dtype=complex)
    return term.scale * (linalg.dagger(L) @ base @ L)


def _adjoint_apply(term: MatrixTerm, y: np.ndarray) -> np.ndarray:
    """Adjoint of the term map applied to a Hermitian target-space matrix."""
    base = y.T if term.transpose else y
    if term.left is None:
        return term.scale * base
    L = np.asarray(term.left, dtype=complex)
    return term.scale * (linalg.dagger(L) @ base @ L)


def _term_forward(term: MatrixTerm, x: np.ndarray) -> np.ndarray:
    out = x if term.left is None else np.asarray(term.left, dtype=complex) @ x @ linalg.dagger(
        np.asarray(term.left, dtype=complex))
    out = term.scale * out
    return out.T if term.transpose else out


class _Scalarized:
    """Flattened real form of an SdpProblem plus index bookkeeping."""

    def __init__(self, p: SdpProblem):
        self.problem = p
        self.block_dims = p.block_dims
        self.lin_blocks = [n for n, d in p.blocks if d == 1]
        self.sdp_blocks = [(n, d) for n, d in p.blocks if d > 1]
        self.lin_index = {n: i for i, n in enumerate(self.lin_blocks)}
        self.n_lin = len(self.lin_blocks)
        self.sdp_sizes = [2 * d for _, d in self.sdp_blocks]
        offs = [self.n_lin]
        for s in self.sdp_sizes:
            offs.append(offs[-1] + s * s)
        self.sdp_offsets = offs[:-1]
        self.len_z = offs[-1] if self.sdp_blocks else self.n_lin
        self.free_index = {n: j for j, n in enumerate(p.free_scalars)}
        # constraint rows: one per Hermitian basis element of each target
        self.row_slices: list[tuple[str, slice, int]] = []
        self.bases: dict[int, list[np.ndarray]] = {}
        n_rows = 0
        for c in p.constraints:
            m = c.target.shape[0]
            if m not in self.bases:
                self.bases[m] = hermitian_basis(m)
            self.row_slices.append((c.label, slice(n_rows, n_rows + m * m), m))
            n_rows += m * m
        self.n_rows = n_rows

    def seg(self, name: str) -> tuple[int, int]:
        """(offset, embedded size) of a block inside the z vector."""
        if name in self.lin_index:
            return self.lin_index[name], 1
        for (n, d), off, s in zip(self.sdp_blocks, self.sdp_offsets, self.sdp_sizes):
            if n == name:
                return off, s
        raise KeyError(name)

    def put_block(self, vec: np.ndarray, name: str, h: np.ndarray, factor: float) -> None:
        """Add factor * (embedded h) into the z-layout vector segment of a block."""
        off, s = self.seg(name)
        if s == 1:
            vec[off] += factor * h.real[0, 0]
        else:
            vec[off:off + s * s] += 0.5 * factor * embed_hermitian(h).reshape(-1)

    def build_matrices(self, sense_sign: float):
        """Assemble (c, G, h, A, b) for cvxopt conelp; see module docstring."""
        p = self.problem
        G = np.zeros((self.len_z, self.n_rows))
        cvec = np.zeros(self.n_rows)
        A = np.zeros((len(p.free_scalars), self.n_rows))
        for (label, rows, m), c in zip(self.row_slices, p.constraints):
            basis = self.bases[m]
            for r, b_r in enumerate(basis):
                i = rows.start + r
                cvec[i] = float(np.real(np.trace(b_r @ c.target)))
                col = np.zeros(self.len_z)
                for term in c.matrix_terms:
                    self.put_block(col, term.block, _row_matrix(term, b_r), -1.0)
                G[:, i] = G[:, i] + col
                for term in c.scalar_terms:
                    d = float(np.real(np.trace(b_r @ term.matrix)))
                    if term.name in self.free_index:
                        A[self.free_index[term.name], i] += -d
                    else:
                        off, _ = self.seg(term.name)
                        G[off, i] += -d
        h = np.zeros(self.len_z)
        b = np.zeros(len(p.free_scalars))
        if p.objective is not None:
            for name, cmat in p.objective.block_coeffs.items():
                self.put_block(h, name, np.asarray(cmat, dtype=complex), -sense_sign)
            for name, g in p.objective.scalar_coeffs.items():
                b[self.free_index[name]] = -sense_sign * g
        return cvec, G, h, A, b

    def extract_blocks(self, z: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for n in self.lin_blocks:
            off, _ = self.seg(n)
            out[n] = np.array([[complex(z[off])]])
        for (n, d), off, s in zip(self.sdp_blocks, self.sdp_offsets, self.sdp_sizes):
            m = z[off:off + s * s].reshape(s, s)
            out[n] = unembed_symmetric((m + m.T) / 2.0)
        return out

    def assemble_duals(self, x: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for (label, rows, m) in self.row_slices:
            basis = self.bases[m]
            w = np.zeros((m, m), dtype=complex)
            for r, b_r in enumerate(basis):
                w = w + x[rows.start + r] * b_r
            out[label] = linalg.hermitianize(w)
        return out


# ---------------------------------------------------------------------------
# residual computation (shared by solve and verify_certificate)
# ---------------------------------------------------------------------------


def constraint_residuals(p: SdpProblem, block_values: dict[str, np.ndarray],
                         free_values: dict[str, float]) -> dict[str, float]:
    """Max-abs entry of each constraint's operator residual."""
    out = {}
    for c in p.constraints:
        acc = -np.asarray(c.target, dtype=complex)
        for term in c.matrix_terms:
            acc = acc + _term_forward(term, block_values[term.block])
        for term in c.scalar_terms:
            if term.name in free_values:
                v = free_values[term.name]
            else:
                v = float(block_values[term.name][0, 0].real)
            acc = acc + v * np.asarray(term.matrix, dtype=complex)
        out[c.label] = float(np.abs(acc).max())
    return out


def primal_objective(p: SdpProblem, block_values, free_values) -> float:
    if p.objective is None:
        return 0.0
    val = 0.0
    for name, cmat in p.objective.block_coeffs.items():
        val += float(np.real(np.trace(np.asarray(cmat, dtype=complex) @ block_values[name])))
    for name, g in p.objective.scalar_coeffs.items():
        val += g * free_values[name]
    return val


def dual_slacks(p: SdpProblem, duals: dict[str, np.ndarray], sense_sign: float
                ) -> tuple[dict[str, np.ndarray], dict[str, float]]:
    """Dual slack per block and dual equality violation per free scalar.

    With duals w_i and objective sign s (+1 max, -1 min), dual feasibility is
    ``Z_k = sum_i adj_ik(w_i) - s*C_k >= 0`` and
    ``sum_i <w_i, D_ij> = s*g_j`` for every free scalar.
    """
    dims = p.block_dims
    slacks = {n: np.zeros((d, d), dtype=complex) for n, d in p.blocks}
    frees = {n: 0.0 for n in p.free_scalars}
    for c in p.constraints:
        w = duals[c.label]
        for term in c.matrix_terms:
            slacks[term.block] = slacks[term.block] + _adjoint_apply(term, w)
        for term in c.scalar_terms:
            val = float(np.real(np.trace(w @ np.asarray(term.matrix, dtype=complex))))
            if term.name in frees:
                frees[term.name] += val
            else:
                slacks[term.name] = slacks[term.name] + val * np.eye(1)
    if p.objective is not None:
        for name, cmat in p.objective.block_coeffs.items():
            slacks[name] = slacks[name] - sense_sign * np.asarray(cmat, dtype=complex)
        for name, g in p.objective.scalar_coeffs.items():
            frees[name] -= sense_sign * g
    return ({n: linalg.hermitianize(z) for n, z in slacks.items()},
            frees)


def dual_objective(p: SdpProblem, duals: dict[str, np.ndarray]) -> float:
    return sum(float(np.real(np.trace(duals[c.label] @ np.asarray(c.target, dtype=complex))))
               for c in p.constraints)


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def solve(p: SdpProblem, solver_tol: float = DEFAULT_SOLVER_TOL,
          max_iterations: int = DEFAULT_MAX_ITERATIONS) -> SdpSolution:
    """Solve the problem, returning certified results only.

    Any outcome that cannot be backed by recomputed residuals (optimality) or
    an explicit Farkas ray (infeasibility) is reported as numerical_trouble,
    never as a silent answer.  Deterministic for identical inputs.
    """
    # Pure feasibility problems get an internal min-trace objective: with an
    # all-zero objective the cone backend can exit early from its least-squares
    # initialization with an unusable dual point, while min sum tr(X_k) is
    # bounded, changes nothing about feasibility, and keeps certificates valid.
    pure_feasibility = p.objective is None
    internal = p
    if pure_feasibility:
        internal = SdpProblem(
            p.blocks, p.constraints,
            Objective("min", block_coeffs={n: np.eye(d) for n, d in p.blocks}),
            p.free_scalars)
    sc = _Scalarized(internal)
    sense_sign = 1.0
    if internal.objective is not None and internal.objective.sense == "min":
        sense_sign = -1.0
    cvec, G, h, A, b = sc.build_matrices(sense_sign)
    dims = {"l": sc.n_lin, "q": [], "s": sc.sdp_sizes}
    options = {
        "show_progress": False,
        "maxiters": int(max_iterations),
        "abstol": solver_tol / 10.0,
        "reltol": solver_tol / 10.0,
        "feastol": solver_tol / 10.0,
    }
    kwargs = {}
    if len(p.free_scalars):
        kwargs["A"] = cvxmatrix(A)
        kwargs["b"] = cvxmatrix(b)
    try:
        sol = cvxsolvers.conelp(cvxmatrix(cvec), cvxmatrix(G), cvxmatrix(h), dims,
                                options=options, **kwargs)
    except (ValueError, ArithmeticError, ZeroDivisionError) as exc:
        sol = None
        failure = f"cone solver raised {type(exc).__name__}: {exc}"
    if sol is None:
        result = SdpSolution(status="numerical_trouble", solver_tol=solver_tol, message=failure)
        return _maybe_projection_fallback(p, result, solver_tol, max_iterations)

    status = sol["status"]
    iterations = int(sol.get("iterations", 0))

    if status == "optimal":
        z = np.array(sol["z"]).reshape(-1)
        x = np.array(sol["x"]).reshape(-1)
        blocks = sc.extract_blocks(z)
        frees = {n: float(np.array(sol["y"]).reshape(-1)[j]) for n, j in sc.free_index.items()}
        duals = sc.assemble_duals(x)
        res = constraint_residuals(internal, blocks, frees)
        neg = {n: max(0.0, -linalg.min_eig(v)) for n, v in blocks.items()}
        primal_res = max(list(res.values()) + list(neg.values()))
        slacks, free_duals = dual_slacks(internal, duals, sense_sign)
        dual_res = max(
            [max(0.0, -linalg.min_eig(zk)) for zk in slacks.values()]
            + [abs(v) for v in free_duals.values()] + [0.0])
        pobj_internal = sense_sign * primal_objective(internal, blocks, frees)
        dobj_internal = dual_objective(internal, duals)
        gap = abs(pobj_internal - dobj_internal)
        solution = SdpSolution(
            status="optimal",
            block_values=blocks,
            free_values=frees,
            dual_values=duals,
            objective_value=None if pure_feasibility else sense_sign * pobj_internal,
            dual_objective_value=None if pure_feasibility else sense_sign * dobj_internal,
            primal_residual=primal_res,
            dual_residual=dual_res,
            gap=0.0 if pure_feasibility else gap,
            iterations=iterations,
            solver_tol=solver_tol,
        )
        if primal_res > solver_tol or dual_res > solver_tol or gap > solver_tol:
            solution.status = "numerical_trouble"
            solution.message = (
                f"interior point finished but residuals exceed tolerance "
                f"(primal {primal_res:.2e}, dual {dual_res:.2e}, gap {gap:.2e})")
        return solution

    if status == "dual infeasible":
        # cvxopt's dual is our constraint system: this is OUR infeasibility.
        x = np.array(sol["x"]).reshape(-1)
        ray = sc.assemble_duals(x)
        value = sum(float(np.real(np.trace(ray[c.label] @ np.asarray(c.target, dtype=complex))))
                    for c in p.constraints)
        solution = SdpSolution(
            status="infeasible",
            certificate=InfeasibilityCertificate(ray=ray, value=value),
            dual_values=ray,
            iterations=iterations,
            solver_tol=solver_tol,
            primal_residual=float("inf"),
            dual_residual=0.0,
            gap=0.0,
            message="constraint system infeasible (Farkas ray attached)",
        )
        report = verify_certificate(p, solution)
        if not report.ok:
            solution.status = "numerical_trouble"
            solution.message = "solver reported infeasibility but the certificate failed re-verification"
        return solution

    if status == "primal infeasible":
        result = SdpSolution(
            status="numerical_trouble", solver_tol=solver_tol, iterations=iterations,
            message="problem is unbounded (the solver found a dual infeasibility certificate)")
        return result

    result = SdpSolution(
        status="numerical_trouble", solver_tol=solver_tol, iterations=iterations,
        message=f"cone solver status {status!r} after {iterations} iterations")
    return _maybe_projection_fallback(p, result, solver_tol, max_iterations)


def _maybe_projection_fallback(p: SdpProblem, failed: SdpSolution, solver_tol: float,
                               max_iterations: int) -> SdpSolution:
    if p.objective is not None:
        return failed
    fallback = solve_feasibility_by_projection(p, solver_tol, max_iterations * 20)
    if fallback.status == "optimal":
        fallback.message = "interior point failed; feasible point found by alternating projections"
        return fallback
    return failed


def solve_feasibility_by_projection(p: SdpProblem, solver_tol: float = DEFAULT_SOLVER_TOL,
                                    max_iterations: int = 10000) -> SdpSolution:
    """Alternating projections onto the affine constraint set and the PSD cone.

    Pure feasibility only (the objective is ignored).  Converges to a feasible
    point when one exists; never claims infeasibility.
    """
    sc = _Scalarized(p)
    # coordinates: Hermitian-basis coords per block, then free scalars
    coord_slices: dict[str, slice] = {}
    off = 0
    for name, d in p.blocks:
        coord_slices[name] = slice(off, off + d * d)
        off += d * d
    free_off = {}
    for name in p.free_scalars:
        free_off[name] = off
        off += 1
    n_coords = off
    bases = {d: hermitian_basis(d) for _, d in p.blocks}

    M = np.zeros((sc.n_rows, n_coords))
    t = np.zeros(sc.n_rows)
    for (label, rows, m), c in zip(sc.row_slices, p.constraints):
        basis_t = sc.bases[m]
        for r, b_r in enumerate(basis_t):
            i = rows.start + r
            t[i] = float(np.real(np.trace(b_r @ c.target)))
            for term in c.matrix_terms:
                a = _row_matrix(term, b_r)
                bd = p.block_dims[term.block]
                col = coord_slices[term.block]
                M[i, col] += np.array([float(np.real(np.trace(bb @ a))) for bb in bases[bd]])
            for term in c.scalar_terms:
                d_coef = float(np.real(np.trace(b_r @ term.matrix)))
                if term.name in free_off:
                    M[i, free_off[term.name]] += d_coef
                else:
                    M[i, coord_slices[term.name].start] += d_coef
    pinv = np.linalg.pinv(M, rcond=1e-12)

    x = np.zeros(n_coords)
    for _ in range(max_iterations):
        x = x - pinv @ (M @ x - t)
        neg = 0.0
        for name, d in p.blocks:
            coords = x[coord_slices[name]]
            mat = sum(c * b for c, b in zip(coords, bases[d]))
            w, v = np.linalg.eigh(linalg.hermitianize(mat))
            neg = max(neg, max(0.0, -float(w[0])))
            wc = np.clip(w, 0.0, None)
            mat = (v * wc) @ linalg.dagger(v)
            x[coord_slices[name]] = [float(np.real(np.trace(b @ mat))) for b in bases[d]]
        aff = float(np.abs(M @ x - t).max()) if sc.n_rows else 0.0
        if aff <= solver_tol and neg <= solver_tol:
            blocks = {}
            for name, d in p.blocks:
                coords = x[coord_slices[name]]
                blocks[name] = linalg.hermitianize(sum(c * b for c, b in zip(coords, bases[d])))
            frees = {name: float(x[free_off[name]]) for name in p.free_scalars}
            res = constraint_residuals(p, blocks, frees)
            primal_res = max(list(res.values())
                             + [max(0.0, -linalg.min_eig(v)) for v in blocks.values()])
            return SdpSolution(
                status="optimal", block_values=blocks, free_values=frees,
                objective_value=0.0, dual_objective_value=0.0,
                primal_residual=primal_res, dual_residual=0.0, gap=0.0,
                solver_tol=solver_tol, method="alternating_projection")
    return SdpSolution(status="numerical_trouble", solver_tol=solver_tol,
                       method="alternating_projection",
                       message=f"alternating projections stalled after {max_iterations} iterations")


# ---------------------------------------------------------------------------
# certificate verification
# ---------------------------------------------------------------------------


def verify_certificate(p: SdpProblem, s: SdpSolution, tol: float | None = None) -> CertificateReport:
    """Re-verify a solution from scratch, independently of the solver internals.

    For optimal solutions: operator-level constraint residuals, block
    positivity, dual feasibility, weak duality and the duality gap.  For
    infeasibility certificates: the three Farkas conditions.  All numbers are
    recomputed here from the problem data.
    """
    if tol is None:
        tol = s.solver_tol
    checks: list[CertificateCheck] = []

    def add(name: str, value: float, bound: float) -> None:
        checks.append(CertificateCheck(name, float(value), float(bound), bool(value <= bound)))

    if s.status == "optimal":
        res = constraint_residuals(p, s.block_values, s.free_values or {})
        add("constraint_residual", max(res.values()) if res else 0.0, tol)
        neg = max([max(0.0, -linalg.min_eig(v)) for v in s.block_values.values()] + [0.0])
        add("block_positivity", neg, tol)
        pobj = primal_objective(p, s.block_values, s.free_values or {})
        add("objective_recomputation",
            abs(pobj - (s.objective_value if s.objective_value is not None else 0.0)),
            max(tol, 1e-9 * max(1.0, abs(pobj))))
        if s.dual_values is not None and p.objective is not None:
            sense_sign = 1.0 if p.objective.sense == "max" else -1.0
            slacks, free_duals = dual_slacks(p, s.dual_values, sense_sign)
            dneg = max([max(0.0, -linalg.min_eig(z)) for z in slacks.values()] + [0.0])
            add("dual_feasibility", dneg, tol)
            add("dual_free_equalities", max([abs(v) for v in free_duals.values()] + [0.0]), tol)
            dobj = dual_objective(p, s.dual_values)
            add("gap", abs(sense_sign * pobj - dobj), tol)
            # weak duality: the dual bound lies on the correct side
            add("weak_duality", sense_sign * pobj - dobj, tol)
    elif s.status == "infeasible":
        if s.certificate is None:
            checks.append(CertificateCheck("certificate_present", 1.0, 0.0, False))
            return CertificateReport(tuple(checks))
        ray = s.certificate.ray
        missing = [c.label for c in p.constraints if c.label not in ray]
        checks.append(CertificateCheck("ray_complete", float(len(missing)), 0.0, not missing))
        if missing:
            return CertificateReport(tuple(checks))
        value = sum(float(np.real(np.trace(ray[c.label] @ np.asarray(c.target, dtype=complex))))
                    for c in p.constraints)
        add("ray_normalization", abs(value + 1.0), max(100 * tol, 1e-5))
        slacks, free_combo = dual_slacks(
            SdpProblem(p.blocks, p.constraints, None, p.free_scalars), ray, 1.0)
        neg = max([max(0.0, -linalg.min_eig(z)) for z in slacks.values()] + [0.0])
        add("ray_block_positivity", neg, max(10 * tol, 1e-6))
        add("ray_free_annihilation", max([abs(v) for v in free_combo.values()] + [0.0]),
            max(10 * tol, 1e-6))
    else:
        checks.append(CertificateCheck("status_certifiable", 1.0, 0.0, False))
    return CertificateReport(tuple(checks))


# ---------------------------------------------------------------------------
# JSON debugging dumps
# ---------------------------------------------------------------------------


def _encode_matrix(m: np.ndarray) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def problem_to_json(p: SdpProblem) -> str:
    doc = {
        "schema": SCHEMA,
        "kind": "problem",
        "blocks": [[n, d] for n, d in p.blocks],
        "free_scalars": list(p.free_scalars),
        "constraints": [
            {
                "label": c.label,
                "target": _encode_matrix(c.target),
                "matrix_terms": [
                    {"block": t.block, "scale": t.scale, "transpose": t.transpose,
                     "left": None if t.left is None else _encode_matrix(t.left)}
                    for t in c.matrix_terms],
                "scalar_terms": [{"name": t.name, "matrix": _encode_matrix(t.matrix)}
                                 for t in c.scalar_terms],
            }
            for c in p.constraints],
        "objective": None if p.objective is None else {
            "sense": p.objective.sense,
            "block_coeffs": {n: _encode_matrix(m) for n, m in p.objective.block_coeffs.items()},
            "scalar_coeffs": dict(p.objective.scalar_coeffs),
        },
    }
    return json.dumps(doc, sort_keys=True)


def solution_to_json(s: SdpSolution) -> str:
    doc = {
        "schema": SCHEMA,
        "kind": "solution",
        "status": s.status,
        "objective_value": s.objective_value,
        "dual_objective_value": s.dual_objective_value,
        "primal_residual": None if np.isnan(s.primal_residual) else s.primal_residual,
        "dual_residual": None if np.isnan(s.dual_residual) else s.dual_residual,
        "gap": None if np.isnan(s.gap) else s.gap,
        "iterations": s.iterations,
        "method": s.method,
        "message": s.message,
        "block_values": None if s.block_values is None else
            {n: _encode_matrix(v) for n, v in s.block_values.items()},
        "free_values": s.free_values,
        "dual_values": None if s.dual_values is None else
            {n: _encode_matrix(v) for n, v in s.dual_values.items()},
        "certificate": None if s.certificate is None else
            {"value": s.certificate.value,
             "ray": {n: _encode_matrix(v) for n, v in s.certificate.ray.items()}},
    }
    return json.dumps(doc, sort_keys=True)
