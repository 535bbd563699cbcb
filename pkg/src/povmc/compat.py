"""Exact SDP characterizations of joint measurability and local hidden state models.

Both problems share one structure: decompose a family of operator targets
over the deterministic response strategies ``lambda: settings -> outcomes``,

    sum_{lambda : lambda(x) = a} G_lambda = B_{a|x},   G_lambda >= 0,

which is fully general because stochastic responses decompose over
deterministic ones with the mixing weights absorbed into the G's.  With
``B_{a|x} = M_{a|x}`` this is joint measurability (the G's form a parent
POVM); with ``B_{a|x} = sigma_{a|x}`` it is a local hidden state model.

Feasibility is decided by a margin program: maximize t subject to
``G_lambda - t*I >= 0`` and the affine constraints.  The targets are feasible
iff the optimal margin is >= 0; a negative optimum turns the dual solution
into an explicit witness (operators ``W_{a|x}`` with
``sum_x W_{lambda(x)|x} >= 0`` for every strategy while
``sum_{a,x} <W_{a|x}, B_{a|x}> = t* < 0``, violating the bound 0 satisfied by
every feasible family).  Every certificate is re-verified independently of
the solver before it is returned.

Noise robustness uses the depolarizing-style map by default (measurements
are mixed toward ``tr(M) I/d``, assemblage members toward ``tr(sigma_ax) *
total``); since the mix is affine in the visibility, the robustness is
computed by a single SDP, then confirmed by explicit feasibility tests at
``eta* -/+ 2e-4``.  Other (monotone) noise maps can be plugged in and are
handled by bisection.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import linalg, sdp
from .errors import DomainError, StrategyCapError, ValidationError
from .objects import (Assemblage, DensityState, MeasurementSet, Povm, sandwich,
                      validate)

logger = logging.getLogger(__name__)

DEFAULT_STRATEGY_CAP = 4096
#: Tolerance on model reconstruction (parent and LHS model invariants).
MODEL_TOL = 1e-7
#: Robustness confirmation offset: feasible at eta - GAP, infeasible at eta + GAP.
ROBUSTNESS_GAP = 2e-4
BISECT_TOL = 1e-4


def deterministic_strategies(outcome_counts: Sequence[int]) -> list[tuple[int, ...]]:
    """All deterministic assignments of one outcome per setting."""
    return list(itertools.product(*[range(o) for o in outcome_counts]))


# ---------------------------------------------------------------------------
# models and witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParentModel:
    """Parent POVM plus response kernel reproducing a measurement set.

    ``response[x][a, lam]`` is the probability of announcing outcome ``a`` for
    setting ``x`` given parent outcome ``lam``; the SDP always produces the
    deterministic special case (``strategies`` records the assignment), but
    stochastic kernels are accepted so converted models can round-trip.
    """

    parent: Povm
    response: tuple[np.ndarray, ...]
    strategies: tuple[tuple[int, ...], ...] | None = None

    @property
    def is_deterministic(self) -> bool:
        return all(np.all((r == 0.0) | (r == 1.0)) for r in self.response)

    def reconstruct(self) -> MeasurementSet:
        povms = []
        for r in self.response:
            effects = []
            for a in range(r.shape[0]):
                e = sum(r[a, lam] * g for lam, g in enumerate(self.parent.effects))
                effects.append(linalg.hermitianize(e))
            povms.append(Povm(effects, check=False))
        return MeasurementSet(povms, check=False)

    def defect(self, ms: MeasurementSet) -> float:
        rec = self.reconstruct()
        return max(float(np.abs(rec.effect(x, a) - ms.effect(x, a)).max())
                   for x in range(ms.settings) for a in range(ms.outcome_counts[x]))


@dataclass(frozen=True, eq=False)
class LhsModel:
    """Hidden states plus response kernel reproducing an assemblage."""

    hidden_states: tuple[np.ndarray, ...]
    response: tuple[np.ndarray, ...]
    strategies: tuple[tuple[int, ...], ...] | None = None

    def reconstruct_members(self) -> list[list[np.ndarray]]:
        out = []
        for r in self.response:
            row = []
            for a in range(r.shape[0]):
                t = sum(r[a, lam] * h for lam, h in enumerate(self.hidden_states))
                row.append(linalg.hermitianize(t))
            out.append(row)
        return out

    def total(self) -> np.ndarray:
        return linalg.hermitianize(sum(self.hidden_states))

    def defect(self, asm: Assemblage) -> float:
        rec = self.reconstruct_members()
        return max(float(np.abs(rec[x][a] - asm.member(x, a)).max())
                   for x in range(asm.settings) for a in range(asm.outcome_counts[x]))


@dataclass(frozen=True, eq=False)
class Witness:
    """Certificate that no feasible decomposition exists.

    ``operators[x][a]`` are Hermitian; every feasible family satisfies
    ``sum_{a,x} <W_{a|x}, B_{a|x}> >= 0`` because each strategy combination
    ``sum_x W_{lambda(x)|x}`` is PSD, while the certified ``value`` is
    negative.  ``normalization`` records the margin-variable scaling (equal to
    one for a properly scaled witness).
    """

    operators: tuple[tuple[np.ndarray, ...], ...]
    value: float
    normalization: float
    strategy_min_eig: float

    def evaluate(self, targets: Sequence[Sequence[np.ndarray]]) -> float:
        return sum(float(np.real(np.trace(w @ np.asarray(t, dtype=complex))))
                   for row_w, row_t in zip(self.operators, targets)
                   for w, t in zip(row_w, row_t))


def verify_witness(witness: Witness, targets: Sequence[Sequence[np.ndarray]],
                   outcome_counts: Sequence[int], psd_tol: float = 1e-6,
                   value_tol: float = 1e-7) -> bool:
    """Re-check the two witness conditions directly from its operators."""
    min_eig = min(
        linalg.min_eig(sum(witness.operators[x][s[x]] for x in range(len(outcome_counts))))
        for s in deterministic_strategies(outcome_counts))
    value = witness.evaluate(targets)
    return min_eig >= -psd_tol and value < -value_tol


@dataclass(eq=False)
class DecompositionResult:
    """Outcome of a parent-decomposition feasibility test."""

    feasible: bool
    margin: float
    parent_effects: tuple[np.ndarray, ...] | None
    strategies: tuple[tuple[int, ...], ...]
    witness: Witness | None
    solution: sdp.SdpSolution
    problem: sdp.SdpProblem
    verification: sdp.CertificateReport


@dataclass(eq=False)
class JmResult:
    feasible: bool
    model: ParentModel | None
    witness: Witness | None
    margin: float
    solution: sdp.SdpSolution
    problem: sdp.SdpProblem
    verification: sdp.CertificateReport


@dataclass(eq=False)
class SteeringResult:
    feasible: bool  # True = LHS model exists (unsteerable)
    model: LhsModel | None
    witness: Witness | None
    margin: float
    solution: sdp.SdpSolution
    problem: sdp.SdpProblem
    verification: sdp.CertificateReport


# ---------------------------------------------------------------------------
# the shared margin program
# ---------------------------------------------------------------------------


def _margin_problem(targets: list[list[np.ndarray]], total: np.ndarray,
                    strategies: list[tuple[int, ...]]) -> sdp.SdpProblem:
    d = total.shape[0]
    n_strat = len(strategies)
    outcome_counts = [len(row) for row in targets]
    blocks = [(f"G{j}", d) for j in range(n_strat)]
    eye = np.eye(d)
    constraints = [sdp.Equality(
        "total", total,
        matrix_terms=tuple(sdp.MatrixTerm(f"G{j}") for j in range(n_strat)),
        scalar_terms=(sdp.ScalarTerm("margin", n_strat * eye),),
    )]
    for x, o in enumerate(outcome_counts):
        for a in range(o - 1):
            members = tuple(sdp.MatrixTerm(f"G{j}") for j, s in enumerate(strategies) if s[x] == a)
            constraints.append(sdp.Equality(
                f"c{x}_{a}", targets[x][a],
                matrix_terms=members,
                scalar_terms=(sdp.ScalarTerm("margin", (n_strat / o) * eye),),
            ))
    objective = sdp.Objective(sense="max", scalar_coeffs={"margin": 1.0})
    return sdp.SdpProblem(blocks, constraints, objective, free_scalars=("margin",))


def _clip_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(linalg.hermitianize(m))
    return linalg.hermitianize((v * np.clip(w, 0.0, None)) @ linalg.dagger(v))


def _normalize_family(effects: list[np.ndarray], total: np.ndarray) -> list[np.ndarray]:
    """Conjugate a PSD family so it sums exactly to ``total`` (assumed full rank)."""
    s = linalg.hermitianize(sum(effects))
    isq = linalg.pinv_sqrt(s, rank_tol=1e-14)
    root = linalg.matrix_sqrt(_clip_psd(total))
    return [linalg.hermitianize(root @ isq @ e @ isq @ root) for e in effects]


def _fold_witness(duals: dict[str, np.ndarray], outcome_counts: Sequence[int],
                  margin: float, strategies: list[tuple[int, ...]]) -> Witness:
    d = duals["total"].shape[0]
    ops: list[list[np.ndarray]] = []
    for x, o in enumerate(outcome_counts):
        row = [duals[f"c{x}_{a}"] if a < o - 1 else np.zeros((d, d), dtype=complex)
               for a in range(o)]
        ops.append(row)
    # absorb the total-constraint dual into setting 0 (it multiplies sum_a B_{a|0} = total)
    ops[0] = [w + duals["total"] for w in ops[0]]
    min_eig = min(
        linalg.min_eig(sum(ops[x][s[x]] for x in range(len(outcome_counts))))
        for s in strategies)
    n_strat = len(strategies)
    normalization = n_strat * float(np.real(np.trace(duals["total"])))
    for x, o in enumerate(outcome_counts):
        for a in range(o - 1):
            normalization += (n_strat / o) * float(np.real(np.trace(duals[f"c{x}_{a}"])))
    return Witness(
        operators=tuple(tuple(linalg.hermitianize(w) for w in row) for row in ops),
        value=margin, normalization=normalization, strategy_min_eig=min_eig)


def solve_parent_decomposition(targets: list[list[np.ndarray]], total: np.ndarray,
                               cap: int = DEFAULT_STRATEGY_CAP,
                               solver_tol: float = sdp.DEFAULT_SOLVER_TOL,
                               normalize: bool = True) -> DecompositionResult:
    """Feasibility of ``sum_{lambda(x)=a} G_lambda = B_{a|x}`` over PSD G's.

    Decided via the margin program.  Exactly-boundary instances (margin within
    solver tolerance of zero) are resolved in favor of feasibility when the
    rounded decomposition reconstructs the targets within the model tolerance.
    """
    outcome_counts = [len(row) for row in targets]
    n_strat = int(np.prod(outcome_counts))
    if n_strat > cap:
        raise StrategyCapError(
            f"{n_strat} deterministic strategies exceed the cap {cap}; "
            "refusing to build the SDP (raise the cap explicitly if intended)")
    strategies = deterministic_strategies(outcome_counts)
    problem = _margin_problem(targets, total, strategies)
    solution = sdp.solve(problem, solver_tol=solver_tol)
    if solution.status != "optimal":
        raise ValidationError(
            f"margin program did not solve cleanly: {solution.status} ({solution.message})")
    verification = sdp.verify_certificate(problem, solution)
    if not verification.ok:
        raise ValidationError(
            "solver output failed independent certificate verification: "
            + ", ".join(c.name for c in verification.failures()))
    margin = solution.free_values["margin"]
    boundary = max(solver_tol, 1e-8)

    if margin >= -boundary:
        d = total.shape[0]
        effects = [_clip_psd(solution.block_values[f"G{j}"] + max(margin, 0.0) * np.eye(d))
                   for j in range(n_strat)]
        if normalize:
            effects = _normalize_family(effects, total)
        defect = _family_defect(effects, targets, strategies, total)
        if defect <= MODEL_TOL:
            return DecompositionResult(
                feasible=True, margin=margin, parent_effects=tuple(effects),
                strategies=tuple(strategies), witness=None,
                solution=solution, problem=problem, verification=verification)
        if margin >= 0.0:
            raise ValidationError(
                f"feasible margin {margin:.2e} but the rounded decomposition "
                f"reconstructs the targets only within {defect:.3e}")

    witness = _fold_witness(solution.dual_values, outcome_counts, margin, strategies)
    if not verify_witness(witness, targets, outcome_counts,
                          psd_tol=10 * solver_tol, value_tol=boundary / 2):
        raise ValidationError(
            f"boundary-degenerate instance (margin {margin:.2e}): neither a valid "
            "decomposition nor a verified witness could be extracted")
    return DecompositionResult(
        feasible=False, margin=margin, parent_effects=None,
        strategies=tuple(strategies), witness=witness,
        solution=solution, problem=problem, verification=verification)


def _family_defect(effects, targets, strategies, total) -> float:
    defect = float(np.abs(sum(effects) - total).max())
    for x, row in enumerate(targets):
        for a in range(len(row) - 1):
            acc = sum(effects[j] for j, s in enumerate(strategies) if s[x] == a)
            if isinstance(acc, int):
                acc = np.zeros_like(total)
            defect = max(defect, float(np.abs(acc - row[a]).max()))
    return defect


def _response_from_strategies(strategies, outcome_counts) -> tuple[np.ndarray, ...]:
    out = []
    for x, o in enumerate(outcome_counts):
        r = np.zeros((o, len(strategies)))
        for lam, s in enumerate(strategies):
            r[s[x], lam] = 1.0
        out.append(r)
    return tuple(out)


# ---------------------------------------------------------------------------
# joint measurability / LHS front ends
# ---------------------------------------------------------------------------


def jm_test(ms: MeasurementSet, cap: int = DEFAULT_STRATEGY_CAP,
            solver_tol: float = sdp.DEFAULT_SOLVER_TOL) -> JmResult:
    """Exact joint-measurability test with a parent model or a witness."""
    validate(ms).raise_if_invalid()
    targets = [[np.asarray(e) for e in p.effects] for p in ms.povms]
    res = solve_parent_decomposition(targets, np.eye(ms.dim, dtype=complex), cap, solver_tol)
    model = None
    if res.feasible:
        model = ParentModel(
            parent=Povm(res.parent_effects),
            response=_response_from_strategies(res.strategies, ms.outcome_counts),
            strategies=res.strategies)
        defect = model.defect(ms)
        if defect > MODEL_TOL:
            raise ValidationError(f"parent model reconstructs the set only within {defect:.3e}")
    return JmResult(res.feasible, model, res.witness, res.margin,
                    res.solution, res.problem, res.verification)


def lhs_test(asm: Assemblage, cap: int = DEFAULT_STRATEGY_CAP,
             solver_tol: float = sdp.DEFAULT_SOLVER_TOL) -> SteeringResult:
    """Exact local-hidden-state test: LHS model or steering witness."""
    validate(asm).raise_if_invalid()
    targets = [[np.asarray(m) for m in row] for row in asm.members]
    # no exact renormalization of the hidden states: the total may be rank
    # deficient, and the LHS invariant is the 1e-7 reconstruction anyway
    res = solve_parent_decomposition(targets, asm.total.matrix, cap, solver_tol,
                                     normalize=False)
    model = None
    if res.feasible:
        model = LhsModel(
            hidden_states=res.parent_effects,
            response=_response_from_strategies(res.strategies, asm.outcome_counts),
            strategies=res.strategies)
        defect = model.defect(asm)
        if defect > MODEL_TOL:
            raise ValidationError(f"LHS model reconstructs the assemblage only within {defect:.3e}")
    return SteeringResult(res.feasible, model, res.witness, res.margin,
                          res.solution, res.problem, res.verification)


# ---------------------------------------------------------------------------
# noise robustness
# ---------------------------------------------------------------------------


def depolarize_measurements(ms: MeasurementSet, eta: float) -> MeasurementSet:
    """Mix every effect toward ``tr(M) I / d`` with visibility ``eta``."""
    d = ms.dim
    eye = np.eye(d)
    povms = []
    for p in ms.povms:
        effects = [eta * e + (1.0 - eta) * (np.trace(e).real / d) * eye for e in p.effects]
        povms.append(Povm(effects))
    return MeasurementSet(povms)


def depolarize_assemblage(asm: Assemblage, eta: float) -> Assemblage:
    """Mix every member toward ``tr(sigma_ax) * total`` with visibility ``eta``."""
    members = [[eta * m + (1.0 - eta) * np.trace(m).real * asm.total.matrix for m in row]
               for row in asm.members]
    return Assemblage(members, asm.total)


@dataclass(eq=False)
class RobustnessResult:
    eta_star: float
    lower: JmResult | SteeringResult | None
    upper: JmResult | SteeringResult | None
    solution: sdp.SdpSolution | None
    method: str


def _affine_robustness_problem(targets, total, strategies, noise_targets) -> sdp.SdpProblem:
    d = total.shape[0]
    n_strat = len(strategies)
    outcome_counts = [len(row) for row in targets]
    blocks = [(f"G{j}", d) for j in range(n_strat)] + [("eta", 1), ("eta_slack", 1)]
    constraints = [sdp.Equality(
        "total", total,
        matrix_terms=tuple(sdp.MatrixTerm(f"G{j}") for j in range(n_strat)))]
    for x, o in enumerate(outcome_counts):
        for a in range(o - 1):
            members = tuple(sdp.MatrixTerm(f"G{j}") for j, s in enumerate(strategies) if s[x] == a)
            drift = linalg.hermitianize(np.asarray(targets[x][a]) - np.asarray(noise_targets[x][a]))
            constraints.append(sdp.Equality(
                f"c{x}_{a}", np.asarray(noise_targets[x][a]),
                matrix_terms=members,
                scalar_terms=(sdp.ScalarTerm("eta", -drift),),
            ))
    constraints.append(sdp.Equality(
        "eta_cap", np.eye(1),
        matrix_terms=(sdp.MatrixTerm("eta"), sdp.MatrixTerm("eta_slack"))))
    objective = sdp.Objective(sense="max", block_coeffs={"eta": np.eye(1)})
    return sdp.SdpProblem(blocks, constraints, objective)


def _robustness(targets, total, feasibility: Callable[[float], object],
                cap: int, solver_tol: float, noise_targets) -> RobustnessResult:
    outcome_counts = [len(row) for row in targets]
    n_strat = int(np.prod(outcome_counts))
    if n_strat > cap:
        raise StrategyCapError(f"{n_strat} deterministic strategies exceed the cap {cap}")
    strategies = deterministic_strategies(outcome_counts)
    problem = _affine_robustness_problem(targets, total, strategies, noise_targets)
    solution = sdp.solve(problem, solver_tol=solver_tol)
    if solution.status != "optimal":
        raise ValidationError(f"robustness SDP failed: {solution.status} ({solution.message})")
    verification = sdp.verify_certificate(problem, solution)
    if not verification.ok:
        raise ValidationError("robustness SDP output failed certificate verification")
    eta = min(1.0, solution.value("eta"))
    lower = upper = None
    if eta > ROBUSTNESS_GAP:
        lower = feasibility(eta - ROBUSTNESS_GAP)
        if not lower.feasible:
            return _bisect_robustness(feasibility, 0.0, eta)
    if eta < 1.0 - ROBUSTNESS_GAP:
        upper = feasibility(eta + ROBUSTNESS_GAP)
        if upper.feasible:
            return _bisect_robustness(feasibility, eta, 1.0)
    return RobustnessResult(eta, lower, upper, solution, method="affine_sdp")


def _bisect_robustness(feasibility: Callable[[float], object], lo: float, hi: float,
                       tol: float = BISECT_TOL) -> RobustnessResult:
    """Bisection fallback for non-affine noise maps (assumed monotone)."""
    lo_res = feasibility(lo)
    if not lo_res.feasible:
        raise DomainError("even the fully noisy family is infeasible; noise map is not admissible")
    hi_res = feasibility(hi)
    if hi_res.feasible:
        return RobustnessResult(hi, hi_res, None, None, method="bisection")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r = feasibility(mid)
        if r.feasible:
            lo, lo_res = mid, r
        else:
            hi, hi_res = mid, r
    return RobustnessResult(0.5 * (lo + hi), lo_res, hi_res, None, method="bisection")


def jm_depolarizing_robustness(ms: MeasurementSet, cap: int = DEFAULT_STRATEGY_CAP,
                               solver_tol: float = sdp.DEFAULT_SOLVER_TOL,
                               noise: Callable[[MeasurementSet, float], MeasurementSet] | None = None,
                               ) -> RobustnessResult:
    """Largest visibility at which the noisy measurement set stays compatible.

    The default depolarizing noise is affine in eta, so the value comes from a
    single SDP and is confirmed by jm_test at ``eta* -/+ 2e-4``; a custom
    ``noise(ms, eta)`` map switches to bisection at resolution 1e-4.
    """
    validate(ms).raise_if_invalid()

    if noise is not None:
        return _bisect_robustness(lambda eta: jm_test(noise(ms, eta), cap, solver_tol), 0.0, 1.0)

    def feas(eta: float) -> JmResult:
        return jm_test(depolarize_measurements(ms, eta), cap, solver_tol)

    d = ms.dim
    targets = [[np.asarray(e) for e in p.effects] for p in ms.povms]
    noise_targets = [[(np.trace(e).real / d) * np.eye(d) for e in p.effects] for p in ms.povms]
    return _robustness(targets, np.eye(d, dtype=complex), feas, cap, solver_tol, noise_targets)


def steering_robustness(asm: Assemblage, cap: int = DEFAULT_STRATEGY_CAP,
                        solver_tol: float = sdp.DEFAULT_SOLVER_TOL,
                        noise: Callable[[Assemblage, float], Assemblage] | None = None,
                        ) -> RobustnessResult:
    """Largest visibility at which the noisy assemblage stays unsteerable."""
    validate(asm).raise_if_invalid()

    if noise is not None:
        return _bisect_robustness(lambda eta: lhs_test(noise(asm, eta), cap, solver_tol), 0.0, 1.0)

    def feas(eta: float) -> SteeringResult:
        return lhs_test(depolarize_assemblage(asm, eta), cap, solver_tol)

    targets = [[np.asarray(m) for m in row] for row in asm.members]
    noise_targets = [[np.trace(m).real * asm.total.matrix for m in row] for row in asm.members]
    return _robustness(targets, asm.total.matrix, feas, cap, solver_tol, noise_targets)


# ---------------------------------------------------------------------------
# LHS <-> separable preparation converters
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeparablePreparation:
    """Finite ensemble of pure product states plus measurements on the A side.

    The prepared assemblage is ``sigma_{a|x} = sum_i q_i <alpha_i| A_{a|x}
    |alpha_i> |beta_i><beta_i|``.
    """

    weights: tuple[float, ...]
    a_vectors: tuple[np.ndarray, ...]
    b_vectors: tuple[np.ndarray, ...]
    measurements: MeasurementSet

    @property
    def dim_a(self) -> int:
        return self.a_vectors[0].size

    @property
    def dim_b(self) -> int:
        return self.b_vectors[0].size

    def state_matrix(self) -> np.ndarray:
        rho = np.zeros((self.dim_a * self.dim_b,) * 2, dtype=complex)
        for q, a, b in zip(self.weights, self.a_vectors, self.b_vectors):
            v = linalg.kron(a.reshape(-1, 1), b.reshape(-1, 1)).reshape(-1)
            rho += q * np.outer(v, np.conjugate(v))
        return linalg.hermitianize(rho)

    def prepared_members(self) -> list[list[np.ndarray]]:
        out = []
        for povm in self.measurements.povms:
            row = []
            for e in povm.effects:
                m = sum(q * float(np.real(np.vdot(a, e @ a))) * np.outer(b, np.conjugate(b))
                        for q, a, b in zip(self.weights, self.a_vectors, self.b_vectors))
                row.append(linalg.hermitianize(m))
            out.append(row)
        return out


def lhs_to_separable_preparation(model: LhsModel, drop_tol: float = 1e-12) -> SeparablePreparation:
    """Build the explicit separable preparation realizing an LHS model.

    The A side carries one basis vector per hidden state, measurements are the
    diagonal operators ``A_{a|x} = sum_lam p(a|x,lam) |lam><lam|`` (projective
    whenever the response is deterministic), and each hidden state is split
    into its eigenvectors to make the B parts pure.
    """
    n_lam = len(model.hidden_states)
    weights: list[float] = []
    a_vecs: list[np.ndarray] = []
    b_vecs: list[np.ndarray] = []
    for lam, t in enumerate(model.hidden_states):
        w, v = linalg.hermitian_eig(t)
        for j in range(w.size):
            if w[j] > drop_tol:
                e_lam = np.zeros(n_lam, dtype=complex)
                e_lam[lam] = 1.0
                weights.append(float(w[j]))
                a_vecs.append(e_lam)
                b_vecs.append(v[:, j].copy())
    povms = []
    for r in model.response:
        effects = [np.diag(r[a, :]).astype(complex) for a in range(r.shape[0])]
        povms.append(Povm(effects))
    return SeparablePreparation(tuple(weights), tuple(a_vecs), tuple(b_vecs),
                                MeasurementSet(povms))


def separable_preparation_to_lhs(prep: SeparablePreparation) -> LhsModel:
    """Collapse a separable preparation into hidden states ``q_i |beta_i><beta_i|``."""
    hidden = tuple(q * np.outer(b, np.conjugate(b))
                   for q, b in zip(prep.weights, prep.b_vectors))
    response = []
    for povm in prep.measurements.povms:
        r = np.zeros((povm.outcomes, len(prep.weights)))
        for a, e in enumerate(povm.effects):
            for i, alpha in enumerate(prep.a_vectors):
                r[a, i] = float(np.real(np.vdot(alpha, e @ alpha)))
        response.append(r)
    return LhsModel(hidden_states=hidden, response=tuple(response))


def assemblage_of_lhs(model: LhsModel) -> Assemblage:
    members = model.reconstruct_members()
    return Assemblage(members, DensityState(model.total()))


def sandwich_correspondence(sigma: DensityState, ms: MeasurementSet) -> Assemblage:
    """Assemblage ``sigma^{1/2} M sigma^{1/2}`` whose LHS question equals the JM question."""
    return sandwich(sigma, ms)
