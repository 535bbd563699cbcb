"""Batch command line front end.

Exit codes separate certificates from guesses:

* 0: definitive answer backed by a certificate (SDP optimality/infeasibility
  witness, exact construction);
* 2: heuristic-only answer (see-saw lower bounds, scans containing them);
* 1: refusal (validation failure, malformed input, strategy cap, solver
  trouble).

Output is deterministic for identical inputs and seed, except for the
``generated_at`` timestamp field which consumers should exclude when
comparing runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import compat, compress, cvlab, serialize
from .errors import PovmcError
from .objects import (Assemblage, ChoiMatrix, DensityState, KrausChannel,
                      MeasurementSet, PointwiseKrausModel, choi_of_channel,
                      kraus_of_choi, validate)

EXIT_CERTIFIED = 0
EXIT_REFUSAL = 1
EXIT_HEURISTIC = 2


def _emit(doc: dict, args) -> None:
    doc = {"schema": "povmc/1", "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
           **doc}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_text(text: str, args) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_typed(path, expected=None):
    obj = serialize.load(path)
    if expected is not None and not isinstance(obj, expected):
        names = expected.__name__ if isinstance(expected, type) else \
            "/".join(t.__name__ for t in expected)
        raise PovmcError(f"{path}: expected a {names} document, got {type(obj).__name__}")
    return obj


def _witness_doc(witness: compat.Witness) -> dict:
    return {
        "operators": [[serialize.encode_matrix(w) for w in row] for row in witness.operators],
        "value": witness.value,
        "normalization": witness.normalization,
        "strategy_min_eig": witness.strategy_min_eig,
    }


def cmd_validate(args) -> int:
    obj = serialize.load(args.input)
    report = validate(obj)
    _emit({
        "type": "validation_report",
        "subject": report.subject,
        "ok": report.ok,
        "violations": [
            {"name": v.name, "magnitude": v.magnitude, "tolerance": v.tolerance,
             "message": v.message} for v in report.violations],
    }, args)
    return EXIT_CERTIFIED if report.ok else EXIT_REFUSAL


def cmd_jm(args) -> int:
    ms = _load_typed(args.input, MeasurementSet)
    res = compat.jm_test(ms, cap=args.cap, solver_tol=args.tol)
    doc = {
        "type": "jm_result",
        "feasible": res.feasible,
        "margin": res.margin,
        "certified": res.verification.ok,
    }
    if res.model is not None:
        doc["parent_model"] = serialize.to_dict(res.model)
    if res.witness is not None:
        doc["witness"] = _witness_doc(res.witness)
    _emit(doc, args)
    return EXIT_CERTIFIED


def cmd_steer(args) -> int:
    asm = _load_typed(args.input, Assemblage)
    res = compat.lhs_test(asm, cap=args.cap, solver_tol=args.tol)
    doc = {
        "type": "steering_result",
        "unsteerable": res.feasible,
        "margin": res.margin,
        "certified": res.verification.ok,
    }
    if res.model is not None:
        doc["lhs_model"] = serialize.to_dict(res.model)
    if res.witness is not None:
        doc["witness"] = _witness_doc(res.witness)
    _emit(doc, args)
    return EXIT_CERTIFIED


def cmd_robustness(args) -> int:
    obj = _load_typed(args.input, (MeasurementSet, Assemblage))
    if args.noise != "depolarizing":
        raise PovmcError(f"unknown noise model {args.noise!r} (available: depolarizing)")
    if isinstance(obj, MeasurementSet):
        res = compat.jm_depolarizing_robustness(obj, cap=args.cap, solver_tol=args.tol)
        kind = "jm_robustness"
    else:
        res = compat.steering_robustness(obj, cap=args.cap, solver_tol=args.tol)
        kind = "steering_robustness"
    _emit({
        "type": kind,
        "noise": args.noise,
        "eta_star": res.eta_star,
        "method": res.method,
        "confirmed_feasible_below": res.lower is not None and res.lower.feasible,
        "confirmed_infeasible_above": res.upper is not None and not res.upper.feasible,
    }, args)
    return EXIT_CERTIFIED


def cmd_compress(args) -> int:
    asm = _load_typed(args.input, Assemblage)
    res = compress.seesaw_n_prep(asm, args.n, restarts=args.restarts, seed=args.seed,
                                 solver_tol=args.tol)
    _emit({
        "type": "compress_result",
        "n": args.n,
        "seed": args.seed,
        "visibility": res.visibility,
        "heuristic": True,
        "converged": res.converged,
        "model": serialize.to_dict(res.model),
    }, args)
    return EXIT_HEURISTIC  # see-saw answers are lower bounds, never certificates


def cmd_translate(args) -> int:
    direction = args.direction
    if direction == "jm-to-sim":
        pm = _load_typed(args.input, compat.ParentModel)
        out = compress.one_sim_from_jm(pm)
    elif direction == "sim-to-jm":
        model = _load_typed(args.input, PointwiseKrausModel)
        out = compress.jm_from_one_sim(model)
    elif direction == "lhs-to-separable":
        model = _load_typed(args.input, compat.LhsModel)
        out = compat.lhs_to_separable_preparation(model)
    elif direction == "separable-to-lhs":
        prep = _load_typed(args.input, compat.SeparablePreparation)
        out = compat.separable_preparation_to_lhs(prep)
    elif direction in ("prep-to-sim", "sim-to-prep"):
        if not args.sigma:
            raise PovmcError(f"direction {direction} requires --sigma (full-rank total state)")
        sigma = _load_typed(args.sigma, DensityState)
        if direction == "prep-to-sim":
            pm = _load_typed(args.input, compress.PreparationModel)
            out = compress.prep_to_sim(pm, sigma)
        else:
            model = _load_typed(args.input, PointwiseKrausModel)
            out = compress.sim_to_prep(model, sigma)
    else:
        raise PovmcError(f"unknown direction {direction!r}")
    _emit({"type": "translate_result", "direction": direction,
           "result": serialize.to_dict(out)}, args)
    return EXIT_CERTIFIED


def cmd_choi(args) -> int:
    if args.direction == "kraus-to-choi":
        channel = _load_typed(args.input, KrausChannel)
        out = choi_of_channel(channel)
    elif args.direction == "choi-to-kraus":
        choi = _load_typed(args.input, ChoiMatrix)
        out = kraus_of_choi(choi)
    else:
        raise PovmcError(f"unknown direction {args.direction!r}")
    _emit({"type": "choi_result", "direction": args.direction,
           "result": serialize.to_dict(out)}, args)
    return EXIT_CERTIFIED


def cmd_cvscan(args) -> int:
    edges = cvlab.default_bin_edges(args.bins)
    sigma_choice = "maximally_mixed" if args.sigma_choice == "maximally_mixed" \
        else ("thermal", args.beta)
    seesaw_ns = tuple(range(2, args.seesaw_n_max + 1)) if args.seesaw_n_max >= 2 else ()
    res = cvlab.incompressibility_scan(
        range(args.d_min, args.d_max + 1),
        cfg=None if args.bins == 8 else cvlab.TruncationConfig(args.d_min, edges),
        sigma_choice=sigma_choice,
        seesaw_n_values=seesaw_ns,
        seesaw_restarts=args.restarts,
        seesaw_seed=args.seed,
        solver_tol=args.tol,
        cap=args.cap,
    )
    if args.format == "csv":
        _emit_text(res.to_csv(), args)
    else:
        _emit(res.to_json_dict(), args)
    if any(c.cert_status == "refused" for c in res.cells):
        return EXIT_REFUSAL
    if any(c.cert_status == "heuristic" for c in res.cells):
        return EXIT_HEURISTIC
    return EXIT_CERTIFIED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="povmc",
        description="certified compression, compatibility and steering analysis "
                    "for finite-dimensional quantum measurements")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="input JSON document (schema povmc/1)")
        sp.add_argument("--output", default=None, help="output path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--tol", type=float, default=1e-7, help="solver tolerance")
        sp.add_argument("--cap", type=int, default=compat.DEFAULT_STRATEGY_CAP,
                        help="deterministic strategy cap")

    sp = sub.add_parser("validate", help="check a domain object against its invariants")
    common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("jm", help="joint measurability certificate for a measurement set")
    common(sp)
    sp.set_defaults(fn=cmd_jm)

    sp = sub.add_parser("steer", help="local-hidden-state certificate for an assemblage")
    common(sp)
    sp.set_defaults(fn=cmd_steer)

    sp = sub.add_parser("robustness", help="depolarizing robustness of a set or assemblage")
    common(sp)
    sp.add_argument("--noise", default="depolarizing", choices=("depolarizing",))
    sp.set_defaults(fn=cmd_robustness)

    sp = sub.add_parser("compress", help="see-saw search for an n-preparation of an assemblage")
    common(sp)
    sp.add_argument("--n", type=int, required=True, help="Schmidt rank bound")
    sp.add_argument("--seed", type=int, required=True,
                    help="random seed (mandatory: the search is stochastic)")
    sp.add_argument("--restarts", type=int, default=20)
    sp.set_defaults(fn=cmd_compress)

    sp = sub.add_parser("translate", help="convert between model representations")
    common(sp)
    sp.add_argument("--direction", required=True,
                    choices=("jm-to-sim", "sim-to-jm", "lhs-to-separable",
                             "separable-to-lhs", "prep-to-sim", "sim-to-prep"))
    sp.add_argument("--sigma", default=None,
                    help="full-rank total state document (prep/sim directions)")
    sp.set_defaults(fn=cmd_translate)

    sp = sub.add_parser("choi", help="convert between Kraus and Choi channel forms")
    common(sp)
    sp.add_argument("--direction", required=True, choices=("kraus-to-choi", "choi-to-kraus"))
    sp.set_defaults(fn=cmd_choi)

    sp = sub.add_parser("cvscan", help="binned quadrature incompressibility scan")
    common(sp, needs_input=False)
    sp.add_argument("--d-min", type=int, default=2)
    sp.add_argument("--d-max", type=int, default=6)
    sp.add_argument("--bins", type=int, default=8)
    sp.add_argument("--sigma-choice", choices=("maximally_mixed", "thermal"),
                    default="maximally_mixed")
    sp.add_argument("--beta", type=float, default=1.0, help="thermal inverse temperature")
    sp.add_argument("--seesaw-n-max", type=int, default=0,
                    help="run see-saw rows for n = 2..this (0 disables)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=2)
    sp.set_defaults(fn=cmd_cvscan)

    return p


def _apply_thread_cap() -> None:
    cap = os.environ.get("POVMC_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PovmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSAL


if __name__ == "__main__":
    raise SystemExit(main())
