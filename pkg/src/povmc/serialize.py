"""JSON serialization for every domain type (schema ``povmc/1``).

Complex scalars are two-element arrays ``[re, im]``; matrices are nested
row-major arrays of those; vectors are flat arrays of them.  Every document
carries ``schema`` and ``type`` fields and round-trips losslessly through
:func:`to_dict` / :func:`from_dict`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import compat, compress
from .errors import ValidationError
from .linalg import BipartiteShape
from .objects import (Assemblage, ChoiMatrix, DensityState, Instrument,
                      KrausChannel, MeasurementSet, PointwiseKrausModel, Povm)

SCHEMA = "povmc/1"


def encode_matrix(m: np.ndarray) -> list:
    a = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(data) -> np.ndarray:
    return np.array([[complex(z[0], z[1]) for z in row] for row in data], dtype=complex)


def encode_vector(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def decode_vector(data) -> np.ndarray:
    return np.array([complex(z[0], z[1]) for z in data], dtype=complex)


def _povm_payload(p: Povm) -> list:
    return [encode_matrix(e) for e in p.effects]


def _povm_from(payload) -> Povm:
    return Povm([decode_matrix(e) for e in payload])


def to_dict(obj) -> dict:
    """Typed JSON document for any domain object."""
    if isinstance(obj, DensityState):
        body = {"matrix": encode_matrix(obj.matrix)}
        kind = "density_state"
    elif isinstance(obj, Povm):
        body = {"effects": _povm_payload(obj)}
        kind = "povm"
    elif isinstance(obj, MeasurementSet):
        body = {"povms": [_povm_payload(p) for p in obj.povms]}
        kind = "measurement_set"
    elif isinstance(obj, Assemblage):
        body = {
            "members": [[encode_matrix(m) for m in row] for row in obj.members],
            "total": encode_matrix(obj.total.matrix),
        }
        kind = "assemblage"
    elif isinstance(obj, KrausChannel):
        body = {"kraus_ops": [encode_matrix(k) for k in obj.kraus_ops]}
        kind = "kraus_channel"
    elif isinstance(obj, ChoiMatrix):
        body = {"matrix": encode_matrix(obj.matrix),
                "dim_out": obj.shape.dim_a, "dim_in": obj.shape.dim_b}
        kind = "choi_matrix"
    elif isinstance(obj, PointwiseKrausModel):
        body = {
            "weights": [float(w) for w in obj.weights],
            "kraus_ops": [encode_matrix(k) for k in obj.kraus_ops],
            "local_measurements": [[_povm_payload(p) for p in row]
                                   for row in obj.local_measurements],
            "rank_bound": obj.rank_bound,
            "transpose_bases": [None if b is None else encode_matrix(b)
                                for b in obj.transpose_bases],
        }
        kind = "pointwise_kraus_model"
    elif isinstance(obj, Instrument):
        body = {"branches": [[encode_matrix(k) for k in br] for br in obj.branches],
                "output_dim": obj.output_dim}
        kind = "instrument"
    elif isinstance(obj, compat.ParentModel):
        body = {
            "parent": _povm_payload(obj.parent),
            "response": [[[float(v) for v in row] for row in r] for r in obj.response],
            "strategies": None if obj.strategies is None else [list(s) for s in obj.strategies],
        }
        kind = "parent_model"
    elif isinstance(obj, compat.LhsModel):
        body = {
            "hidden_states": [encode_matrix(t) for t in obj.hidden_states],
            "response": [[[float(v) for v in row] for row in r] for r in obj.response],
            "strategies": None if obj.strategies is None else [list(s) for s in obj.strategies],
        }
        kind = "lhs_model"
    elif isinstance(obj, compat.SeparablePreparation):
        body = {
            "weights": [float(w) for w in obj.weights],
            "a_vectors": [encode_vector(v) for v in obj.a_vectors],
            "b_vectors": [encode_vector(v) for v in obj.b_vectors],
            "measurements": [_povm_payload(p) for p in obj.measurements.povms],
        }
        kind = "separable_preparation"
    elif isinstance(obj, compress.PreparationModel):
        body = {
            "weights": [float(w) for w in obj.weights],
            "states": [encode_vector(s) for s in obj.states],
            "measurements": [[_povm_payload(p) for p in row] for row in obj.measurements],
            "dim_a": obj.shape.dim_a,
            "dim_b": obj.shape.dim_b,
            "rank_bound": obj.rank_bound,
        }
        kind = "preparation_model"
    else:
        raise TypeError(f"cannot serialize objects of type {type(obj).__name__}")
    return {"schema": SCHEMA, "type": kind, **body}


def from_dict(doc: dict):
    """Rebuild a domain object from its JSON document (validating on the way in)."""
    if not isinstance(doc, dict):
        raise ValidationError("document is not a JSON object")
    if doc.get("schema") != SCHEMA:
        raise ValidationError(
            f"unsupported schema {doc.get('schema')!r} at /schema (expected {SCHEMA!r})")
    kind = doc.get("type")
    try:
        if kind == "density_state":
            return DensityState(decode_matrix(doc["matrix"]))
        if kind == "povm":
            return _povm_from(doc["effects"])
        if kind == "measurement_set":
            return MeasurementSet([_povm_from(p) for p in doc["povms"]])
        if kind == "assemblage":
            return Assemblage([[decode_matrix(m) for m in row] for row in doc["members"]],
                              DensityState(decode_matrix(doc["total"])))
        if kind == "kraus_channel":
            return KrausChannel([decode_matrix(k) for k in doc["kraus_ops"]])
        if kind == "choi_matrix":
            return ChoiMatrix(decode_matrix(doc["matrix"]),
                              BipartiteShape(int(doc["dim_out"]), int(doc["dim_in"])))
        if kind == "pointwise_kraus_model":
            bases = doc.get("transpose_bases")
            return PointwiseKrausModel(
                np.array(doc["weights"], dtype=float),
                [decode_matrix(k) for k in doc["kraus_ops"]],
                [[_povm_from(p) for p in row] for row in doc["local_measurements"]],
                rank_bound=int(doc["rank_bound"]),
                transpose_bases=None if bases is None else
                    [None if b is None else decode_matrix(b) for b in bases])
        if kind == "instrument":
            return Instrument([[decode_matrix(k) for k in br] for br in doc["branches"]],
                              output_dim=int(doc["output_dim"]))
        if kind == "parent_model":
            strategies = doc.get("strategies")
            return compat.ParentModel(
                parent=_povm_from(doc["parent"]),
                response=tuple(np.array(r, dtype=float) for r in doc["response"]),
                strategies=None if strategies is None else tuple(tuple(s) for s in strategies))
        if kind == "lhs_model":
            strategies = doc.get("strategies")
            return compat.LhsModel(
                hidden_states=tuple(decode_matrix(t) for t in doc["hidden_states"]),
                response=tuple(np.array(r, dtype=float) for r in doc["response"]),
                strategies=None if strategies is None else tuple(tuple(s) for s in strategies))
        if kind == "separable_preparation":
            return compat.SeparablePreparation(
                weights=tuple(float(w) for w in doc["weights"]),
                a_vectors=tuple(decode_vector(v) for v in doc["a_vectors"]),
                b_vectors=tuple(decode_vector(v) for v in doc["b_vectors"]),
                measurements=MeasurementSet([_povm_from(p) for p in doc["measurements"]]))
        if kind == "preparation_model":
            return compress.PreparationModel(
                np.array(doc["weights"], dtype=float),
                [decode_vector(s) for s in doc["states"]],
                [[_povm_from(p) for p in row] for row in doc["measurements"]],
                shape=BipartiteShape(int(doc["dim_a"]), int(doc["dim_b"])),
                rank_bound=int(doc["rank_bound"]))
    except KeyError as exc:
        raise ValidationError(f"document of type {kind!r} is missing field /{exc.args[0]}") from exc
    raise ValidationError(f"unknown document type {kind!r} at /type")


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(to_dict(obj), indent=indent, sort_keys=True)


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return from_dict(doc)


def load(path):
    return loads(Path(path).read_text())
