"""Versioned text container for trained models.

One file holds a kind tag plus named alphabets, matrices, vectors, scalars,
and strings. Floats are written with shortest round-trip repr, so a
save/load cycle preserves exact values. Loading dispatches on the kind tag
and rebuilds the matching predictor object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .corpus import Alphabet, ParseError

MAGIC = "mixadapt-model"
VERSION = "v1"


@dataclass
class ModelPayload:
    kind: str
    alphabets: dict[str, Alphabet] = field(default_factory=dict)
    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    scalars: dict[str, float] = field(default_factory=dict)
    strings: dict[str, str] = field(default_factory=dict)


def _fmt(value: float) -> str:
    return repr(float(value))


def write_payload(payload: ModelPayload, stream: TextIO) -> None:
    stream.write(f"{MAGIC} {VERSION}\n")
    stream.write(f"kind {payload.kind}\n")
    for name, alph in payload.alphabets.items():
        stream.write(f"alphabet {name} {len(alph)}\n")
        for entry in alph:
            stream.write(entry + "\n")
    for name, mat in payload.matrices.items():
        rows, cols = mat.shape
        stream.write(f"matrix {name} {rows} {cols}\n")
        for r in range(rows):
            stream.write(" ".join(_fmt(v) for v in mat[r]) + "\n")
    for name, vec in payload.vectors.items():
        stream.write(f"vector {name} {vec.shape[0]}\n")
        stream.write(" ".join(_fmt(v) for v in vec) + "\n")
    for name, value in payload.scalars.items():
        stream.write(f"scalar {name} {_fmt(value)}\n")
    for name, value in payload.strings.items():
        stream.write(f"string {name} {value}\n")
    stream.write("end\n")


def read_payload(stream: TextIO) -> ModelPayload:
    lines = stream.read().splitlines()
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ParseError("unexpected end of model file", pos + 1)
        line = lines[pos]
        pos += 1
        return line

    header = take().split()
    if len(header) != 2 or header[0] != MAGIC:
        raise ParseError("not a model file", 1)
    if header[1] != VERSION:
        raise ParseError(f"unsupported model version {header[1]!r}", 1)
    kind_line = take().split()
    if len(kind_line) != 2 or kind_line[0] != "kind":
        raise ParseError("missing kind", 2)
    payload = ModelPayload(kind=kind_line[1])

    while True:
        lineno = pos + 1
        parts = take().split()
        if not parts:
            raise ParseError("blank line in model file", lineno)
        tag = parts[0]
        if tag == "end":
            return payload
        try:
            if tag == "alphabet":
                name, count = parts[1], int(parts[2])
                payload.alphabets[name] = Alphabet(take() for _ in range(count))
            elif tag == "matrix":
                name, rows, cols = parts[1], int(parts[2]), int(parts[3])
                mat = np.empty((rows, cols))
                for r in range(rows):
                    row = [float(v) for v in take().split()]
                    if len(row) != cols:
                        raise ParseError(f"matrix {name} row has {len(row)} values, expected {cols}", pos)
                    mat[r] = row
                payload.matrices[name] = mat
            elif tag == "vector":
                name, count = parts[1], int(parts[2])
                vec = np.array([float(v) for v in take().split()])
                if vec.shape != (count,):
                    raise ParseError(f"vector {name} has {vec.shape[0]} values, expected {count}", pos)
                payload.vectors[name] = vec
            elif tag == "scalar":
                payload.scalars[parts[1]] = float(parts[2])
            elif tag == "string":
                payload.strings[parts[1]] = parts[2]
            else:
                raise ParseError(f"unknown section {tag!r}", lineno)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed {tag} section: {exc}", lineno) from None


def save_model(obj, stream: TextIO) -> None:
    write_payload(_to_payload(obj), stream)


def load_model(stream: TextIO):
    return _from_payload(read_payload(stream))


def _to_payload(obj) -> ModelPayload:
    from .baselines import FeatureAugmentedPredictor, InterpolatedPredictor, MaxentPredictor
    from .chain import ChainModel
    from .mega import MegaModel

    if isinstance(obj, ChainModel):
        payload = _to_payload(obj.classifier_object())
        payload.kind = obj.kind
        payload.alphabets["tags"] = obj.tag_alphabet
        return payload
    if isinstance(obj, MegaModel):
        payload = ModelPayload(kind="megam")
        payload.alphabets["labels"] = obj.label_alphabet
        payload.alphabets["features"] = obj.feature_alphabet
        payload.matrices["weights_in"] = obj.weights_in
        payload.matrices["weights_out"] = obj.weights_out
        payload.matrices["weights_general"] = obj.weights_general
        payload.vectors["means_in"] = obj.means_in
        payload.vectors["means_out"] = obj.means_out
        payload.vectors["means_general"] = obj.means_general
        payload.scalars["pi_in"] = obj.pi_in
        payload.scalars["pi_out"] = obj.pi_out
        h = obj.hyper
        payload.scalars.update(
            sigma2=h.sigma2, beta_a=h.beta_a, beta_b=h.beta_b,
            max_cem_iterations=h.max_cem_iterations, psi_sweeps=h.psi_sweeps,
            psi_tolerance=h.psi_tolerance, parameter_tolerance=h.parameter_tolerance,
            paper_psi_prior=1.0 if h.paper_psi_prior else 0.0,
        )
        return payload
    if isinstance(obj, MaxentPredictor):
        payload = ModelPayload(kind=obj.kind)
        payload.alphabets["labels"] = obj.model.label_alphabet
        payload.alphabets["features"] = obj.model.feature_alphabet
        payload.matrices["weights"] = obj.model.weights
        return payload
    if isinstance(obj, InterpolatedPredictor):
        payload = ModelPayload(kind="lini")
        payload.alphabets["labels"] = obj.model_in.label_alphabet
        payload.alphabets["features"] = obj.model_in.feature_alphabet
        payload.matrices["weights_in"] = obj.model_in.weights
        payload.matrices["weights_out"] = obj.model_out.weights
        payload.scalars["alpha"] = obj.alpha
        return payload
    if isinstance(obj, FeatureAugmentedPredictor):
        payload = ModelPayload(kind="feats")
        payload.alphabets["labels"] = obj.model.label_alphabet
        payload.alphabets["features"] = obj.ood.feature_alphabet
        payload.alphabets["augmented_features"] = obj.model.feature_alphabet
        payload.matrices["ood_weights"] = obj.ood.weights
        payload.matrices["weights"] = obj.model.weights
        return payload
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _from_payload(payload: ModelPayload):
    from .baselines import FeatureAugmentedPredictor, InterpolatedPredictor, MaxentPredictor
    from .chain import ChainModel
    from .maxent import MaxentModel
    from .mega import MegaHyperparams, MegaModel

    kind = payload.kind
    try:
        if kind in ("memm", "mega-memm"):
            tags = payload.alphabets["tags"]
            inner_kind = "megam" if kind == "mega-memm" else "mix"
            inner = _from_payload(ModelPayload(
                inner_kind, payload.alphabets, payload.matrices,
                payload.vectors, payload.scalars, payload.strings,
            ))
            classifier = inner.model if isinstance(inner, MaxentPredictor) else inner
            return ChainModel(kind, tags, classifier)
        if kind == "megam":
            s = payload.scalars
            hyper = MegaHyperparams(
                sigma2=s.get("sigma2", 1.0),
                beta_a=s.get("beta_a", 2.0),
                beta_b=s.get("beta_b", 2.0),
                max_cem_iterations=int(s.get("max_cem_iterations", 5)),
                psi_sweeps=int(s.get("psi_sweeps", 20)),
                psi_tolerance=s.get("psi_tolerance", 1e-8),
                parameter_tolerance=s.get("parameter_tolerance", 1e-6),
                paper_psi_prior=s.get("paper_psi_prior", 0.0) != 0.0,
            )
            return MegaModel(
                payload.alphabets["features"], payload.alphabets["labels"],
                payload.matrices["weights_in"], payload.matrices["weights_out"],
                payload.matrices["weights_general"],
                payload.vectors["means_in"], payload.vectors["means_out"],
                payload.vectors["means_general"],
                s["pi_in"], s["pi_out"], hyper,
            )
        if kind in ("onlyi", "onlyo", "mix", "mixw", "prior"):
            model = MaxentModel(
                payload.matrices["weights"],
                payload.alphabets["features"], payload.alphabets["labels"],
            )
            return MaxentPredictor(kind, model)
        if kind == "lini":
            feats = payload.alphabets["features"]
            labels = payload.alphabets["labels"]
            return InterpolatedPredictor(
                payload.scalars["alpha"],
                MaxentModel(payload.matrices["weights_in"], feats, labels),
                MaxentModel(payload.matrices["weights_out"], feats, labels),
            )
        if kind == "feats":
            labels = payload.alphabets["labels"]
            return FeatureAugmentedPredictor(
                MaxentModel(payload.matrices["ood_weights"], payload.alphabets["features"], labels),
                MaxentModel(payload.matrices["weights"], payload.alphabets["augmented_features"], labels),
            )
    except KeyError as exc:
        raise ParseError(f"model file missing section {exc}") from None
    raise ParseError(f"unknown model kind {kind!r}")
