"""Synthetic corpora drawn from a known mixture model.

Each instance picks the shared component with probability pi (per domain),
draws binary features from that component's Bernoulli means, then draws a
label from the component's maxent classifier over those features. Test
instances follow the in-domain mixture. The latent component draws are kept
so recovery checks can compare against the generator's own record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .corpus import Alphabet, Dataset, DOMAIN_IN, DOMAIN_OUT, FeatureVector, Instance, ParseError
from .mega import MegaHyperparams, MegaModel


@dataclass(frozen=True)
class SynthSpec:
    n_features: int
    n_labels: int
    n_in: int
    n_out: int
    n_test: int
    pi_in: float
    pi_out: float
    psi_in: tuple[float, float] = (0.05, 0.95)  # per-feature mean range
    psi_out: tuple[float, float] = (0.05, 0.95)
    psi_general: tuple[float, float] = (0.05, 0.95)
    lambda_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_features", "n_labels", "n_in", "n_out", "n_test"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("pi_in", "pi_out"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} outside [0, 1]")
        for name in ("psi_in", "psi_out", "psi_general"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi < 1.0):
                raise ValueError(f"{name} range must satisfy 0 < low <= high < 1")
        if self.lambda_scale < 0.0:
            raise ValueError("lambda_scale must be nonnegative")


@dataclass(frozen=True)
class SyntheticCorpus:
    train: Dataset
    test: Dataset  # in-domain draws, shares alphabets with train
    truth: MegaModel
    latent_in: np.ndarray  # True where the shared component generated the row
    latent_out: np.ndarray
    latent_test: np.ndarray


def sample_truth(spec: SynthSpec, rng: np.random.Generator) -> MegaModel:
    feats = Alphabet(f"f{i}" for i in range(spec.n_features))
    labels = Alphabet(f"y{i}" for i in range(spec.n_labels))
    shape = (spec.n_labels, spec.n_features)

    def means(bounds):
        lo, hi = bounds
        return rng.uniform(lo, hi, size=spec.n_features)

    def weights():
        return rng.normal(0.0, spec.lambda_scale, size=shape)

    return MegaModel(
        feats, labels,
        weights(), weights(), weights(),
        means(spec.psi_in), means(spec.psi_out), means(spec.psi_general),
        spec.pi_in, spec.pi_out,
        MegaHyperparams(),
    )


def _draw_block(
    truth: MegaModel,
    pi: float,
    specific_means: np.ndarray,
    specific_weights: np.ndarray,
    n: int,
    domain: str,
    rng: np.random.Generator,
) -> tuple[list[Instance], np.ndarray]:
    n_features = len(truth.feature_alphabet)
    z = rng.random(n) < pi  # True: shared component
    means = np.where(z[:, None], truth.means_general[None, :], specific_means[None, :])
    X = (rng.random((n, n_features)) < means).astype(float)
    score_shared = X @ truth.weights_general.T
    score_spec = X @ specific_weights.T
    scores = np.where(z[:, None], score_shared, score_spec)
    # Gumbel-max draw from the per-row softmax.
    labels = np.argmax(scores + rng.gumbel(size=scores.shape), axis=1)
    instances = [
        Instance(FeatureVector(tuple(int(f) for f in np.flatnonzero(X[i]))), int(labels[i]), domain)
        for i in range(n)
    ]
    return instances, z


def generate_from_truth(
    truth: MegaModel, n_in: int, n_out: int, n_test: int, seed: int
) -> SyntheticCorpus:
    """Draw train (in then out) and in-domain test sets from a given model."""
    rng_in, rng_out, rng_test = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )
    ins_in, z_in = _draw_block(
        truth, truth.pi_in, truth.means_in, truth.weights_in, n_in, DOMAIN_IN, rng_in
    )
    ins_out, z_out = _draw_block(
        truth, truth.pi_out, truth.means_out, truth.weights_out, n_out, DOMAIN_OUT, rng_out
    )
    ins_test, z_test = _draw_block(
        truth, truth.pi_in, truth.means_in, truth.weights_in, n_test, DOMAIN_IN, rng_test
    )
    train = Dataset(truth.feature_alphabet, truth.label_alphabet, tuple(ins_in + ins_out))
    test = Dataset(truth.feature_alphabet, truth.label_alphabet, tuple(ins_test))
    return SyntheticCorpus(train, test, truth, z_in, z_out, z_test)


def generate_synthetic(spec: SynthSpec) -> SyntheticCorpus:
    """Sample a ground-truth model from the spec, then sample the corpora.
    Byte-identical on repeated calls with the same spec."""
    rng_truth = np.random.default_rng(np.random.SeedSequence(spec.seed).spawn(1)[0])
    truth = sample_truth(spec, rng_truth)
    return generate_from_truth(truth, spec.n_in, spec.n_out, spec.n_test, spec.seed + 1)


_REQUIRED_KEYS = ("n_features", "n_labels", "n_in", "n_out", "n_test", "pi_in", "pi_out")
_INT_KEYS = {"n_features", "n_labels", "n_in", "n_out", "n_test", "seed"}
_FLOAT_KEYS = {
    "pi_in", "pi_out", "lambda_scale",
    "psi_in_low", "psi_in_high", "psi_out_low", "psi_out_high",
    "psi_general_low", "psi_general_high",
}


def parse_synth_spec(stream: TextIO) -> SynthSpec:
    """Read `key=value` lines; `#` comments allowed; unknown keys rejected."""
    raw: dict[str, float] = {}
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ParseError("expected key=value", lineno)
        key, _, value = text.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _INT_KEYS:
            try:
                raw[key] = int(value)
            except ValueError:
                raise ParseError(f"bad integer for {key}: {value!r}", lineno) from None
        elif key in _FLOAT_KEYS:
            try:
                raw[key] = float(value)
            except ValueError:
                raise ParseError(f"bad number for {key}: {value!r}", lineno) from None
        else:
            raise ParseError(f"unknown key {key!r}", lineno)
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}")

    def bounds(prefix: str) -> tuple[float, float]:
        return (raw.pop(f"{prefix}_low", 0.05), raw.pop(f"{prefix}_high", 0.95))

    psi_in = bounds("psi_in")
    psi_out = bounds("psi_out")
    psi_general = bounds("psi_general")
    try:
        return SynthSpec(
            n_features=int(raw["n_features"]),
            n_labels=int(raw["n_labels"]),
            n_in=int(raw["n_in"]),
            n_out=int(raw["n_out"]),
            n_test=int(raw["n_test"]),
            pi_in=float(raw["pi_in"]),
            pi_out=float(raw["pi_out"]),
            psi_in=psi_in,
            psi_out=psi_out,
            psi_general=psi_general,
            lambda_scale=float(raw.get("lambda_scale", 1.0)),
            seed=int(raw.get("seed", 0)),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None
