"""Reference adaptation systems built from plain maxent models.

onlyi   in-domain data only
onlyo   out-domain data only
mix     both domains pooled, unit weights
mixw    pooled, out-domain instances downweighted by N_in / N_out
lini    per-instance interpolation alpha * p_in + (1-alpha) * p_out, alpha
        tuned on an in-domain development split (ties to the larger alpha),
        then the in-domain model is refit on all in-domain data
feats   out-domain model's prediction appended as an extra feature, then a
        maxent model trained on the augmented in-domain data
prior   out-domain model's weights used as the Gaussian prior mean for
        in-domain training
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import maxent
from .corpus import Alphabet, Dataset, DOMAIN_IN, DOMAIN_OUT, FeatureVector, Instance
from .maxent import MaxentModel, MaxentTrainConfig
from .optim import LbfgsConfig
from . import corpus


class BaselineKind(str, Enum):
    ONLY_I = "onlyi"
    ONLY_O = "onlyo"
    LIN_I = "lini"
    MIX = "mix"
    MIX_W = "mixw"
    FEATS = "feats"
    PRIOR = "prior"


@dataclass
class BaselineConfig:
    sigma2: float = 1.0
    optimizer: LbfgsConfig = field(default_factory=LbfgsConfig)
    dev_fraction: float = 0.2
    dev_seed: int = 13
    # 0.00, 0.05, ..., 1.00
    alpha_grid: tuple[float, ...] = tuple(i / 20.0 for i in range(21))
    # Optional dev-tuned prior variance; None keeps sigma2 fixed.
    sigma2_grid: tuple[float, ...] | None = None

    def maxent_config(self, weights=None, prior_mean=None, sigma2=None) -> MaxentTrainConfig:
        return MaxentTrainConfig(
            sigma2=self.sigma2 if sigma2 is None else sigma2,
            weights=weights,
            prior_mean=prior_mean,
            optimizer=self.optimizer,
        )


@dataclass(frozen=True)
class MaxentPredictor:
    kind: str
    model: MaxentModel

    @property
    def feature_alphabet(self) -> Alphabet:
        return self.model.feature_alphabet

    @property
    def label_alphabet(self) -> Alphabet:
        return self.model.label_alphabet

    def distribution(self, fv: FeatureVector) -> np.ndarray:
        return self.model.distribution(fv)

    def predict(self, fv: FeatureVector) -> int:
        return self.model.predict(fv)


@dataclass(frozen=True)
class InterpolatedPredictor:
    alpha: float
    model_in: MaxentModel
    model_out: MaxentModel
    kind: str = "lini"

    @property
    def feature_alphabet(self) -> Alphabet:
        return self.model_in.feature_alphabet

    @property
    def label_alphabet(self) -> Alphabet:
        return self.model_in.label_alphabet

    def distribution(self, fv: FeatureVector) -> np.ndarray:
        return self.alpha * self.model_in.distribution(fv) + (1.0 - self.alpha) * self.model_out.distribution(fv)

    def predict(self, fv: FeatureVector) -> int:
        return int(np.argmax(self.distribution(fv)))


def ood_feature(label_name: str) -> str:
    return f"oodpred={label_name}"


@dataclass(frozen=True)
class FeatureAugmentedPredictor:
    ood: MaxentModel  # over the base feature alphabet
    model: MaxentModel  # over the augmented alphabet
    kind: str = "feats"

    @property
    def feature_alphabet(self) -> Alphabet:
        return self.ood.feature_alphabet

    @property
    def label_alphabet(self) -> Alphabet:
        return self.model.label_alphabet

    def augment(self, fv: FeatureVector) -> FeatureVector:
        pred = self.ood.predict(fv)
        name = ood_feature(self.ood.label_alphabet.name(pred))
        extra = self.model.feature_alphabet.index(name)
        return FeatureVector.from_indices((*fv.indices, extra))

    def distribution(self, fv: FeatureVector) -> np.ndarray:
        return self.model.distribution(self.augment(fv))

    def predict(self, fv: FeatureVector) -> int:
        return int(np.argmax(self.distribution(fv)))


def _require(dataset: Dataset, domain: str, kind: BaselineKind) -> None:
    if not dataset.domain_indices(domain):
        raise ValueError(f"{kind.value} needs {domain}-domain training data")


def _fit(dataset: Dataset, config: BaselineConfig, weights=None, prior_mean=None, sigma2=None, start=None) -> MaxentModel:
    return maxent.fit_model(dataset, config.maxent_config(weights, prior_mean, sigma2), start)


def train_baseline(kind: BaselineKind, dataset: Dataset, config: BaselineConfig | None = None):
    """Train one reference system on a mixed-domain dataset.

    onlyi / onlyo rebuild their alphabets from their own domain's instances,
    so the result is identical whether the other domain's lines exist. The
    combined systems share the dataset's union alphabets.
    """
    kind = BaselineKind(kind)
    config = config or BaselineConfig()

    if kind is BaselineKind.ONLY_I:
        _require(dataset, DOMAIN_IN, kind)
        own = dataset.only_domain(DOMAIN_IN).rebuilt()
        return MaxentPredictor(kind.value, _fit(own, config))
    if kind is BaselineKind.ONLY_O:
        _require(dataset, DOMAIN_OUT, kind)
        own = dataset.only_domain(DOMAIN_OUT).rebuilt()
        return MaxentPredictor(kind.value, _fit(own, config))
    if kind is BaselineKind.MIX:
        if len(dataset) == 0:
            raise ValueError("mix needs training data")
        return MaxentPredictor(kind.value, _fit(dataset, config))
    if kind is BaselineKind.MIX_W:
        _require(dataset, DOMAIN_IN, kind)
        _require(dataset, DOMAIN_OUT, kind)
        n_in = len(dataset.domain_indices(DOMAIN_IN))
        n_out = len(dataset.domain_indices(DOMAIN_OUT))
        w = np.array([1.0 if ins.domain == DOMAIN_IN else n_in / n_out for ins in dataset.instances])
        return MaxentPredictor(kind.value, _fit(dataset, config, weights=w))
    if kind is BaselineKind.LIN_I:
        return _train_lini(dataset, config)
    if kind is BaselineKind.FEATS:
        return _train_feats(dataset, config)
    if kind is BaselineKind.PRIOR:
        return _train_prior(dataset, config)
    raise ValueError(f"unknown baseline {kind!r}")


def _domain_weights(dataset: Dataset, domain: str) -> np.ndarray:
    """Unit weight on one domain's instances, zero elsewhere; keeps the
    union alphabet so component models stay shape-compatible."""
    return np.array([1.0 if ins.domain == domain else 0.0 for ins in dataset.instances])


def _train_lini(dataset: Dataset, config: BaselineConfig) -> InterpolatedPredictor:
    _require(dataset, DOMAIN_IN, BaselineKind.LIN_I)
    _require(dataset, DOMAIN_OUT, BaselineKind.LIN_I)
    model_out = _fit(dataset, config, weights=_domain_weights(dataset, DOMAIN_OUT))
    rest, dev = corpus.dev_split(dataset, config.dev_fraction, config.dev_seed)
    alpha = config.alpha_grid[-1]
    if len(dev) > 0:
        stage_one = _fit(rest, config, weights=_domain_weights(rest, DOMAIN_IN))
        best = -1.0
        for a in config.alpha_grid:  # ascending, >= hands ties to the larger alpha
            scout = InterpolatedPredictor(a, stage_one, model_out)
            hits = sum(1 for ins in dev.instances if scout.predict(ins.features) == ins.label)
            if hits >= best:
                best = hits
                alpha = a
    model_in = _fit(dataset, config, weights=_domain_weights(dataset, DOMAIN_IN))
    return InterpolatedPredictor(alpha, model_in, model_out)


def _train_feats(dataset: Dataset, config: BaselineConfig) -> FeatureAugmentedPredictor:
    _require(dataset, DOMAIN_IN, BaselineKind.FEATS)
    _require(dataset, DOMAIN_OUT, BaselineKind.FEATS)
    ood = _fit(dataset, config, weights=_domain_weights(dataset, DOMAIN_OUT))
    augmented = dataset.feature_alphabet.copy()
    for name in dataset.label_alphabet:
        augmented.add(ood_feature(name))
    in_rows = []
    for ins in dataset.only_domain(DOMAIN_IN).instances:
        pred = ood.predict(ins.features)
        extra = augmented.index(ood_feature(dataset.label_alphabet.name(pred)))
        fv = FeatureVector.from_indices((*ins.features.indices, extra))
        in_rows.append(Instance(fv, ins.label, ins.domain))
    aug_data = Dataset(augmented, dataset.label_alphabet, tuple(in_rows))
    model = _fit(aug_data, config)
    return FeatureAugmentedPredictor(MaxentModel(ood.weights, dataset.feature_alphabet, dataset.label_alphabet), model)


def _train_prior(dataset: Dataset, config: BaselineConfig) -> MaxentPredictor:
    _require(dataset, DOMAIN_IN, BaselineKind.PRIOR)
    _require(dataset, DOMAIN_OUT, BaselineKind.PRIOR)
    ood = _fit(dataset, config, weights=_domain_weights(dataset, DOMAIN_OUT))
    in_weights = _domain_weights(dataset, DOMAIN_IN)

    def fit_at(sigma2: float, data: Dataset, weights: np.ndarray) -> MaxentModel:
        return _fit(data, config, weights=weights, prior_mean=ood.weights, sigma2=sigma2, start=ood.weights)

    sigma2 = config.sigma2
    if config.sigma2_grid:
        rest, dev = corpus.dev_split(dataset, config.dev_fraction, config.dev_seed)
        if len(dev) > 0:
            best = -1.0
            for s2 in config.sigma2_grid:  # ties to the earlier grid entry
                scout = fit_at(s2, rest, _domain_weights(rest, DOMAIN_IN))
                hits = sum(1 for ins in dev.instances if scout.predict(ins.features) == ins.label)
                if hits > best:
                    best = hits
                    sigma2 = s2
    return MaxentPredictor(BaselineKind.PRIOR.value, fit_at(sigma2, dataset, in_weights))
