"""Registry mapping system names to trainers.

Classification systems consume a mixed-domain Dataset and return a
predictor exposing predict(fv) / distribution(fv) plus its alphabets.
Sequence systems consume a SequenceDataset via chain.train_memm.
"""

from __future__ import annotations

from typing import Callable

from . import baselines, mega
from .baselines import BaselineConfig, BaselineKind
from .corpus import Dataset
from .mega import MegaHyperparams

MEGA_SYSTEM = "megam"
CLASSIFICATION_SYSTEMS = (
    MEGA_SYSTEM, "onlyi", "onlyo", "lini", "mix", "mixw", "feats", "prior",
)
SEQUENCE_SYSTEMS = ("memm", "mega-memm")
ALL_SYSTEMS = CLASSIFICATION_SYSTEMS + SEQUENCE_SYSTEMS


def train_classifier(
    system: str,
    dataset: Dataset,
    mega_hyper: MegaHyperparams | None = None,
    baseline_config: BaselineConfig | None = None,
):
    if system == MEGA_SYSTEM:
        model, _ = mega.train_cem(dataset, mega_hyper)
        return model
    if system in CLASSIFICATION_SYSTEMS:
        return baselines.train_baseline(BaselineKind(system), dataset, baseline_config)
    raise ValueError(f"unknown classification system {system!r}")


def make_trainer(
    system: str,
    mega_hyper: MegaHyperparams | None = None,
    baseline_config: BaselineConfig | None = None,
) -> Callable[[Dataset], object]:
    if system not in CLASSIFICATION_SYSTEMS:
        raise ValueError(f"unknown classification system {system!r}")

    def trainer(dataset: Dataset):
        return train_classifier(system, dataset, mega_hyper, baseline_config)

    return trainer
