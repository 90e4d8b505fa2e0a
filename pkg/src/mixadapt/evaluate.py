"""Evaluation: accuracy, BIO chunk F1, McNemar's test, error reduction,
cross-validation, and learning curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import Dataset, DOMAIN_IN, DOMAIN_OUT, FeatureVector

TrainFn = Callable[[Dataset], object]  # returns a predictor with .predict(fv)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float  # fraction in [0, 1]
    correct: tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.correct)


def accuracy(gold: Sequence[int], predicted: Sequence[int]) -> float:
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted lengths differ")
    if len(gold) == 0:
        raise ValueError("empty evaluation")
    hits = sum(1 for g, p in zip(gold, predicted) if g == p)
    return hits / len(gold)


def evaluate_classifier(predictor, dataset: Dataset) -> EvalReport:
    """Fraction of instances whose predicted label matches gold.

    The predictor's alphabets may differ from the dataset's (systems that
    rebuild their alphabets from a subset of the data, for example); features
    and labels are then matched by name, and features the predictor has never
    seen are dropped."""
    if len(dataset) == 0:
        raise ValueError("empty evaluation set")
    same = (
        predictor.feature_alphabet == dataset.feature_alphabet
        and predictor.label_alphabet == dataset.label_alphabet
    )
    if same:
        correct = tuple(
            predictor.predict(ins.features) == ins.label for ins in dataset.instances
        )
    else:
        feat_map = [
            predictor.feature_alphabet.get(name)
            for name in dataset.feature_alphabet.names()
        ]
        flags = []
        for ins in dataset.instances:
            fv = FeatureVector.from_indices(
                feat_map[i] for i in ins.features if feat_map[i] is not None
            )
            predicted = predictor.label_alphabet.name(predictor.predict(fv))
            flags.append(predicted == dataset.label_alphabet.name(ins.label))
        correct = tuple(flags)
    return EvalReport(sum(correct) / len(correct), correct)


@dataclass(frozen=True)
class ChunkScore:
    precision: float
    recall: float
    f1: float


def bio_chunks(tags: Sequence[str]) -> set[tuple[str, int, int]]:
    """(type, start, end-exclusive) chunks from BIO tags. A stray I- with no
    open chunk of its type starts a new chunk (standard repair)."""
    chunks: set[tuple[str, int, int]] = set()
    open_type: str | None = None
    start = 0
    for i, tag in enumerate(tags):
        if tag == "O":
            prefix, ctype = "O", ""
        elif tag.startswith("B-") or tag.startswith("I-"):
            prefix, ctype = tag[0], tag[2:]
        elif tag in ("B", "I"):
            prefix, ctype = tag, ""
        else:
            raise ValueError(f"not a BIO tag: {tag!r}")
        if prefix == "O":
            if open_type is not None:
                chunks.add((open_type, start, i))
                open_type = None
        elif prefix == "B" or open_type != ctype:
            if open_type is not None:
                chunks.add((open_type, start, i))
            open_type = ctype
            start = i
    if open_type is not None:
        chunks.add((open_type, start, len(tags)))
    return chunks


def chunk_f1(gold: Sequence[Sequence[str]], predicted: Sequence[Sequence[str]]) -> ChunkScore:
    """Precision / recall / F1 over exact chunk matches, sequences scored
    independently so chunks never cross boundaries."""
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted corpora differ in length")
    tp = n_gold = n_pred = 0
    for g_tags, p_tags in zip(gold, predicted):
        if len(g_tags) != len(p_tags):
            raise ValueError("sequence length mismatch")
        g = bio_chunks(g_tags)
        p = bio_chunks(p_tags)
        tp += len(g & p)
        n_gold += len(g)
        n_pred += len(p)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ChunkScore(precision, recall, f1)


def mcnemar(correct_a: Sequence[bool], correct_b: Sequence[bool]) -> tuple[float, float]:
    """Continuity-corrected McNemar statistic and chi-square(1) tail p-value
    over paired correctness vectors. |b - c| <= 1 clamps the statistic to
    zero; b + c = 0 gives (0, 1)."""
    if len(correct_a) != len(correct_b):
        raise ValueError("paired vectors differ in length")
    b = sum(1 for x, y in zip(correct_a, correct_b) if x and not y)
    c = sum(1 for x, y in zip(correct_a, correct_b) if y and not x)
    if b + c == 0 or abs(b - c) <= 1:
        statistic = 0.0
    else:
        statistic = (abs(b - c) - 1.0) ** 2 / (b + c)
    p_value = math.erfc(math.sqrt(statistic / 2.0)) if statistic > 0.0 else 1.0
    return statistic, p_value


def error_reduction(baseline_pct: float, improved_pct: float) -> float:
    """Percent of the baseline's error removed: 100 (improved - baseline) /
    (100 - baseline). Negative when the improved system is worse."""
    if baseline_pct >= 100.0:
        raise ValueError("baseline has no error to reduce")
    return 100.0 * (improved_pct - baseline_pct) / (100.0 - baseline_pct)


@dataclass(frozen=True)
class CvResult:
    fold_reports: tuple[EvalReport, ...]
    mean_accuracy: float


def cross_validate(train_fn: TrainFn, dataset: Dataset, k: int, seed: int) -> CvResult:
    """Seeded k-fold over the in-domain portion; out-domain data joins every
    training split."""
    from .corpus import split_folds

    reports = []
    for train_set, heldout in split_folds(dataset, k, seed):
        predictor = train_fn(train_set)
        reports.append(evaluate_classifier(predictor, heldout))
    mean = sum(r.accuracy for r in reports) / len(reports)
    return CvResult(tuple(reports), mean)


def learning_curve(
    trainers: Mapping[str, TrainFn],
    dataset: Dataset,
    test_set: Dataset,
    sizes: Sequence[int],
    seed: int,
) -> dict[str, list[tuple[int, float]]]:
    """Accuracy on test_set as the in-domain training size grows. Subsets
    are nested: the size-n training set contains the size-m one for m < n.
    Out-domain data is always fully present."""
    in_idx = dataset.domain_indices(DOMAIN_IN)
    out_idx = dataset.domain_indices(DOMAIN_OUT)
    if any(s < 0 or s > len(in_idx) for s in sizes):
        raise ValueError("curve size outside [0, N_in]")
    perm = np.random.default_rng(seed).permutation(len(in_idx))
    results: dict[str, list[tuple[int, float]]] = {name: [] for name in trainers}
    for size in sizes:
        chosen = {in_idx[j] for j in perm[:size]}
        keep = [i for i in range(len(dataset)) if i in chosen or i in set(out_idx)]
        subset = dataset.subset(keep)
        for name, fn in trainers.items():
            predictor = fn(subset)
            results[name].append((size, evaluate_classifier(predictor, test_set).accuracy))
    return results


def format_report(accuracies: Mapping[str, float], target: str | None = None) -> str:
    """Accuracy block plus a percent-error-reduction block of the target
    system (default: best accuracy) against every other system."""
    if not accuracies:
        raise ValueError("nothing to report")
    if target is None:
        target = max(accuracies, key=lambda name: (accuracies[name], name))
    if target not in accuracies:
        raise ValueError(f"unknown target system {target!r}")
    width = max(len(name) for name in accuracies)
    lines = ["accuracy"]
    for name, pct in accuracies.items():
        lines.append(f"  {name:<{width}}  {pct:6.2f}")
    lines.append(f"% error reduction ({target} vs baseline)")
    for name, pct in accuracies.items():
        if name == target or pct >= 100.0:
            continue
        lines.append(f"  {name:<{width}}  {error_reduction(pct, accuracies[target]):6.1f}")
    return "\n".join(lines) + "\n"
