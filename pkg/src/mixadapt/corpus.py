"""Sparse binary classification corpora.

Alphabets, instances, the tab-separated file formats, fold splitting, and
information-gain feature scoring. Instances carry a domain tag: "in" for the
target domain, "out" for the background domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

DOMAIN_IN = "in"
DOMAIN_OUT = "out"
DOMAINS = (DOMAIN_IN, DOMAIN_OUT)

# Always-on indicator appended to every parsed instance so the linear models
# have an intercept. Synthetic in-memory corpora do not add it.
BIAS_FEATURE = "__bias__"

COMMENT_CHAR = "#"


class ParseError(ValueError):
    """Malformed input; carries a 1-based line number when known."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class Alphabet:
    """Bidirectional string/index map. Indices are dense and assigned in
    first-add order, which makes construction deterministic."""

    __slots__ = ("_names", "_index")

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        """Return the index for name, assigning the next one if unseen."""
        idx = self._index.get(name)
        if idx is None:
            idx = len(self._names)
            self._index[name] = idx
            self._names.append(name)
        return idx

    def index(self, name: str) -> int:
        return self._index[name]

    def get(self, name: str) -> int | None:
        return self._index.get(name)

    def name(self, index: int) -> str:
        return self._names[index]

    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self._names == other._names

    def __repr__(self) -> str:
        return f"Alphabet({len(self)} entries)"

    def copy(self) -> "Alphabet":
        return Alphabet(self._names)


@dataclass(frozen=True)
class FeatureVector:
    """Active feature indices of one instance, strictly increasing."""

    indices: tuple[int, ...] = ()

    @staticmethod
    def from_indices(indices: Iterable[int]) -> "FeatureVector":
        return FeatureVector(tuple(sorted(set(int(i) for i in indices))))

    def __post_init__(self):
        ix = self.indices
        if any(ix[i] >= ix[i + 1] for i in range(len(ix) - 1)):
            raise ValueError("feature indices must be strictly increasing")
        if ix and ix[0] < 0:
            raise ValueError("feature indices must be nonnegative")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)


@dataclass(frozen=True)
class Instance:
    features: FeatureVector
    label: int
    domain: str

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")


@dataclass(frozen=True)
class Dataset:
    """Immutable bundle of instances with their shared alphabets."""

    feature_alphabet: Alphabet
    label_alphabet: Alphabet
    instances: tuple[Instance, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_alphabet)

    @property
    def n_labels(self) -> int:
        return len(self.label_alphabet)

    def __len__(self) -> int:
        return len(self.instances)

    def domain_indices(self, domain: str) -> tuple[int, ...]:
        return tuple(i for i, ins in enumerate(self.instances) if ins.domain == domain)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """New dataset over the same alphabets with the selected instances."""
        picked = tuple(self.instances[i] for i in indices)
        return Dataset(self.feature_alphabet, self.label_alphabet, picked)

    def only_domain(self, domain: str) -> "Dataset":
        return self.subset(self.domain_indices(domain))

    def rebuilt(self) -> "Dataset":
        """Re-register alphabets from this dataset's own instances, in
        first-occurrence order. Used when a system must be oblivious to data
        it never trains on."""
        feats = Alphabet()
        labels = Alphabet()
        out = []
        for ins in self.instances:
            names = [self.feature_alphabet.name(i) for i in ins.features]
            fv = FeatureVector.from_indices(feats.add(n) for n in names)
            lab = labels.add(self.label_alphabet.name(ins.label))
            out.append(Instance(fv, lab, ins.domain))
        return Dataset(feats, labels, tuple(out))


def design_matrix(dataset: Dataset, instances: Sequence[Instance] | None = None) -> np.ndarray:
    """Dense 0/1 matrix, one row per instance."""
    rows = dataset.instances if instances is None else instances
    X = np.zeros((len(rows), dataset.n_features))
    for i, ins in enumerate(rows):
        X[i, list(ins.features)] = 1.0
    return X


def label_vector(dataset: Dataset, instances: Sequence[Instance] | None = None) -> np.ndarray:
    rows = dataset.instances if instances is None else instances
    return np.array([ins.label for ins in rows], dtype=np.int64)


def _data_lines(stream: TextIO) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            yield lineno, ""
            continue
        if line.lstrip().startswith(COMMENT_CHAR):
            continue
        yield lineno, line


def parse_classification(
    stream: TextIO,
    feature_alphabet: Alphabet | None = None,
    label_alphabet: Alphabet | None = None,
    add_bias: bool = True,
) -> Dataset:
    """Parse `<domain>\\t<label>\\t<feat> <feat> ...` lines.

    Without alphabets, both are grown in first-occurrence order. With
    alphabets (prediction time) they are left untouched: unseen features are
    dropped, an unseen label is an error.
    """
    if (feature_alphabet is None) != (label_alphabet is None):
        raise ValueError("pass both alphabets or neither")
    frozen = feature_alphabet is not None
    feats = feature_alphabet if frozen else Alphabet()
    labels = label_alphabet if frozen else Alphabet()
    instances = []
    for lineno, line in _data_lines(stream):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) < 2 or len(fields) > 3:
            raise ParseError(
                f"expected 2 or 3 tab-separated fields, got {len(fields)}", lineno
            )
        domain = fields[0]
        if domain not in DOMAINS:
            raise ParseError(f"unknown domain {domain!r}", lineno)
        label_name = fields[1]
        if not label_name:
            raise ParseError("empty label", lineno)
        names = fields[2].split() if len(fields) == 3 else []
        if add_bias:
            names.append(BIAS_FEATURE)
        if frozen:
            lab = labels.get(label_name)
            if lab is None:
                raise ParseError(f"unknown label {label_name!r}", lineno)
            idx = [feats.get(n) for n in names]
            fv = FeatureVector.from_indices(i for i in idx if i is not None)
        else:
            lab = labels.add(label_name)
            fv = FeatureVector.from_indices(feats.add(n) for n in names)
        instances.append(Instance(fv, lab, domain))
    return Dataset(feats, labels, tuple(instances))


def serialize_classification(dataset: Dataset, stream: TextIO) -> None:
    for ins in dataset.instances:
        names = " ".join(dataset.feature_alphabet.name(i) for i in ins.features)
        label = dataset.label_alphabet.name(ins.label)
        stream.write(f"{ins.domain}\t{label}\t{names}\n")


@dataclass(frozen=True)
class Token:
    """One sequence position: raw feature names plus a tag name."""

    features: tuple[str, ...]
    tag: str


@dataclass(frozen=True)
class SequenceInstance:
    tokens: tuple[Token, ...]
    domain: str

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if not self.tokens:
            raise ValueError("empty sequence")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class SequenceDataset:
    sequences: tuple[SequenceInstance, ...]
    tag_alphabet: Alphabet

    def __len__(self) -> int:
        return len(self.sequences)


def parse_sequences(stream: TextIO) -> SequenceDataset:
    """Parse blank-line separated blocks. Each block opens with a header line
    `@domain in` or `@domain out` followed by `<tag>\\t<feat> <feat> ...`
    token lines."""
    tags = Alphabet()
    sequences = []
    domain: str | None = None
    tokens: list[Token] = []

    def close(lineno: int):
        nonlocal domain, tokens
        if domain is None and not tokens:
            return
        if domain is None:
            raise ParseError("token lines before @domain header", lineno)
        if not tokens:
            raise ParseError("block has a header but no tokens", lineno)
        sequences.append(SequenceInstance(tuple(tokens), domain))
        domain, tokens = None, []

    lineno = 0
    for lineno, line in _data_lines(stream):
        if not line:
            close(lineno)
            continue
        if line.startswith("@domain"):
            if domain is not None or tokens:
                raise ParseError("block header inside an open block", lineno)
            parts = line.split()
            if len(parts) != 2 or parts[1] not in DOMAINS:
                raise ParseError(f"bad header {line!r}", lineno)
            domain = parts[1]
            continue
        if domain is None:
            raise ParseError("token line before @domain header", lineno)
        fields = line.split("\t")
        if len(fields) < 1 or len(fields) > 2 or not fields[0]:
            raise ParseError("expected `<tag>\\t<features>`", lineno)
        tag = fields[0]
        tags.add(tag)
        names = tuple(fields[1].split()) if len(fields) == 2 else ()
        tokens.append(Token(names, tag))
    close(lineno + 1)
    return SequenceDataset(tuple(sequences), tags)


def serialize_sequences(seqdata: SequenceDataset, stream: TextIO) -> None:
    for i, seq in enumerate(seqdata.sequences):
        if i:
            stream.write("\n")
        stream.write(f"@domain {seq.domain}\n")
        for tok in seq.tokens:
            stream.write(f"{tok.tag}\t{' '.join(tok.features)}\n")


def split_folds(dataset: Dataset, k: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    """Seeded k-fold split of the in-domain portion; out-domain instances ride
    along in every training split. Returns (train, heldout) pairs; heldout
    sizes differ by at most one and partition the in-domain instances."""
    in_idx = dataset.domain_indices(DOMAIN_IN)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > len(in_idx):
        raise ValueError(f"k={k} exceeds in-domain size {len(in_idx)}")
    perm = np.random.default_rng(seed).permutation(len(in_idx))
    folds = []
    for chunk in np.array_split(perm, k):
        held = {in_idx[j] for j in chunk}
        test = dataset.subset(sorted(held))
        train = dataset.subset([i for i in range(len(dataset)) if i not in held])
        folds.append((train, test))
    return folds


def dev_split(dataset: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Hold out round(fraction * N_in) in-domain instances for tuning.
    Returns (rest, dev); out-domain instances stay in rest."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    in_idx = dataset.domain_indices(DOMAIN_IN)
    n_dev = int(round(fraction * len(in_idx)))
    perm = np.random.default_rng(seed).permutation(len(in_idx))
    held = {in_idx[j] for j in perm[:n_dev]}
    dev = dataset.subset(sorted(held))
    rest = dataset.subset([i for i in range(len(dataset)) if i not in held])
    return rest, dev


def information_gain_scores(dataset: Dataset) -> np.ndarray:
    """Mutual information (nats) between each feature's presence and the
    domain indicator."""
    n = len(dataset)
    if n == 0:
        raise ValueError("empty dataset")
    n_in = len(dataset.domain_indices(DOMAIN_IN))
    n_out = n - n_in
    if n_in == 0 or n_out == 0:
        raise ValueError("information gain needs both domains")
    count = np.zeros((2, dataset.n_features))  # rows: domain in, domain out
    for ins in dataset.instances:
        row = 0 if ins.domain == DOMAIN_IN else 1
        count[row, list(ins.features)] += 1.0
    scores = np.zeros(dataset.n_features)
    p_dom = np.array([n_in / n, n_out / n])
    for f in range(dataset.n_features):
        mi = 0.0
        for value in (1, 0):
            joint = count[:, f] if value else np.array([n_in, n_out]) - count[:, f]
            p_v = joint.sum() / n
            if p_v == 0.0:
                continue
            for d in range(2):
                p_joint = joint[d] / n
                if p_joint > 0.0:
                    mi += p_joint * math.log(p_joint / (p_v * p_dom[d]))
        scores[f] = mi
    return scores


def information_gain_select(dataset: Dataset, top_k: int) -> list[int]:
    """Indices of the top_k features by domain information gain, best first;
    ties broken toward the lower index. top_k beyond F returns all."""
    if top_k < 0:
        raise ValueError("top_k must be nonnegative")
    scores = information_gain_scores(dataset)
    order = np.lexsort((np.arange(len(scores)), -scores))
    return [int(i) for i in order[: min(top_k, len(scores))]]
