"""Sequence tagging by local classification (maximum entropy Markov model).

Each token becomes one classification instance whose features are the
token's own features plus an indicator for the previous tag (gold at
training time, hypothesis at decode time; a begin-of-sequence marker at the
first position) plus the bias. The per-token classifier is either a plain
maxent model or the adaptation mixture, in which case every token carries
its own latent component. Decoding runs Viterbi over the locally normalized
distributions in log space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import maxent, mega
from .corpus import (
    Alphabet,
    BIAS_FEATURE,
    Dataset,
    DOMAIN_IN,
    FeatureVector,
    Instance,
    SequenceDataset,
    SequenceInstance,
    Token,
)
from .maxent import MaxentModel, MaxentTrainConfig, log_softmax
from .mega import CemTrace, MegaHyperparams, MegaModel

BEGIN_MARKER = "<s>"
MODE_PLAIN = "plain"
MODE_MEGA = "mega"


def prev_tag_feature(tag: str) -> str:
    return f"prevtag={tag}"


@dataclass(frozen=True)
class ChainModel:
    kind: str  # "memm" | "mega-memm"
    tag_alphabet: Alphabet
    classifier: MaxentModel | MegaModel

    def classifier_object(self):
        if isinstance(self.classifier, MegaModel):
            return self.classifier
        from .baselines import MaxentPredictor

        return MaxentPredictor("mix", self.classifier)

    @property
    def label_alphabet(self) -> Alphabet:
        return self.classifier.label_alphabet

    @property
    def feature_alphabet(self) -> Alphabet:
        return self.classifier.feature_alphabet


def flatten_sequences(seqdata: SequenceDataset) -> Dataset:
    """Per-token instances with gold previous-tag indicators.

    The feature alphabet registers the begin marker and one previous-tag
    indicator per tag first, then token features in encounter order; the
    label alphabet holds the tags."""
    feats = Alphabet()
    labels = Alphabet()
    feats.add(prev_tag_feature(BEGIN_MARKER))
    for tag in seqdata.tag_alphabet:
        feats.add(prev_tag_feature(tag))
    instances = []
    for seq in seqdata.sequences:
        prev = BEGIN_MARKER
        for token in seq.tokens:
            names = list(token.features) + [prev_tag_feature(prev), BIAS_FEATURE]
            fv = FeatureVector.from_indices(feats.add(n) for n in names)
            instances.append(Instance(fv, labels.add(token.tag), seq.domain))
            prev = token.tag
    return Dataset(feats, labels, tuple(instances))


def train_memm(
    seqdata: SequenceDataset,
    config: MaxentTrainConfig | MegaHyperparams | None = None,
    mode: str = MODE_PLAIN,
) -> tuple[ChainModel, CemTrace | None]:
    """Fit the per-token classifier on the flattened corpus. Plain mode is a
    single maxent model over all tokens; mega mode runs conditional EM with
    one latent component per token."""
    if len(seqdata) == 0:
        raise ValueError("no sequences")
    flat = flatten_sequences(seqdata)
    if mode == MODE_PLAIN:
        cfg = config if isinstance(config, MaxentTrainConfig) else MaxentTrainConfig()
        model = maxent.fit_model(flat, cfg)
        return ChainModel("memm", seqdata.tag_alphabet.copy(), model), None
    if mode == MODE_MEGA:
        hyper = config if isinstance(config, MegaHyperparams) else MegaHyperparams()
        model, trace = mega.train_cem(flat, hyper)
        return ChainModel("mega-memm", seqdata.tag_alphabet.copy(), model), trace
    raise ValueError(f"unknown mode {mode!r}")


def _base_indices(chain: ChainModel, token_features: tuple[str, ...]) -> list[int]:
    feats = chain.feature_alphabet
    idx = [feats.get(n) for n in (*token_features, BIAS_FEATURE)]
    return sorted({i for i in idx if i is not None})


def _emission_matrix(chain: ChainModel, token_features: tuple[str, ...], prev_feature_idx: np.ndarray, domain: str) -> np.ndarray:
    """Log p(tag | token, prev) for every previous context (rows) and tag
    (columns). Rows follow prev_feature_idx; unknown token features are
    dropped."""
    base = _base_indices(chain, token_features)
    clf = chain.classifier
    if isinstance(clf, MegaModel):
        w_general = clf.weights_general
        w_spec = clf.weights_for(domain)
        base_general = w_general[:, base].sum(axis=1) if base else np.zeros(w_general.shape[0])
        base_spec = w_spec[:, base].sum(axis=1) if base else np.zeros(w_spec.shape[0])
        scores_general = base_general[None, :] + w_general[:, prev_feature_idx].T
        scores_spec = base_spec[None, :] + w_spec[:, prev_feature_idx].T
        p_general = np.exp(log_softmax(scores_general))
        p_spec = np.exp(log_softmax(scores_spec))

        pi = clf.pi_for(domain)
        means_general = clf.means_general
        means_spec = clf.means_for(domain)

        def base_product(means):
            log_off = np.log1p(-means)
            total = float(log_off.sum())
            for f in base:
                total += float(np.log(means[f]) - log_off[f])
            return total, np.log(means[prev_feature_idx]) - log_off[prev_feature_idx]

        q_general, adj_general = base_product(means_general)
        q_spec, adj_spec = base_product(means_spec)
        lq_general = mega._safe_log(pi) + q_general + adj_general
        lq_spec = mega._safe_log(1.0 - pi) + q_spec + adj_spec
        w = np.exp(lq_general - np.logaddexp(lq_general, lq_spec))  # (P,)
        return np.log(w[:, None] * p_general + (1.0 - w[:, None]) * p_spec)

    weights = clf.weights
    base_scores = weights[:, base].sum(axis=1) if base else np.zeros(weights.shape[0])
    scores = base_scores[None, :] + weights[:, prev_feature_idx].T  # (P, Y)
    return log_softmax(scores)


def viterbi_decode(chain: ChainModel, sequence: SequenceInstance, domain: str = DOMAIN_IN) -> list[str]:
    """Most probable tag sequence in log space; ties break toward the lowest
    tag index at every argmax."""
    labels = chain.label_alphabet
    feats = chain.feature_alphabet
    n_tags = len(labels)
    begin_idx = feats.index(prev_tag_feature(BEGIN_MARKER))
    prev_idx = np.array(
        [begin_idx] + [feats.index(prev_tag_feature(labels.name(j))) for j in range(n_tags)],
        dtype=np.int64,
    )  # row 0: begin context, row 1+j: previous tag j

    tokens = sequence.tokens
    delta = None
    backptr = []
    for t, token in enumerate(tokens):
        emission = _emission_matrix(chain, token.features, prev_idx, domain)
        if t == 0:
            delta = emission[0]
            continue
        candidate = delta[:, None] + emission[1:]
        backptr.append(np.argmax(candidate, axis=0))
        delta = np.max(candidate, axis=0)
    path = [int(np.argmax(delta))]
    for bp in reversed(backptr):
        path.append(int(bp[path[-1]]))
    path.reverse()
    return [labels.name(j) for j in path]


def decode_dataset(chain: ChainModel, seqdata: SequenceDataset, domain: str | None = None) -> SequenceDataset:
    """Re-tag every sequence with its Viterbi path; features are preserved."""
    out = []
    for seq in seqdata.sequences:
        tags = viterbi_decode(chain, seq, domain or DOMAIN_IN)
        tokens = tuple(Token(tok.features, tag) for tok, tag in zip(seq.tokens, tags))
        out.append(SequenceInstance(tokens, seq.domain))
    return SequenceDataset(tuple(out), Alphabet(chain.label_alphabet.names()))
