"""Mixture of maximum entropy classifiers for domain adaptation.

Each domain (in, out) mixes a shared ("general") component with its own
domain-specific component. A latent indicator z per instance selects the
shared component with probability pi (z = 1 means shared). A component is a
naive Bayes model over the binary feature vector (per-feature Bernoulli
means) paired with a maxent classifier for the label. Weight matrices carry
a Gaussian prior, the Bernoulli means a Beta prior.

Training maximizes the penalized conditional log-posterior with conditional
EM: the E-step computes responsibilities h_n = p(z=1 | x_n, y_n) and the
instance marginals p(x_n); each M-step block maximizes a lower bound Q on
the *change* of the objective (Jensen on the joint term, log t <= t - 1 on
the subtracted marginal term), so accepted updates never decrease the
objective and Q evaluates to exactly zero when nothing changes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import TextIO

import numpy as np

from . import maxent
from .corpus import Alphabet, Dataset, DOMAIN_IN, DOMAIN_OUT, FeatureVector, design_matrix, label_vector
from .maxent import MaxentTrainConfig, log_softmax
from .optim import (
    LbfgsConfig,
    NoRealRootError,
    golden_section_maximize,
    solve_bounded_quadratic,
)

COMPONENT_IN = "in"
COMPONENT_OUT = "out"
COMPONENT_GENERAL = "general"
COMPONENTS = (COMPONENT_IN, COMPONENT_OUT, COMPONENT_GENERAL)

BLOCK_PI = "pi"
BLOCK_LAMBDA = "lambda"
BLOCK_PSI = "psi"

# Trained mixing proportions are kept inside [PI_EPSILON, 1 - PI_EPSILON];
# stored models may carry exact 0/1 (e.g. synthetic ground truth).
PI_EPSILON = 1e-6


@dataclass
class MegaHyperparams:
    sigma2: float = 1.0
    beta_a: float = 2.0
    beta_b: float = 2.0
    max_cem_iterations: int = 5
    psi_sweeps: int = 20
    psi_tolerance: float = 1e-8
    parameter_tolerance: float = 1e-6
    optimizer: LbfgsConfig = field(default_factory=LbfgsConfig)
    # Compatibility switch: reproduce the legacy mean-update prior term
    # +1/(psi (1-psi)), i.e. effective Beta pseudocounts (2, 0), instead of
    # the symmetric default. Off unless you need old numbers.
    paper_psi_prior: bool = False

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")
        if self.beta_a < 1.0 or self.beta_b < 1.0:
            raise ValueError("beta pseudocounts below 1 make the mean prior improper")

    def beta_pseudocounts(self) -> tuple[float, float]:
        if self.paper_psi_prior:
            return 2.0, 0.0
        return self.beta_a, self.beta_b


@dataclass(frozen=True)
class MegaModel:
    feature_alphabet: Alphabet
    label_alphabet: Alphabet
    weights_in: np.ndarray  # (n_labels, n_features) maxent weights
    weights_out: np.ndarray
    weights_general: np.ndarray
    means_in: np.ndarray  # (n_features,) Bernoulli means in (0, 1)
    means_out: np.ndarray
    means_general: np.ndarray
    pi_in: float  # probability the shared component generates an in-domain instance
    pi_out: float
    hyper: MegaHyperparams = field(default_factory=MegaHyperparams)

    def __post_init__(self):
        shape = (len(self.label_alphabet), len(self.feature_alphabet))
        for w in (self.weights_in, self.weights_out, self.weights_general):
            if w.shape != shape:
                raise ValueError(f"weight shape {w.shape} != {shape}")
        for m in (self.means_in, self.means_out, self.means_general):
            if m.shape != (shape[1],):
                raise ValueError("means misaligned with feature alphabet")
            if np.any(m <= 0.0) or np.any(m >= 1.0):
                raise ValueError("Bernoulli means must lie strictly inside (0, 1)")
        for p in (self.pi_in, self.pi_out):
            if not 0.0 <= p <= 1.0:
                raise ValueError("mixing proportion outside [0, 1]")

    def weights_for(self, component: str) -> np.ndarray:
        return {
            COMPONENT_IN: self.weights_in,
            COMPONENT_OUT: self.weights_out,
            COMPONENT_GENERAL: self.weights_general,
        }[component]

    def means_for(self, component: str) -> np.ndarray:
        return {
            COMPONENT_IN: self.means_in,
            COMPONENT_OUT: self.means_out,
            COMPONENT_GENERAL: self.means_general,
        }[component]

    def pi_for(self, domain: str) -> float:
        return self.pi_in if domain == DOMAIN_IN else self.pi_out

    def predict(self, fv: FeatureVector, domain: str = DOMAIN_IN) -> int:
        return predict_mixture(self, fv, domain).label

    def distribution(self, fv: FeatureVector, domain: str = DOMAIN_IN) -> np.ndarray:
        return predict_mixture(self, fv, domain).distribution


@dataclass(frozen=True)
class Responsibilities:
    """E-step output per domain, aligned with that domain's instances in
    dataset order. resp_* is p(z = shared | x, y); log_marginal_* is
    log p(x) under the feature mixture (label-free)."""

    resp_in: np.ndarray
    log_marginal_in: np.ndarray
    resp_out: np.ndarray
    log_marginal_out: np.ndarray


@dataclass(frozen=True)
class MixturePrediction:
    label: int
    distribution: np.ndarray
    shared_weight: float  # p(z = shared | x); the specific weight is 1 - this


@dataclass(frozen=True)
class CemRecord:
    iteration: int
    block: str
    q_bound: float
    neg_penalized: float
    wall_time: float


@dataclass
class CemTrace:
    records: list[CemRecord] = field(default_factory=list)

    def to_tsv(self, stream: TextIO) -> None:
        stream.write("iteration\tblock\tq_bound\tneg_penalized_cll\n")
        for r in self.records:
            stream.write(f"{r.iteration}\t{r.block}\t{r.q_bound!r}\t{r.neg_penalized!r}\n")

    def final_neg_penalized(self) -> float:
        return self.records[-1].neg_penalized


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


@dataclass(frozen=True)
class _Views:
    """Dense array caches for one dataset, split by domain."""

    idx_in: np.ndarray
    idx_out: np.ndarray
    X_in: np.ndarray
    y_in: np.ndarray
    X_out: np.ndarray
    y_out: np.ndarray
    n_total: int

    def rows(self, domain: str) -> tuple[np.ndarray, np.ndarray]:
        return (self.X_in, self.y_in) if domain == DOMAIN_IN else (self.X_out, self.y_out)

    def positions(self, domain: str) -> np.ndarray:
        return self.idx_in if domain == DOMAIN_IN else self.idx_out


def _make_views(dataset: Dataset) -> _Views:
    X = design_matrix(dataset)
    y = label_vector(dataset)
    idx_in = np.array(dataset.domain_indices(DOMAIN_IN), dtype=np.int64)
    idx_out = np.array(dataset.domain_indices(DOMAIN_OUT), dtype=np.int64)
    return _Views(
        idx_in, idx_out,
        X[idx_in], y[idx_in],
        X[idx_out], y[idx_out],
        len(dataset),
    )


def log_bernoulli_products(means: np.ndarray, X: np.ndarray) -> np.ndarray:
    """log prod_f means^x (1-means)^(1-x) per row, over all features."""
    log_off = np.log1p(-means)
    logit = np.log(means) - log_off
    return float(log_off.sum()) + X @ logit


def log_bernoulli_product_single(means: np.ndarray, fv: FeatureVector) -> float:
    log_off = np.log1p(-means)
    total = float(log_off.sum())
    for f in fv:
        total += float(np.log(means[f]) - log_off[f])
    return total


def _gibbs_gold(weights: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """log p(y_n | x_n) under one maxent component."""
    if len(y) == 0:
        return np.zeros(0)
    logp = log_softmax(X @ weights.T)
    return logp[np.arange(len(y)), y]


def _domain_terms(model: MegaModel, views: _Views, domain: str, with_label: bool):
    """Per-instance log joint pieces for one domain: shared and specific."""
    X, y = views.rows(domain)
    pi = model.pi_for(domain)
    lp_shared = _safe_log(pi) + log_bernoulli_products(model.means_general, X)
    lp_spec = _safe_log(1.0 - pi) + log_bernoulli_products(model.means_for(domain), X)
    if with_label:
        lp_shared = lp_shared + _gibbs_gold(model.weights_general, X, y)
        lp_spec = lp_spec + _gibbs_gold(model.weights_for(domain), X, y)
    return lp_shared, lp_spec


def e_step(model: MegaModel, dataset: Dataset, views: _Views | None = None) -> Responsibilities:
    """Responsibilities and feature marginals at the current parameters."""
    views = views or _make_views(dataset)
    out = {}
    for domain in (DOMAIN_IN, DOMAIN_OUT):
        j_shared, j_spec = _domain_terms(model, views, domain, with_label=True)
        h = np.exp(j_shared - np.logaddexp(j_shared, j_spec))
        m_shared, m_spec = _domain_terms(model, views, domain, with_label=False)
        log_marginal = np.logaddexp(m_shared, m_spec)
        out[domain] = (h, log_marginal)
    return Responsibilities(out[DOMAIN_IN][0], out[DOMAIN_IN][1], out[DOMAIN_OUT][0], out[DOMAIN_OUT][1])


def _resp_for(resp: Responsibilities, domain: str) -> tuple[np.ndarray, np.ndarray]:
    if domain == DOMAIN_IN:
        return resp.resp_in, resp.log_marginal_in
    return resp.resp_out, resp.log_marginal_out


def m_step_pi(
    resp: Responsibilities,
    model: MegaModel,
    dataset: Dataset,
    domain: str,
    views: _Views | None = None,
) -> float:
    """Exact maximizer of the Q slice in one domain's mixing proportion.

    The slice is S log pi + (N - S) log(1 - pi) - sum_n m_n (pi q1_n +
    (1-pi) q0_n) with S = sum h_n, m_n the inverse marginal and q{1,0}_n the
    feature products under the shared/specific means; its stationary points
    solve D pi^2 + (N - D) pi - S = 0 with D = sum_n m_n (q0_n - q1_n).
    """
    views = views or _make_views(dataset)
    X, _ = views.rows(domain)
    n = X.shape[0]
    if n == 0:
        return min(max(model.pi_for(domain), PI_EPSILON), 1.0 - PI_EPSILON)
    h, log_marginal = _resp_for(resp, domain)
    lq_shared = log_bernoulli_products(model.means_general, X)
    lq_spec = log_bernoulli_products(model.means_for(domain), X)
    t_shared = np.exp(lq_shared - log_marginal)  # m_n q1_n, bounded
    t_spec = np.exp(lq_spec - log_marginal)
    s_shared = float(t_shared.sum())
    s_spec = float(t_spec.sum())
    s_h = float(h.sum())
    d = s_spec - s_shared

    def q_slice(pi: float) -> float:
        return (
            s_h * math.log(pi)
            + (n - s_h) * math.log1p(-pi)
            - (pi * s_shared + (1.0 - pi) * s_spec)
        )

    try:
        pi = solve_bounded_quadratic(d, n - d, -s_h, 0.0, 1.0, q_slice, eps=PI_EPSILON)
    except NoRealRootError:
        pi = golden_section_maximize(q_slice, PI_EPSILON, 1.0 - PI_EPSILON, tol=1e-9)
    return min(max(pi, PI_EPSILON), 1.0 - PI_EPSILON)


def m_step_lambda(
    resp: Responsibilities,
    model: MegaModel,
    dataset: Dataset,
    component: str,
    views: _Views | None = None,
) -> np.ndarray:
    """Weighted penalized maxent refit of one component's weights,
    warm-started from the current iterate. Domain components train on their
    own domain with weights (1 - h); the shared component trains on the
    union with weights h."""
    views = views or _make_views(dataset)
    if component == COMPONENT_GENERAL:
        X = np.concatenate([views.X_in, views.X_out], axis=0)
        y = np.concatenate([views.y_in, views.y_out])
        w = np.concatenate([resp.resp_in, resp.resp_out])
    else:
        domain = component
        X, y = views.rows(domain)
        h, _ = _resp_for(resp, domain)
        w = 1.0 - h
    cfg = MaxentTrainConfig(
        sigma2=model.hyper.sigma2,
        weights=w,
        optimizer=model.hyper.optimizer,
    )
    n_labels = len(model.label_alphabet)
    start = model.weights_for(component)
    return _train_weights(X, y, n_labels, cfg, start)


def _train_weights(X: np.ndarray, y: np.ndarray, n_labels: int, cfg: MaxentTrainConfig, start: np.ndarray) -> np.ndarray:
    from .optim import lbfgs_minimize

    mean = np.zeros((n_labels, X.shape[1]))
    w = cfg.weights if cfg.weights is not None else np.ones(len(y))

    def objective(vec: np.ndarray):
        W = vec.reshape(mean.shape)
        value = maxent._objective_value(W, X, y, w, mean, cfg.sigma2)
        grad = maxent._objective_gradient(W, X, y, w, mean, cfg.sigma2)
        return -value, -grad.ravel()

    solution, _ = lbfgs_minimize(objective, np.asarray(start, float).ravel(), cfg.optimizer)
    return solution.reshape(mean.shape)


def m_step_psi(
    resp: Responsibilities,
    model: MegaModel,
    dataset: Dataset,
    component: str,
    views: _Views | None = None,
) -> np.ndarray:
    """Coordinate ascent on one component's Bernoulli means.

    Holding the other coordinates fixed, the Q slice in psi_f is
    (A + X) log psi + (B + W - X) log(1 - psi) - P1 psi - P0 (1 - psi) where
    A, B are Beta pseudocounts minus one, W / X are the (weighted) count and
    on-count for the component's instances, and P1 / P0 sum the marginal
    penalty m_n pi_z prod_{f' != f} over instances with x_f = 1 / 0. The
    stationary points solve D psi^2 - (A+B+W+D) psi + (A+X) = 0 with
    D = P1 - P0. Coordinates sweep in ascending order until the largest
    change drops below tolerance or the sweep budget runs out.
    """
    views = views or _make_views(dataset)
    a, b = model.hyper.beta_pseudocounts()
    A, B = a - 1.0, b - 1.0

    if component == COMPONENT_GENERAL:
        X = np.concatenate([views.X_in, views.X_out], axis=0)
        w = np.concatenate([resp.resp_in, resp.resp_out])
        log_pen_base = np.concatenate([
            _safe_log(model.pi_in) - resp.log_marginal_in,
            _safe_log(model.pi_out) - resp.log_marginal_out,
        ])
    else:
        domain = component
        X, _ = views.rows(domain)
        h, log_marginal = _resp_for(resp, domain)
        w = 1.0 - h
        log_pen_base = _safe_log(1.0 - model.pi_for(domain)) - log_marginal

    psi = model.means_for(component).copy()
    n_features = psi.shape[0]
    if X.shape[0] == 0 and A + B == 0.0:
        return psi  # nothing constrains the means
    w_total = float(w.sum())

    for _ in range(model.hyper.psi_sweeps):
        log_off = np.log1p(-psi)
        logit = np.log(psi) - log_off
        logprod = float(log_off.sum()) + X @ logit
        max_delta = 0.0
        for f in range(n_features):
            xf = X[:, f]
            lp_on = math.log(psi[f])
            lp_off = math.log1p(-psi[f])
            log_leave = logprod - (xf * (lp_on - lp_off) + lp_off)
            pen = np.exp(log_pen_base + log_leave)
            p1 = float(pen @ xf)
            p0 = float(pen.sum()) - p1
            x_on = float(w @ xf)
            d = p1 - p0

            def q_slice(t: float) -> float:
                return (
                    (A + x_on) * math.log(t)
                    + (B + w_total - x_on) * math.log1p(-t)
                    - p1 * t
                    - p0 * (1.0 - t)
                )

            try:
                new = solve_bounded_quadratic(
                    d, -(A + B + w_total + d), A + x_on, 0.0, 1.0, q_slice, eps=PI_EPSILON
                )
            except NoRealRootError:
                new = golden_section_maximize(q_slice, PI_EPSILON, 1.0 - PI_EPSILON, tol=1e-9)
            max_delta = max(max_delta, abs(new - psi[f]))
            psi[f] = new
            lp_on = math.log(new)
            lp_off = math.log1p(-new)
            logprod = log_leave + xf * (lp_on - lp_off) + lp_off
        if max_delta < model.hyper.psi_tolerance:
            break
    return psi


def _prior_kernel(model: MegaModel) -> float:
    a, b = model.hyper.beta_pseudocounts()
    total = 0.0
    for comp in COMPONENTS:
        w = model.weights_for(comp)
        total -= 0.5 / model.hyper.sigma2 * float(np.sum(w * w))
        m = model.means_for(comp)
        total += float((a - 1.0) * np.log(m).sum() + (b - 1.0) * np.log1p(-m).sum())
    return total


def q_bound(
    model_t: MegaModel,
    model_tm1: MegaModel,
    resp: Responsibilities,
    dataset: Dataset,
    views: _Views | None = None,
) -> float:
    """Lower bound on the change in penalized conditional log-posterior from
    model_tm1 to model_t, tight (exactly zero) at model_t = model_tm1. The
    responsibilities must come from e_step at model_tm1."""
    views = views or _make_views(dataset)
    total = _prior_kernel(model_t) - _prior_kernel(model_tm1)
    for domain in (DOMAIN_IN, DOMAIN_OUT):
        X, _ = views.rows(domain)
        n = X.shape[0]
        if n == 0:
            continue
        h, _ = _resp_for(resp, domain)
        jt_shared, jt_spec = _domain_terms(model_t, views, domain, with_label=True)
        jm_shared, jm_spec = _domain_terms(model_tm1, views, domain, with_label=True)
        total += float(np.dot(h, jt_shared - jm_shared))
        total += float(np.dot(1.0 - h, jt_spec - jm_spec))
        mt_shared, mt_spec = _domain_terms(model_t, views, domain, with_label=False)
        log_marg_t = np.logaddexp(mt_shared, mt_spec)
        _, log_marg_m = _resp_for(resp, domain)
        total += float(n - np.exp(log_marg_t - log_marg_m).sum())
    return total


def penalized_conditional_log_posterior(
    model: MegaModel, dataset: Dataset, views: _Views | None = None
) -> float:
    """sum_n log p(y_n | x_n) + log prior kernel, both domains."""
    views = views or _make_views(dataset)
    total = _prior_kernel(model)
    for domain in (DOMAIN_IN, DOMAIN_OUT):
        X, _ = views.rows(domain)
        if X.shape[0] == 0:
            continue
        j_shared, j_spec = _domain_terms(model, views, domain, with_label=True)
        m_shared, m_spec = _domain_terms(model, views, domain, with_label=False)
        total += float(np.logaddexp(j_shared, j_spec).sum())
        total -= float(np.logaddexp(m_shared, m_spec).sum())
    return total


def initial_model(dataset: Dataset, hyper: MegaHyperparams | None = None) -> MegaModel:
    """Uninformed start: uniform means, zero weights, balanced mixing."""
    hyper = hyper or MegaHyperparams()
    n_labels, n_features = dataset.n_labels, dataset.n_features
    zeros = lambda: np.zeros((n_labels, n_features))
    halves = lambda: np.full(n_features, 0.5)
    return MegaModel(
        dataset.feature_alphabet,
        dataset.label_alphabet,
        zeros(), zeros(), zeros(),
        halves(), halves(), halves(),
        0.5, 0.5, hyper,
    )


def _max_delta(a: MegaModel, b: MegaModel) -> float:
    delta = max(abs(a.pi_in - b.pi_in), abs(a.pi_out - b.pi_out))
    for comp in COMPONENTS:
        delta = max(delta, float(np.abs(a.weights_for(comp) - b.weights_for(comp)).max(initial=0.0)))
        delta = max(delta, float(np.abs(a.means_for(comp) - b.means_for(comp)).max(initial=0.0)))
    return delta


def train_cem(dataset: Dataset, hyper: MegaHyperparams | None = None) -> tuple[MegaModel, CemTrace]:
    """Block conditional EM: E-step, then mixing / weights / means blocks.

    Records one trace row per block with the Q bound against the iteration's
    starting parameters and the negative penalized conditional
    log-posterior. Stops at the iteration budget or when all parameter
    deltas fall below tolerance.
    """
    hyper = hyper or MegaHyperparams()
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    views = _make_views(dataset)
    model = initial_model(dataset, hyper)
    trace = CemTrace()
    started = time.perf_counter()

    def record(iteration: int, block: str, reference: MegaModel, resp: Responsibilities):
        trace.records.append(CemRecord(
            iteration,
            block,
            q_bound(model, reference, resp, dataset, views),
            -penalized_conditional_log_posterior(model, dataset, views),
            time.perf_counter() - started,
        ))

    for iteration in range(1, hyper.max_cem_iterations + 1):
        reference = model
        resp = e_step(model, dataset, views)

        model = replace(
            model,
            pi_in=m_step_pi(resp, model, dataset, DOMAIN_IN, views),
            pi_out=m_step_pi(resp, model, dataset, DOMAIN_OUT, views),
        )
        record(iteration, BLOCK_PI, reference, resp)

        model = replace(
            model,
            weights_in=m_step_lambda(resp, model, dataset, COMPONENT_IN, views),
            weights_out=m_step_lambda(resp, model, dataset, COMPONENT_OUT, views),
            weights_general=m_step_lambda(resp, model, dataset, COMPONENT_GENERAL, views),
        )
        record(iteration, BLOCK_LAMBDA, reference, resp)

        model = replace(
            model,
            means_in=m_step_psi(resp, model, dataset, COMPONENT_IN, views),
            means_out=m_step_psi(resp, model, dataset, COMPONENT_OUT, views),
            means_general=m_step_psi(resp, model, dataset, COMPONENT_GENERAL, views),
        )
        record(iteration, BLOCK_PSI, reference, resp)

        if _max_delta(model, reference) < hyper.parameter_tolerance:
            break
    return model, trace


def predict_mixture(model: MegaModel, fv: FeatureVector, domain: str = DOMAIN_IN) -> MixturePrediction:
    """Label distribution marginalized over the latent component:
    p(y|x) = w p_general(y|x) + (1-w) p_specific(y|x) with
    w = p(z = shared | x) from the feature mixture."""
    pi = model.pi_for(domain)
    lq_shared = _safe_log(pi) + log_bernoulli_product_single(model.means_general, fv)
    lq_spec = _safe_log(1.0 - pi) + log_bernoulli_product_single(model.means_for(domain), fv)
    shared_weight = math.exp(lq_shared - np.logaddexp(lq_shared, lq_spec))
    p_shared = maxent.class_distribution(model.weights_general, fv)
    p_spec = maxent.class_distribution(model.weights_for(domain), fv)
    dist = shared_weight * p_shared + (1.0 - shared_weight) * p_spec
    return MixturePrediction(int(np.argmax(dist)), dist, shared_weight)
