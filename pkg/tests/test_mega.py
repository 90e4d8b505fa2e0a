"""Mixture model: responsibilities, block updates, bound, training loop."""

import io
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixadapt import maxent
from mixadapt.corpus import (
    DOMAIN_IN,
    DOMAIN_OUT,
    Alphabet,
    Dataset,
    FeatureVector,
    Instance,
    design_matrix,
)
from mixadapt.mega import (
    COMPONENT_GENERAL,
    COMPONENT_IN,
    COMPONENT_OUT,
    MegaHyperparams,
    MegaModel,
    Responsibilities,
    e_step,
    initial_model,
    m_step_lambda,
    m_step_pi,
    m_step_psi,
    penalized_conditional_log_posterior,
    predict_mixture,
    q_bound,
    train_cem,
)
from mixadapt.optim import LbfgsConfig, golden_section_maximize
from mixadapt.synth import SynthSpec, generate_synthetic

TIGHT_HYPER = MegaHyperparams(optimizer=LbfgsConfig(value_tolerance=0.0))


def random_dataset(rng, n_features=4, n_labels=2, n_in=6, n_out=6):
    feats = Alphabet(f"f{i}" for i in range(n_features))
    labels = Alphabet(f"y{i}" for i in range(n_labels))
    instances = []
    for domain, count in ((DOMAIN_IN, n_in), (DOMAIN_OUT, n_out)):
        for _ in range(count):
            active = [f for f in range(n_features) if rng.random() < 0.5]
            instances.append(
                Instance(
                    FeatureVector.from_indices(active),
                    int(rng.integers(n_labels)),
                    domain,
                )
            )
    return Dataset(feats, labels, tuple(instances))


def random_model(rng, dataset, hyper=None, pi_in=None, pi_out=None):
    shape = (dataset.n_labels, dataset.n_features)
    means = lambda: rng.uniform(0.1, 0.9, size=shape[1])
    return MegaModel(
        dataset.feature_alphabet,
        dataset.label_alphabet,
        rng.normal(size=shape),
        rng.normal(size=shape),
        rng.normal(size=shape),
        means(),
        means(),
        means(),
        float(rng.uniform(0.1, 0.9)) if pi_in is None else pi_in,
        float(rng.uniform(0.1, 0.9)) if pi_out is None else pi_out,
        hyper or MegaHyperparams(),
    )


# ---------------------------------------------------------------------------
# linear-space reference computations (no shared code with the package)


def bernoulli_product(means, row):
    total = 1.0
    for f in range(len(means)):
        total *= means[f] if row[f] else 1.0 - means[f]
    return total


def gibbs_distribution(weights, row):
    scores = [
        sum(weights[y][f] for f in range(len(row)) if row[f])
        for y in range(weights.shape[0])
    ]
    exp_scores = [math.exp(s) for s in scores]
    z = sum(exp_scores)
    return [s / z for s in exp_scores]


def reference_responsibilities(model, dataset, domain):
    """Enumerates p(z, x, y) per instance with exact linear-space products."""
    X = design_matrix(dataset)
    pi = model.pi_for(domain)
    spec_w = model.weights_for(domain)
    spec_m = model.means_for(domain)
    h_list, logm_list = [], []
    for i in dataset.domain_indices(domain):
        row = X[i]
        y = dataset.instances[i].label
        joint_shared = (
            pi
            * bernoulli_product(model.means_general, row)
            * gibbs_distribution(model.weights_general, row)[y]
        )
        joint_spec = (
            (1.0 - pi)
            * bernoulli_product(spec_m, row)
            * gibbs_distribution(spec_w, row)[y]
        )
        h_list.append(joint_shared / (joint_shared + joint_spec))
        marg = pi * bernoulli_product(model.means_general, row) + (
            1.0 - pi
        ) * bernoulli_product(spec_m, row)
        logm_list.append(math.log(marg))
    return np.array(h_list), np.array(logm_list)


# ---------------------------------------------------------------------------
# E-step


def test_symmetric_components_split_responsibility_evenly():
    rng = np.random.default_rng(0)
    ds = random_dataset(rng)
    m = random_model(rng, ds, pi_in=0.5)
    m = replace(m, weights_general=m.weights_in.copy(), means_general=m.means_in.copy())
    resp = e_step(m, ds)
    np.testing.assert_allclose(resp.resp_in, 0.5, atol=1e-12)


def test_extreme_mixing_dominates_responsibility():
    rng = np.random.default_rng(1)
    ds = random_dataset(rng)
    eps = 1e-4
    m = random_model(rng, ds, pi_in=1.0 - eps)
    resp = e_step(m, ds)
    assert np.all(resp.resp_in >= 1.0 - 10.0 * eps)


def test_responsibilities_match_enumeration():
    rng = np.random.default_rng(2)
    ds = random_dataset(rng, n_features=4, n_labels=2, n_in=6, n_out=6)
    m = random_model(rng, ds)
    resp = e_step(m, ds)
    for domain, h, logm in (
        (DOMAIN_IN, resp.resp_in, resp.log_marginal_in),
        (DOMAIN_OUT, resp.resp_out, resp.log_marginal_out),
    ):
        ref_h, ref_logm = reference_responsibilities(m, ds, domain)
        np.testing.assert_allclose(h, ref_h, rtol=1e-10)
        np.testing.assert_allclose(logm, ref_logm, rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_responsibilities_stay_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, n_features=5, n_labels=3, n_in=4, n_out=4)
    resp = e_step(random_model(rng, ds), ds)
    for h in (resp.resp_in, resp.resp_out):
        assert np.all((h >= 0.0) & (h <= 1.0))
    assert np.all(np.isfinite(resp.log_marginal_in))
    assert np.all(np.isfinite(resp.log_marginal_out))


# ---------------------------------------------------------------------------
# mixing-proportion update


def test_pi_update_reduces_to_responsibility_mean_when_means_match():
    rng = np.random.default_rng(3)
    ds = random_dataset(rng, n_in=9, n_out=5)
    m = random_model(rng, ds)
    m = replace(m, means_general=m.means_in.copy())
    resp = e_step(m, ds)
    got = m_step_pi(resp, m, ds, DOMAIN_IN)
    assert got == pytest.approx(float(resp.resp_in.mean()), abs=1e-14)


def test_pi_update_clamps_at_unanimous_responsibility():
    rng = np.random.default_rng(4)
    ds = random_dataset(rng, n_in=7, n_out=3)
    m = random_model(rng, ds)
    m = replace(m, means_general=m.means_in.copy())
    resp = e_step(m, ds)
    forced = Responsibilities(
        np.ones_like(resp.resp_in),
        resp.log_marginal_in,
        resp.resp_out,
        resp.log_marginal_out,
    )
    assert m_step_pi(forced, m, ds, DOMAIN_IN) == pytest.approx(1.0 - 1e-6, abs=1e-12)


def pi_slice_oracle(model, dataset, resp, domain):
    """The exact objective slice in one domain's mixing proportion."""
    X = design_matrix(dataset)
    rows = [X[i] for i in dataset.domain_indices(domain)]
    h, logm = (
        (resp.resp_in, resp.log_marginal_in)
        if domain == DOMAIN_IN
        else (resp.resp_out, resp.log_marginal_out)
    )
    q_shared = [bernoulli_product(model.means_general, r) for r in rows]
    q_spec = [bernoulli_product(model.means_for(domain), r) for r in rows]
    inv_marg = np.exp(-logm)

    def slice_value(pi):
        total = 0.0
        for n in range(len(rows)):
            total += h[n] * math.log(pi) + (1.0 - h[n]) * math.log1p(-pi)
            total -= inv_marg[n] * (pi * q_shared[n] + (1.0 - pi) * q_spec[n])
        return total

    return slice_value


def test_pi_update_matches_golden_section_oracle():
    rng = np.random.default_rng(5)
    for _ in range(8):
        ds = random_dataset(rng, n_features=5, n_labels=3, n_in=25, n_out=25)
        m = random_model(rng, ds)
        resp = e_step(m, ds)
        for domain in (DOMAIN_IN, DOMAIN_OUT):
            got = m_step_pi(resp, m, ds, domain)
            oracle = golden_section_maximize(
                pi_slice_oracle(m, ds, resp, domain), 1e-6, 1.0 - 1e-6, tol=1e-9
            )
            assert got == pytest.approx(oracle, abs=1e-6)


# ---------------------------------------------------------------------------
# weight update


def test_lambda_update_with_zero_responsibility_is_plain_fit():
    rng = np.random.default_rng(6)
    ds = random_dataset(rng, n_in=10, n_out=8)
    m = random_model(rng, ds, hyper=TIGHT_HYPER)
    resp = e_step(m, ds)
    silent = Responsibilities(
        np.zeros_like(resp.resp_in),
        resp.log_marginal_in,
        np.zeros_like(resp.resp_out),
        resp.log_marginal_out,
    )
    got = m_step_lambda(silent, m, ds, COMPONENT_IN)
    plain = maxent.train(
        ds.only_domain(DOMAIN_IN),
        maxent.MaxentTrainConfig(optimizer=LbfgsConfig(value_tolerance=0.0)),
    )
    np.testing.assert_allclose(got, plain, atol=1e-5)
    # nothing assigned to the shared component: its weights collapse to the
    # prior mean
    shared = m_step_lambda(silent, m, ds, COMPONENT_GENERAL)
    np.testing.assert_allclose(shared, 0.0, atol=1e-6)


def test_lambda_update_with_full_responsibility_pools_domains():
    rng = np.random.default_rng(7)
    feats = Alphabet(f"f{i}" for i in range(4))
    labels = Alphabet(f"y{i}" for i in range(2))
    rows = []
    for domain in (DOMAIN_IN, DOMAIN_OUT):  # in-block first, matching the pool order
        for _ in range(8):
            active = [f for f in range(4) if rng.random() < 0.5]
            rows.append(
                Instance(FeatureVector.from_indices(active), int(rng.integers(2)), domain)
            )
    ds = Dataset(feats, labels, tuple(rows))
    m = random_model(rng, ds, hyper=TIGHT_HYPER)
    resp = e_step(m, ds)
    unanimous = Responsibilities(
        np.ones_like(resp.resp_in),
        resp.log_marginal_in,
        np.ones_like(resp.resp_out),
        resp.log_marginal_out,
    )
    got = m_step_lambda(unanimous, m, ds, COMPONENT_GENERAL)
    pooled = maxent.train(
        ds, maxent.MaxentTrainConfig(optimizer=LbfgsConfig(value_tolerance=0.0))
    )
    np.testing.assert_allclose(got, pooled, atol=1e-5)
    np.testing.assert_allclose(m_step_lambda(unanimous, m, ds, COMPONENT_IN), 0.0, atol=1e-6)


def test_lambda_update_reaches_weighted_stationary_point():
    rng = np.random.default_rng(8)
    ds = random_dataset(rng, n_in=12, n_out=10)
    m = random_model(rng, ds, hyper=TIGHT_HYPER)
    resp = e_step(m, ds)
    got = m_step_lambda(resp, m, ds, COMPONENT_IN)
    cfg = maxent.MaxentTrainConfig(weights=1.0 - resp.resp_in)
    grad = maxent.log_posterior_gradient(got, ds.only_domain(DOMAIN_IN), cfg)
    assert np.linalg.norm(grad) <= TIGHT_HYPER.optimizer.gradient_tolerance


# ---------------------------------------------------------------------------
# mean update


def test_psi_update_is_weighted_mle_when_penalty_vanishes():
    # pi = 1 silences the specific component's marginal penalty, and unit
    # pseudocounts remove the prior pull
    rng = np.random.default_rng(9)
    hyper = MegaHyperparams(beta_a=1.0, beta_b=1.0)
    ds = random_dataset(rng, n_in=10, n_out=6)
    m = replace(random_model(rng, ds, hyper=hyper), pi_in=1.0)
    resp = Responsibilities(
        rng.uniform(0.1, 0.9, size=10), np.zeros(10),
        rng.uniform(0.1, 0.9, size=6), np.zeros(6),
    )
    got = m_step_psi(resp, m, ds, COMPONENT_IN)
    w = 1.0 - resp.resp_in
    X = design_matrix(ds)[list(ds.domain_indices(DOMAIN_IN))]
    expected = (w @ X) / w.sum()
    np.testing.assert_allclose(got, np.clip(expected, 1e-6, 1.0 - 1e-6), atol=1e-12)


def test_psi_update_returns_prior_mode_without_data():
    rng = np.random.default_rng(10)
    ds = random_dataset(rng, n_in=5, n_out=5)
    m = replace(random_model(rng, ds), pi_in=1.0)  # a=b=2 default
    resp = e_step(m, ds)
    unanimous = Responsibilities(
        np.ones_like(resp.resp_in),
        resp.log_marginal_in,
        resp.resp_out,
        resp.log_marginal_out,
    )
    got = m_step_psi(unanimous, m, ds, COMPONENT_IN)
    np.testing.assert_allclose(got, 0.5, atol=1e-12)


def psi_slice_oracle(model, dataset, resp, component, psi_vector, f):
    """Exact objective slice in coordinate f of one component's means."""
    X = design_matrix(dataset)
    a, b = model.hyper.beta_pseudocounts()
    if component == COMPONENT_GENERAL:
        idx = list(dataset.domain_indices(DOMAIN_IN)) + list(dataset.domain_indices(DOMAIN_OUT))
        w = np.concatenate([resp.resp_in, resp.resp_out])
        inv_marg = np.exp(-np.concatenate([resp.log_marginal_in, resp.log_marginal_out]))
        pis = np.concatenate(
            [
                np.full(len(resp.resp_in), model.pi_in),
                np.full(len(resp.resp_out), model.pi_out),
            ]
        )
    else:
        idx = list(dataset.domain_indices(component))
        h, logm = (
            (resp.resp_in, resp.log_marginal_in)
            if component == DOMAIN_IN
            else (resp.resp_out, resp.log_marginal_out)
        )
        w = 1.0 - h
        inv_marg = np.exp(-logm)
        pis = np.full(len(idx), 1.0 - model.pi_for(component))
    rows = [X[i] for i in idx]

    def slice_value(t):
        psi = psi_vector.copy()
        psi[f] = t
        total = (a - 1.0) * math.log(t) + (b - 1.0) * math.log1p(-t)
        for n, row in enumerate(rows):
            on = row[f]
            total += w[n] * (on * math.log(t) + (1.0 - on) * math.log1p(-t))
            total -= inv_marg[n] * pis[n] * bernoulli_product(psi, row)
        return total

    return slice_value


def test_psi_update_matches_golden_section_per_coordinate():
    rng = np.random.default_rng(11)
    for _ in range(5):
        ds = random_dataset(rng, n_features=5, n_labels=2, n_in=15, n_out=15)
        m = random_model(rng, ds)
        resp = e_step(m, ds)
        for component in (COMPONENT_IN, COMPONENT_OUT, COMPONENT_GENERAL):
            got = m_step_psi(resp, m, ds, component)
            for f in range(ds.n_features):
                oracle = golden_section_maximize(
                    psi_slice_oracle(m, ds, resp, component, got, f),
                    1e-6,
                    1.0 - 1e-6,
                    tol=1e-9,
                )
                assert got[f] == pytest.approx(oracle, abs=1e-6)


def test_psi_sweep_never_decreases_bound():
    rng = np.random.default_rng(12)
    for _ in range(5):
        ds = random_dataset(rng, n_features=4, n_labels=2, n_in=10, n_out=10)
        m = random_model(rng, ds)
        resp = e_step(m, ds)
        stepped = replace(m, means_in=m_step_psi(resp, m, ds, COMPONENT_IN))
        assert q_bound(stepped, m, resp, ds) >= -1e-10


# ---------------------------------------------------------------------------
# bound


def test_bound_is_zero_at_contact_point():
    rng = np.random.default_rng(13)
    for _ in range(10):
        ds = random_dataset(rng, n_features=4, n_labels=3, n_in=8, n_out=8)
        m = random_model(rng, ds)
        resp = e_step(m, ds)
        assert abs(q_bound(m, m, resp, ds)) <= 1e-10


def test_bound_never_exceeds_actual_improvement():
    rng = np.random.default_rng(14)
    for _ in range(20):
        ds = random_dataset(rng, n_features=4, n_labels=2, n_in=8, n_out=8)
        m = random_model(rng, ds)
        other = replace(
            m,
            weights_in=m.weights_in + rng.normal(scale=0.5, size=m.weights_in.shape),
            weights_general=m.weights_general + rng.normal(scale=0.5, size=m.weights_in.shape),
            means_in=np.clip(m.means_in + rng.normal(scale=0.1, size=m.means_in.shape), 0.05, 0.95),
            pi_in=float(rng.uniform(0.1, 0.9)),
        )
        resp = e_step(m, ds)
        actual = penalized_conditional_log_posterior(other, ds) - penalized_conditional_log_posterior(m, ds)
        assert q_bound(other, m, resp, ds) <= actual + 1e-8


# ---------------------------------------------------------------------------
# training loop


def test_zero_iterations_returns_initialization():
    rng = np.random.default_rng(15)
    ds = random_dataset(rng)
    model, trace = train_cem(ds, MegaHyperparams(max_cem_iterations=0))
    assert trace.records == []
    assert model.pi_in == 0.5 and model.pi_out == 0.5
    np.testing.assert_array_equal(model.weights_in, 0.0)
    np.testing.assert_array_equal(model.weights_general, 0.0)
    np.testing.assert_array_equal(model.means_out, 0.5)


def test_training_rejects_empty_dataset():
    feats = Alphabet(["f0"])
    labels = Alphabet(["y0"])
    with pytest.raises(ValueError):
        train_cem(Dataset(feats, labels, ()))


def test_training_improves_monotonically_with_nonnegative_bounds():
    corpus = generate_synthetic(
        SynthSpec(
            n_features=8, n_labels=2, n_in=40, n_out=60, n_test=1,
            pi_in=0.5, pi_out=0.5, seed=0,
        )
    )
    model, trace = train_cem(corpus.train, MegaHyperparams(max_cem_iterations=3))
    assert len(trace.records) == 9  # three blocks per iteration
    values = [r.neg_penalized for r in trace.records]
    start = -penalized_conditional_log_posterior(initial_model(corpus.train), corpus.train)
    for previous, current in zip([start] + values, values):
        assert current <= previous + 1e-8
    assert all(r.q_bound >= -1e-10 for r in trace.records)
    assert model.pi_in != 0.5  # the mixing weight actually moved


def test_swapping_domains_swaps_fitted_components():
    rng = np.random.default_rng(16)
    ds = random_dataset(rng, n_features=4, n_labels=2, n_in=8, n_out=12)
    flipped = Dataset(
        ds.feature_alphabet,
        ds.label_alphabet,
        tuple(
            Instance(ins.features, ins.label, DOMAIN_OUT if ins.domain == DOMAIN_IN else DOMAIN_IN)
            for ins in ds.instances
        ),
    )
    hyper = MegaHyperparams(max_cem_iterations=1)
    a, _ = train_cem(ds, hyper)
    b, _ = train_cem(flipped, hyper)
    assert a.pi_in == b.pi_out and a.pi_out == b.pi_in
    np.testing.assert_array_equal(a.weights_in, b.weights_out)
    np.testing.assert_array_equal(a.weights_out, b.weights_in)
    np.testing.assert_array_equal(a.means_in, b.means_out)
    np.testing.assert_array_equal(a.means_out, b.means_in)
    np.testing.assert_allclose(a.weights_general, b.weights_general, atol=1e-10)
    np.testing.assert_allclose(a.means_general, b.means_general, atol=1e-10)


def test_trace_exports_tab_separated_records():
    corpus = generate_synthetic(
        SynthSpec(
            n_features=6, n_labels=2, n_in=20, n_out=20, n_test=1,
            pi_in=0.5, pi_out=0.5, seed=1,
        )
    )
    _, trace = train_cem(corpus.train, MegaHyperparams(max_cem_iterations=2))
    buffer = io.StringIO()
    trace.to_tsv(buffer)
    lines = buffer.getvalue().strip().split("\n")
    assert lines[0] == "iteration\tblock\tq_bound\tneg_penalized_cll"
    assert len(lines) == 1 + len(trace.records)
    first = lines[1].split("\t")
    assert first[0] == "1" and first[1] == "pi"
    assert float(first[2]) == pytest.approx(trace.records[0].q_bound)


# ---------------------------------------------------------------------------
# mixture prediction


def test_prediction_collapses_to_shared_component_at_extreme_mixing():
    rng = np.random.default_rng(17)
    ds = random_dataset(rng, n_features=4)
    m = random_model(rng, ds, pi_in=1.0 - 1e-12)
    for bits in range(16):
        fv = FeatureVector.from_indices(f for f in range(4) if bits & (1 << f))
        pred = predict_mixture(m, fv, DOMAIN_IN)
        assert pred.label == maxent.predict(m.weights_general, fv)
        np.testing.assert_allclose(
            pred.distribution,
            maxent.class_distribution(m.weights_general, fv),
            atol=1e-9,
        )


def test_prediction_ignores_mixing_for_identical_components():
    rng = np.random.default_rng(18)
    ds = random_dataset(rng, n_features=4)
    m = random_model(rng, ds)
    m = replace(m, weights_general=m.weights_in.copy(), means_general=m.means_in.copy())
    fv = FeatureVector((0, 2))
    base = predict_mixture(replace(m, pi_in=0.3), fv).distribution
    for pi in (0.05, 0.5, 0.95):
        np.testing.assert_allclose(
            predict_mixture(replace(m, pi_in=pi), fv).distribution, base, atol=1e-12
        )


def test_prediction_matches_linear_space_enumeration():
    rng = np.random.default_rng(19)
    ds = random_dataset(rng, n_features=4, n_labels=3)
    m = random_model(rng, ds)
    for bits in range(16):
        row = [(bits >> f) & 1 for f in range(4)]
        fv = FeatureVector.from_indices(f for f in range(4) if row[f])
        pred = predict_mixture(m, fv, DOMAIN_IN)
        nb_shared = bernoulli_product(m.means_general, row)
        nb_spec = bernoulli_product(m.means_in, row)
        scores = [
            m.pi_in * nb_shared * gibbs_distribution(m.weights_general, row)[y]
            + (1.0 - m.pi_in) * nb_spec * gibbs_distribution(m.weights_in, row)[y]
            for y in range(3)
        ]
        np.testing.assert_allclose(
            pred.distribution, np.array(scores) / sum(scores), rtol=1e-10
        )
        expected_shared = m.pi_in * nb_shared / (m.pi_in * nb_shared + (1.0 - m.pi_in) * nb_spec)
        assert pred.shared_weight == pytest.approx(expected_shared, rel=1e-10)
        assert pred.label == int(np.argmax(scores))


def test_prediction_uses_requested_domain():
    rng = np.random.default_rng(20)
    ds = random_dataset(rng, n_features=4, n_labels=2)
    m = random_model(rng, ds, pi_in=1.0 - 1e-12, pi_out=1e-12)
    fv = FeatureVector((1, 3))
    assert predict_mixture(m, fv, DOMAIN_IN).shared_weight == pytest.approx(1.0, abs=1e-9)
    assert predict_mixture(m, fv, DOMAIN_OUT).shared_weight == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_prediction_distribution_is_normalized(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, n_features=5, n_labels=3, n_in=2, n_out=2)
    m = random_model(rng, ds)
    active = [f for f in range(5) if rng.random() < 0.5]
    pred = predict_mixture(m, FeatureVector.from_indices(active))
    assert abs(pred.distribution.sum() - 1.0) <= 1e-12
    assert 0.0 <= pred.shared_weight <= 1.0


def test_model_validation_rejects_bad_shapes_and_ranges():
    feats = Alphabet(["f0", "f1"])
    labels = Alphabet(["y0", "y1"])
    good = dict(
        weights_in=np.zeros((2, 2)),
        weights_out=np.zeros((2, 2)),
        weights_general=np.zeros((2, 2)),
        means_in=np.full(2, 0.5),
        means_out=np.full(2, 0.5),
        means_general=np.full(2, 0.5),
        pi_in=0.5,
        pi_out=0.5,
    )
    MegaModel(feats, labels, **good)
    with pytest.raises(ValueError):
        MegaModel(feats, labels, **{**good, "weights_in": np.zeros((3, 2))})
    with pytest.raises(ValueError):
        MegaModel(feats, labels, **{**good, "means_in": np.array([0.0, 0.5])})
    with pytest.raises(ValueError):
        MegaModel(feats, labels, **{**good, "pi_in": 1.5})
    with pytest.raises(ValueError):
        MegaHyperparams(beta_a=0.5)
    with pytest.raises(ValueError):
        MegaHyperparams(sigma2=-1.0)
