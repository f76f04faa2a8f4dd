import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from p2nia.data import AttributeSpec, Dataset, Schema
from p2nia.mechanisms import exact_marginal
from p2nia.metrics import demographic_parity, fairness_report, joint_counts
from p2nia.synth import MarginalPlan, fit, generate, load_model, plan_marginals, save_model


def schema_with_features(n_features, k=3):
    feats = tuple(AttributeSpec(f"x{i}", "feature", tuple(str(v) for v in range(k))) for i in range(n_features))
    return Schema(feats + (AttributeSpec("A", "protected", ("0", "1")), AttributeSpec("Y", "target", ("0", "1")),
                           AttributeSpec("Yhat", "prediction", ("0", "1"))))


@pytest.fixture(scope="module")
def labeled(desk_split, desk_model):
    return desk_model.predict(desk_split[1])


def test_plan_ten_features():
    plan = plan_marginals(schema_with_features(10), seed=0)
    assert len(plan.fairness_marginals) == 4
    assert len(plan.feature_marginals) == 12
    assert len(set(plan.feature_marginals)) == 12
    assert plan.fairness_marginals == (("A", "Y"), ("A", "Yhat"), ("Y", "Yhat"), ("A", "Y", "Yhat"))


def test_plan_two_features_warns():
    with pytest.warns(UserWarning, match="only 1 feature pairs"):
        plan = plan_marginals(schema_with_features(2), seed=0)
    assert plan.feature_marginals == (("x0", "x1"),)


def test_plan_deterministic():
    s = schema_with_features(8)
    assert plan_marginals(s, seed=3) == plan_marginals(s, seed=3)
    assert plan_marginals(s, seed=3) != plan_marginals(s, seed=4)


@settings(max_examples=30)
@given(st.integers(6, 12), st.integers(0, 1000), st.floats(0.05, 1.0))
def test_budget_fractions_sum_to_one(n_features, seed, share):
    plan = plan_marginals(schema_with_features(n_features), seed=seed, fairness_share=share)
    assert math.fsum(plan.budget_fractions()) == pytest.approx(1.0, abs=1e-12)


def test_fit_ledger_split(labeled):
    plan = plan_marginals(labeled.schema, seed=0)
    _, ledger = fit(labeled, plan, 10.0, seed=0)
    eps = [e for _, e in ledger.entries]
    assert eps[:4] == pytest.approx([1.25] * 4)  # half of 10 over four fairness marginals
    assert eps[4:] == pytest.approx([5 / 12] * 12)
    assert ledger.total_epsilon == pytest.approx(10.0, abs=1e-12)


def test_fit_without_noise_reproduces_marginals(labeled):
    plan = plan_marginals(labeled.schema, seed=0)
    model, ledger = fit(labeled, plan, math.inf, seed=0)
    n = labeled.n_rows
    three = exact_marginal(labeled, ("sex", "income", "Yhat")) / n
    assert np.allclose(model.joint, three, atol=1e-15)
    for name, dist in model.feature_dists.items():
        expected = np.bincount(labeled.column(name), minlength=labeled.schema[name].cardinality) / n
        assert np.allclose(dist, expected, atol=1e-12)
    assert ledger.total_epsilon == math.inf


def test_fit_deterministic(labeled):
    plan = plan_marginals(labeled.schema, seed=0)
    m1, _ = fit(labeled, plan, 1.0, seed=9)
    m2, _ = fit(labeled, plan, 1.0, seed=9)
    assert np.array_equal(m1.joint, m2.joint)
    assert all(np.array_equal(m1.feature_dists[k], m2.feature_dists[k]) for k in m1.feature_dists)


def test_model_distributions_normalised(labeled):
    model, _ = fit(labeled, plan_marginals(labeled.schema, seed=1), 0.5, seed=1)
    assert model.joint.sum() == pytest.approx(1, abs=1e-9)
    for d in model.feature_dists.values():
        assert d.sum() == pytest.approx(1, abs=1e-9) and (d >= 0).all()


def test_generate_sizes_and_validity(labeled):
    model, _ = fit(labeled, plan_marginals(labeled.schema, seed=0), 10.0, seed=0)
    out = generate(model, 5000, seed=0)
    assert out.n_rows == 5000 and out.schema == labeled.schema
    one = generate(model, 1, seed=0)
    assert one.n_rows == 1
    assert generate(model, 300, seed=5).equals(generate(model, 300, seed=5))


def test_generate_preserves_demographic_parity_without_noise():
    # source with P[Yhat=1 | A=0] = 0.3, P[Yhat=1 | A=1] = 0.5
    s = schema_with_features(3)
    rows = []
    for a, pos in ((0, 30), (1, 50)):
        for i in range(100):
            rows.append([i % 3, (i // 3) % 3, i % 2, a, i % 2, int(i < pos)])
    src = Dataset(s, rows)
    assert demographic_parity(joint_counts(src)) == pytest.approx(0.2)
    with pytest.warns(UserWarning, match="feature pairs"):
        plan = plan_marginals(s, seed=0)
    model, _ = fit(src, plan, math.inf, seed=0)
    out = generate(model, 1_000_000, seed=1)
    assert demographic_parity(joint_counts(out)) == pytest.approx(0.2, abs=0.005)


def test_model_serialisation_round_trip(tmp_path, labeled):
    model, _ = fit(labeled, plan_marginals(labeled.schema, seed=0), 2.0, seed=0)
    save_model(model, tmp_path / "g.json")
    back = load_model(tmp_path / "g.json")
    assert back.plan == model.plan and back.schema == model.schema
    assert generate(back, 500, seed=3).equals(generate(model, 500, seed=3))
