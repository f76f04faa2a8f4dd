import math

import numpy as np
import pytest

from p2nia.data import AttributeSpec, Dataset, Schema
from p2nia.errors import DataError
from p2nia.model import load_model, predict, save_model, train

S = Schema((AttributeSpec("f", "feature", ("a", "b", "c")), AttributeSpec("g", "feature", ("u", "v")),
            AttributeSpec("A", "protected", ("0", "1")), AttributeSpec("Y", "target", ("no", "yes"))))


def test_separable_feature_gives_perfect_training_accuracy(rng):
    f = rng.integers(0, 3, 500)
    y = (f == 2).astype(int)
    d = Dataset(S, np.column_stack([f, rng.integers(0, 2, 500), rng.integers(0, 2, 500), y]))
    m = train(d)
    assert (predict(m, d).column("Yhat") == y).all()


def test_balanced_labels_prior(rng):
    d = Dataset(S, np.column_stack([rng.integers(0, 3, 20_000), rng.integers(0, 2, (20_000, 3))]))
    assert train(d).prior == pytest.approx([0.5, 0.5], abs=0.02)


def test_two_rows_smoothed():
    m = train(Dataset(S, [[0, 0, 0, 0], [1, 1, 1, 1]]))
    for t in m.conditionals:
        assert (t > 0).all()
        assert t.sum(axis=1) == pytest.approx([1, 1], abs=1e-9)
    assert m.prior.sum() == pytest.approx(1)


def test_posterior_on_toy_matches_hand_computation():
    # 2 features; class 1 rows mostly (f=c, g=v)
    rows = [[2, 1, 0, 1]] * 3 + [[0, 1, 0, 1]] + [[0, 0, 0, 0]] * 3 + [[2, 0, 0, 0]]
    d = Dataset(S, rows)
    m = train(d, features=["f", "g"])
    # by hand: prior 1/2 each; P[f=c|1]=(3+1)/(4+3), P[g=v|1]=(4+1)/(4+2);
    # P[f=c|0]=(1+1)/(4+3), P[g=v|0]=(0+1)/(4+2)
    post1 = 0.5 * (4 / 7) * (5 / 6)
    post0 = 0.5 * (2 / 7) * (1 / 6)
    lp = m.log_posteriors(Dataset(S, [[2, 1, 0, 0]]))
    assert lp[0, 1] == pytest.approx(math.log(post1))
    assert lp[0, 0] == pytest.approx(math.log(post0))
    assert predict(m, Dataset(S, [[2, 1, 0, 0]])).column("Yhat").tolist() == [1]


def test_ties_break_to_zero():
    d = Dataset(S, [[0, 0, 0, 0], [0, 0, 0, 1]])
    m = train(d, features=["f"])
    assert predict(m, d).column("Yhat").tolist() == [0, 0]


def test_single_class_warns_and_predicts_it():
    d = Dataset(S, [[0, 0, 0, 1], [1, 1, 1, 1]])
    with pytest.warns(UserWarning, match="single class"):
        m = train(d)
    assert predict(m, Dataset(S, [[2, 0, 0, 0]])).column("Yhat").tolist() == [1]


def test_empty_and_deterministic(desk, desk_model):
    empty = Dataset(desk.schema, np.zeros((0, len(desk.schema.attributes)), dtype=int))
    assert predict(desk_model, empty).n_rows == 0
    a = predict(desk_model, desk.take(np.arange(1000)))
    b = predict(desk_model, desk.take(np.arange(1000)))
    assert a.equals(b)


def test_cardinality_mismatch_rejected():
    m = train(Dataset(S, [[0, 0, 0, 0], [1, 1, 1, 1]]))
    other = Schema((AttributeSpec("f", "feature", ("a", "b")), *S.attributes[1:]))
    with pytest.raises(DataError, match="cardinality"):
        predict(m, Dataset(other, [[0, 0, 0, 0]]))


def test_no_underflow_with_many_features(rng):
    feats = tuple(AttributeSpec(f"x{i}", "feature", tuple(map(str, range(256)))) for i in range(64))
    s = Schema(feats + (AttributeSpec("A", "protected", ("0", "1")), AttributeSpec("Y", "target", ("0", "1"))))
    d = Dataset(s, np.column_stack([rng.integers(0, 256, (400, 64)), rng.integers(0, 2, (400, 2))]))
    lp = train(d).log_posteriors(d)
    assert np.isfinite(lp).all()


def test_model_file_round_trip(tmp_path, desk, desk_model):
    save_model(desk_model, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    sample = desk.take(np.arange(2000))
    assert predict(back, sample).equals(predict(desk_model, sample))
