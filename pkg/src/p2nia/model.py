"""Categorical Naive Bayes platform classifier.

Stands in for the platform's proprietary model; the audit pipeline only
consumes the prediction column it writes.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import AttributeSpec, Dataset
from .errors import DataError

PREDICTION_NAME = "Yhat"


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    features: tuple[str, ...]
    cardinalities: tuple[int, ...]
    prior: np.ndarray  # P[Y=y]
    conditionals: tuple[np.ndarray, ...]  # per feature, shape (2, k): P[x=v | Y=y]
    target_labels: tuple[str, str] = ("0", "1")
    constant_class: int | None = None

    def log_posteriors(self, dataset: Dataset) -> np.ndarray:
        """Unnormalised log P[Y=y] + sum_i log P[x_i | Y=y], shape (n, 2)."""
        schema = dataset.schema
        for name, k in zip(self.features, self.cardinalities):
            if name not in schema:
                raise DataError(f"feature {name!r} missing from dataset")
            if schema[name].cardinality != k:
                raise DataError(f"feature {name!r} has cardinality {schema[name].cardinality}, "
                                f"model was trained with {k}")
        out = np.tile(np.log(self.prior), (dataset.n_rows, 1))
        for name, table in zip(self.features, self.conditionals):
            out += np.log(table)[:, dataset.column(name)].T
        return out

    def predict(self, dataset: Dataset) -> Dataset:
        return predict(self, dataset)

    def to_dict(self) -> dict:
        return {"features": list(self.features), "cardinalities": list(self.cardinalities),
                "prior": self.prior.tolist(), "conditionals": [c.tolist() for c in self.conditionals],
                "target_labels": list(self.target_labels), "constant_class": self.constant_class}

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        return cls(tuple(d["features"]), tuple(d["cardinalities"]), np.asarray(d["prior"], dtype=float),
                   tuple(np.asarray(c, dtype=float) for c in d["conditionals"]),
                   tuple(d.get("target_labels", ("0", "1"))), d.get("constant_class"))


def train(dataset: Dataset, features: Sequence[str] | None = None) -> NaiveBayesModel:
    """Maximum-likelihood class prior and add-one-smoothed feature tables.

    ``features`` defaults to every feature column plus the protected attribute.
    """
    if dataset.n_rows == 0:
        raise DataError("cannot train on an empty dataset")
    schema = dataset.schema
    if features is None:
        features = [a.name for a in schema.attributes if a.role in ("feature", "protected")]
    features = tuple(features)
    y = dataset.column(schema.target.name)
    class_counts = np.bincount(y, minlength=2).astype(float)
    prior = class_counts / class_counts.sum()
    constant = None
    if (class_counts == 0).any():
        constant = int(np.argmax(class_counts))
        warnings.warn(f"training data has a single class; model always predicts {constant}", stacklevel=2)
    conditionals = []
    cards = []
    for name in features:
        k = schema[name].cardinality
        x = dataset.column(name)
        counts = np.zeros((2, k))
        np.add.at(counts, (y, x), 1.0)
        counts += 1.0
        conditionals.append(counts / counts.sum(axis=1, keepdims=True))
        cards.append(k)
    return NaiveBayesModel(features, tuple(cards), prior, tuple(conditionals),
                           tuple(schema.target.labels), constant)


def predict(model: NaiveBayesModel, dataset: Dataset) -> Dataset:
    """Write the prediction column (created if absent). Ties go to class 0."""
    spec = dataset.schema.prediction or AttributeSpec(PREDICTION_NAME, "prediction", model.target_labels)
    if model.constant_class is not None:
        yhat = np.full(dataset.n_rows, model.constant_class, dtype=np.int64)
    else:
        lp = model.log_posteriors(dataset)
        yhat = (lp[:, 1] > lp[:, 0]).astype(np.int64)
    return dataset.with_column(spec, yhat)


def save_model(model: NaiveBayesModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=1) + "\n")


def load_model(path) -> NaiveBayesModel:
    try:
        return NaiveBayesModel.from_dict(json.loads(Path(path).read_text()))
    except (json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"model file {path}: {exc}") from exc
