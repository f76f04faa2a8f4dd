"""Select-measure-generate synthesis that preserves the (A, Y, Y_hat) joint.

Simplified pipeline: Laplace-noised marginals, projection onto the simplex,
and direct sampling. The 3-way fairness marginal drives (A, Y, Y_hat); every
feature is drawn independently from a 1-way distribution recovered from the
noisy feature-pair tables it appears in.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import derive_seed
from .data import Dataset, Schema
from .errors import DataError, MechanismError
from .mechanisms import BudgetLedger, _check_epsilon, measure_marginal, project_nonnegative


def fairness_marginals(schema: Schema) -> list[tuple[str, ...]]:
    if schema.prediction is None:
        raise DataError("synthesis needs a labeled dataset (prediction column)")
    a, y, yh = schema.protected.name, schema.target.name, schema.prediction.name
    return [(a, y), (a, yh), (y, yh), (a, y, yh)]


@dataclass(frozen=True)
class MarginalPlan:
    fairness_marginals: tuple[tuple[str, ...], ...]
    feature_marginals: tuple[tuple[str, str], ...]
    fairness_share: float = 0.5

    @property
    def marginals(self) -> list[tuple[str, ...]]:
        return [*self.fairness_marginals, *self.feature_marginals]

    def budget_fractions(self) -> list[float]:
        """Fraction of the total epsilon given to each entry of :attr:`marginals`."""
        if not self.feature_marginals:
            return [1.0 / len(self.fairness_marginals)] * len(self.fairness_marginals)
        f = self.fairness_share / len(self.fairness_marginals)
        g = (1.0 - self.fairness_share) / len(self.feature_marginals)
        return [f] * len(self.fairness_marginals) + [g] * len(self.feature_marginals)

    def to_dict(self) -> dict:
        return {"fairness_marginals": [list(m) for m in self.fairness_marginals],
                "feature_marginals": [list(m) for m in self.feature_marginals],
                "fairness_share": self.fairness_share}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalPlan":
        return cls(tuple(tuple(m) for m in d["fairness_marginals"]),
                   tuple(tuple(m) for m in d["feature_marginals"]),
                   float(d["fairness_share"]))


def plan_marginals(schema: Schema, seed: int = 0, n_pairs: int = 12,
                   fairness_share: float = 0.5) -> MarginalPlan:
    """Four fairness marginals plus ``n_pairs`` distinct random feature pairs."""
    if not 0 < fairness_share <= 1:
        raise MechanismError("fairness_share must lie in (0, 1]")
    names = [a.name for a in schema.features]
    pairs = list(itertools.combinations(names, 2))
    if len(pairs) < n_pairs:
        warnings.warn(f"only {len(pairs)} feature pairs available (wanted {n_pairs})", stacklevel=2)
        chosen = pairs
    else:
        rng = np.random.default_rng(seed)
        picks = np.sort(rng.choice(len(pairs), size=n_pairs, replace=False))
        chosen = [pairs[i] for i in picks]
    return MarginalPlan(tuple(fairness_marginals(schema)), tuple(chosen), fairness_share)


@dataclass(frozen=True, eq=False)
class GenerativeModel:
    schema: Schema
    joint: np.ndarray  # P[a, y, y_hat]
    feature_dists: dict[str, np.ndarray]
    n_source: int
    plan: MarginalPlan
    pair_tables: dict[tuple[str, ...], np.ndarray] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "n_source": self.n_source,
            "plan": self.plan.to_dict(),
            "joint": self.joint.reshape(-1).tolist(),
            "feature_dists": {k: v.tolist() for k, v in self.feature_dists.items()},
            "marginals": [{"attrs": list(k), "table": v.reshape(-1).tolist()}
                          for k, v in self.pair_tables.items()],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerativeModel":
        schema = Schema.from_dict(d["schema"])
        tables = {}
        for m in d.get("marginals", []):
            shape = tuple(schema[a].cardinality for a in m["attrs"])
            tables[tuple(m["attrs"])] = np.asarray(m["table"], dtype=float).reshape(shape)
        return cls(schema, np.asarray(d["joint"], dtype=float).reshape(2, 2, 2),
                   {k: np.asarray(v, dtype=float) for k, v in d["feature_dists"].items()},
                   int(d["n_source"]), MarginalPlan.from_dict(d["plan"]), tables, tuple(d.get("notes", ())))


def save_model(model: GenerativeModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=1, sort_keys=True) + "\n")


def load_model(path) -> GenerativeModel:
    return GenerativeModel.from_dict(json.loads(Path(path).read_text()))


def fit(dataset: Dataset, plan: MarginalPlan, epsilon: float,
        seed: int = 0) -> tuple[GenerativeModel, BudgetLedger]:
    """Measure every planned marginal with its budget share and build the sampler."""
    epsilon = _check_epsilon(epsilon)
    schema = dataset.schema
    a, y, yh = schema.protected.name, schema.target.name, schema.prediction.name
    ledger = BudgetLedger()
    measured = {}
    for i, (attrs, frac) in enumerate(zip(plan.marginals, plan.budget_fractions())):
        e = epsilon * frac
        m = measure_marginal(dataset, attrs, e, seed=derive_seed(seed, i))
        ledger = ledger.spend("marginal:" + ",".join(attrs), e)
        measured[attrs] = project_nonnegative(m, 1.0)

    three_way = measured[(a, y, yh)]
    notes = []
    dists: dict[str, list[np.ndarray]] = {f.name: [] for f in schema.features}
    for pair in plan.feature_marginals:
        t = measured[pair]
        dists[pair[0]].append(t.sum(axis=1))
        dists[pair[1]].append(t.sum(axis=0))
    feature_dists = {}
    for name, parts in dists.items():
        if parts:
            d = np.mean(parts, axis=0)
            feature_dists[name] = d / d.sum()
        else:
            k = schema[name].cardinality
            feature_dists[name] = np.full(k, 1.0 / k)
            notes.append(f"feature {name} not covered by any measured pair; sampled uniformly")
    for n in notes:
        warnings.warn(n, stacklevel=2)
    model = GenerativeModel(schema, three_way, feature_dists, dataset.n_rows, plan, measured, tuple(notes))
    return model, ledger


def generate(model: GenerativeModel, n_prime: int, seed: int = 0) -> Dataset:
    """Draw ``n_prime`` i.i.d. rows from the fitted model."""
    if n_prime < 1:
        raise MechanismError("n_prime must be >= 1")
    schema = model.schema
    rng = np.random.default_rng(seed)
    codes = np.zeros((n_prime, len(schema.attributes)), dtype=np.int64)
    cells = rng.choice(8, size=n_prime, p=model.joint.reshape(-1))
    a, y, yh = np.unravel_index(cells, (2, 2, 2))
    codes[:, schema.index(schema.protected.name)] = a
    codes[:, schema.index(schema.target.name)] = y
    codes[:, schema.index(schema.prediction.name)] = yh
    for f in schema.features:
        p = model.feature_dists[f.name]
        codes[:, schema.index(f.name)] = rng.choice(len(p), size=n_prime, p=p)
    return Dataset(schema, codes)
