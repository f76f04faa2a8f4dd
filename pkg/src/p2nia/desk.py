"""Generated census-like dataset for desk-scale experiments.

Eight categorical features, a binary protected attribute ``sex`` (1 = female)
and a binary income target. Several features shift with ``sex`` and the
target's base rate depends on it directly, so a model trained on the data
shows clear demographic-parity and error-rate gaps.
"""

from __future__ import annotations

import numpy as np

from .data import AttributeSpec, Dataset, Schema

DESK_SCHEMA = Schema((
    AttributeSpec("age", "feature", ("17-25", "26-35", "36-45", "46-55", "56-65", "66+")),
    AttributeSpec("workclass", "feature", ("private", "self-emp", "government", "other")),
    AttributeSpec("education", "feature", ("no-hs", "hs-grad", "some-college", "bachelors", "advanced")),
    AttributeSpec("marital", "feature", ("never-married", "married", "divorced")),
    AttributeSpec("occupation", "feature", ("service", "clerical", "craft", "sales", "professional",
                                            "managerial")),
    AttributeSpec("hours", "feature", ("<30", "30-39", "40-49", "50+")),
    AttributeSpec("region", "feature", ("northeast", "midwest", "south", "west", "pacific")),
    AttributeSpec("capital", "feature", ("none", "low", "high")),
    AttributeSpec("sex", "protected", ("male", "female")),
    AttributeSpec("income", "target", ("<=50K", ">50K")),
))


def _draw(rng, probs: np.ndarray) -> np.ndarray:
    # probs: (n, k) row-stochastic
    u = rng.random(probs.shape[0])[:, None]
    return (u > np.cumsum(probs, axis=1)).sum(axis=1).clip(max=probs.shape[1] - 1)


def _conditional(rng, group: np.ndarray, table) -> np.ndarray:
    table = np.asarray(table, dtype=float)
    table = table / table.sum(axis=1, keepdims=True)
    return _draw(rng, table[group])


def make_desk_data(n: int = 25_000, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    sex = (rng.random(n) < 0.45).astype(np.int64)
    age = _conditional(rng, np.zeros(n, dtype=np.int64), [[16, 24, 23, 19, 12, 6]])
    workclass = _conditional(rng, sex, [[68, 14, 12, 6], [74, 7, 15, 4]])
    education = _conditional(rng, np.minimum(age, 2), [[30, 40, 22, 6, 2], [10, 32, 25, 22, 11],
                                                       [12, 33, 24, 19, 12]])
    marital = _conditional(rng, sex * 2 + (age > 0), [[90, 8, 2], [30, 58, 12], [88, 9, 3],
                                                      [32, 46, 22]])
    occupation = _conditional(rng, sex, [[15, 10, 24, 14, 20, 17], [24, 26, 6, 14, 18, 12]])
    hours = _conditional(rng, sex, [[8, 13, 52, 27], [20, 20, 46, 14]])
    region = _conditional(rng, np.zeros(n, dtype=np.int64), [[18, 21, 35, 14, 12]])
    capital = _conditional(rng, np.zeros(n, dtype=np.int64), [[86, 9, 5]])

    logit = (-3.2
             + np.array([-1.6, -0.4, 0.3, 0.6, 0.5, -0.2])[age]
             + np.array([0.0, 0.4, 0.2, -0.3])[workclass]
             + np.array([-1.0, -0.3, 0.2, 1.0, 1.6])[education]
             + np.array([-0.6, 1.0, -0.2])[marital]
             + np.array([-0.8, -0.3, 0.1, 0.2, 0.9, 1.1])[occupation]
             + np.array([-0.9, -0.3, 0.2, 0.7])[hours]
             + np.array([0.2, 0.0, -0.2, 0.1, 0.3])[region]
             + np.array([0.0, 0.8, 2.2])[capital]
             - 0.35 * sex
             + 2.2)
    income = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(np.int64)
    codes = np.column_stack([age, workclass, education, marital, occupation, hours, region, capital,
                             sex, income])
    return Dataset(DESK_SCHEMA, codes)
