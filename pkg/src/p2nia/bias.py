"""Worst-case population-bias construction for black-box audits.

Inputs are x = (a, b, c) with a, b binary and c ~ U(0, 1) independent of
(a, b). Under the platform distribution D, b is always 0; under the
auditor's prior D' b = 1 with probability alpha. The model

    M(x) = (1 - b) * [c > 1/2] + b * a

is fair whenever b = 0 and maximally unfair whenever b = 1, so the
demographic-parity estimate under D' is off by exactly alpha while
TV(D, D') = alpha. With Y fixed to 1 all three group metrics coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .data import AttributeSpec, Dataset, Schema
from .errors import DataError
from .metrics import demographic_parity, joint_counts, tv_distance

WORLD_SCHEMA = Schema((
    AttributeSpec("a", "protected", ("0", "1")),
    AttributeSpec("b", "feature", ("0", "1")),
    AttributeSpec("c", "feature", ("c<=1/2", "c>1/2")),
    AttributeSpec("Y", "target", ("0", "1")),
    AttributeSpec("Yhat", "prediction", ("0", "1")),
))


def _masses(alpha) -> np.ndarray:
    # indexed [a, b]
    return np.array([[(1 - alpha) / 2, alpha / 2],
                     [(1 - alpha) / 2, alpha / 2]], dtype=object)


@dataclass(frozen=True)
class TheoremWorld:
    alpha: float

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise DataError("alpha must lie in [0, 1]")

    def table(self, which: str) -> np.ndarray:
        """P[a, b] under ``"D"`` or ``"Dprime"``."""
        if which == "D":
            return _masses(0.0).astype(float)
        if which == "Dprime":
            return _masses(self.alpha).astype(float)
        raise ValueError(f"which must be 'D' or 'Dprime', got {which!r}")

    def tv(self) -> float:
        return tv_distance(self.table("D"), self.table("Dprime"))


class ConstructionModel:
    """M(x) = (1 - b)[c > 1/2] + b*a as a platform model."""

    def predict(self, dataset: Dataset) -> Dataset:
        b = dataset.column("b")
        c = dataset.column("c")
        a = dataset.column(dataset.schema.protected.name)
        spec = dataset.schema.prediction or WORLD_SCHEMA.prediction
        return dataset.with_column(spec, (1 - b) * c + b * a)


def _dp_closed_form(alpha: Fraction) -> Fraction:
    masses = _masses(alpha)
    half = Fraction(1, 2)
    rates = []
    for a in (0, 1):
        group = masses[a, 0] + masses[a, 1]
        p_b1 = masses[a, 1] / group
        # P[M=1 | a] = P[b=0|a] P[c>1/2] + P[b=1|a] * a
        rates.append((1 - p_b1) * half + p_b1 * a)
    return abs(rates[1] - rates[0])


def analytic_gap(world: TheoremWorld) -> tuple[float, float]:
    """Exact (mu_D, mu_D') for demographic parity, evaluated in rationals."""
    return float(_dp_closed_form(Fraction(0))), float(_dp_closed_form(Fraction(world.alpha)))


def sample_world(world: TheoremWorld, which: str, n: int, seed: int = 0) -> Dataset:
    """``n`` i.i.d. rows (a, b, c-bin, Y=1, Yhat=M(x)).

    Sampling is by inverse CDF on shared uniforms, so runs that differ only in
    alpha are coupled (used for monotone sweeps).
    """
    if n < 1:
        raise DataError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u_cell, u_c = rng.random(n), rng.random(n)
    probs = world.table(which)
    order = [(1, 1), (0, 1), (1, 0), (0, 0)]
    cdf = np.cumsum([probs[a, b] for a, b in order])
    cell = np.minimum(np.searchsorted(cdf, u_cell, side="right"), 3)
    ab = np.array(order)[cell]
    codes = np.zeros((n, 5), dtype=np.int64)
    codes[:, 0] = ab[:, 0]
    codes[:, 1] = ab[:, 1]
    codes[:, 2] = (u_c > 0.5).astype(np.int64)
    codes[:, 3] = 1
    partial = Dataset(WORLD_SCHEMA, codes)
    return ConstructionModel().predict(partial)


def empirical_ab_table(dataset: Dataset) -> np.ndarray:
    t = np.zeros((2, 2))
    np.add.at(t, (dataset.column("a"), dataset.column("b")), 1.0)
    return t / t.sum()


def shift_demo(alpha_grid, n: int = 200_000, seed: int = 0) -> list[dict]:
    """Audit M under D'(alpha) while the truth is under D, for each alpha.

    Returns rows with keys alpha, analytic_gap, empirical_error, n. Both
    samples share ``seed``, so at alpha=0 they coincide and the error is 0.
    """
    rows = []
    truth = demographic_parity(joint_counts(sample_world(TheoremWorld(0.0), "D", n, seed)))
    for alpha in alpha_grid:
        world = TheoremWorld(float(alpha))
        mu_d, mu_dp = analytic_gap(world)
        est = demographic_parity(joint_counts(sample_world(world, "Dprime", n, seed)))
        rows.append({"alpha": float(alpha), "analytic_gap": abs(mu_dp - mu_d),
                     "empirical_error": abs(est - truth), "n": n})
    return rows
