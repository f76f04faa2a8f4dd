"""Group-fairness metrics on (A, Y, Y_hat) contingency counts.

All three metrics are functions of the 2x2x2 joint table only, so the same
code serves empirical counts, debiased GRR counts and synthetic releases.
Counts are real-valued for that reason.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DataError, UndefinedMetricError

METRICS = ("demographic_parity", "equalized_odds", "equality_of_opportunity")
NEEDS_GROUND_TRUTH = ("equalized_odds", "equality_of_opportunity")
ESTIMATORS = ("empirical", "grr_debiased", "synthetic", "blackbox")


@dataclass(frozen=True, eq=False)
class JointCounts:
    """Counts indexed ``[a, y, y_hat]``."""

    counts: np.ndarray
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        c = np.array(self.counts, dtype=float)
        if c.shape != (2, 2, 2):
            raise DataError(f"joint counts must be 2x2x2, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def vector(self) -> np.ndarray:
        return self.counts.reshape(-1).copy()

    @classmethod
    def from_vector(cls, v, notes=()) -> "JointCounts":
        return cls(np.asarray(v, dtype=float).reshape(2, 2, 2), tuple(notes))


def joint_counts(dataset: Dataset) -> JointCounts:
    s = dataset.schema
    if s.prediction is None:
        raise DataError("dataset has no prediction column; label it first")
    a = dataset.column(s.protected.name)
    y = dataset.column(s.target.name)
    yh = dataset.column(s.prediction.name)
    flat = np.bincount(4 * a + 2 * y + yh, minlength=8)
    return JointCounts(flat.reshape(2, 2, 2).astype(float))


def _rate(cells: np.ndarray, what: str) -> float:
    # cells: counts over y_hat in {0, 1}
    mass = cells.sum()
    if not mass > 0:
        raise UndefinedMetricError(f"undefined conditional: empty stratum {what}")
    return float(cells[1] / mass)


def demographic_parity(c: JointCounts) -> float:
    """|P[Y_hat=1 | A=1] - P[Y_hat=1 | A=0]|."""
    by_group = c.counts.sum(axis=1)
    return abs(_rate(by_group[1], "A=1") - _rate(by_group[0], "A=0"))


def _label_gap(c: JointCounts, y: int) -> float:
    return abs(_rate(c.counts[0, y], f"(Y={y}, A=0)") - _rate(c.counts[1, y], f"(Y={y}, A=1)"))


def equalized_odds(c: JointCounts) -> float:
    """Max over y of the between-group gap in P[Y_hat=1 | Y=y, A=a].

    A label value absent from both groups imposes no constraint and is
    skipped (this is what makes the metric coincide with demographic parity
    when Y is constant). A label present in only one group is an error.
    """
    gaps = []
    for y in (0, 1):
        mass = c.counts[:, y].sum(axis=1)
        if not (mass > 0).any():
            continue
        gaps.append(_label_gap(c, y))
    if not gaps:
        raise UndefinedMetricError("undefined conditional: no label value observed")
    return max(gaps)


def equality_of_opportunity(c: JointCounts) -> float:
    """True-positive-rate gap between the groups."""
    return _label_gap(c, 1)


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DataError(f"shape mismatch: {p.shape} vs {q.shape}")
    for name, t in (("p", p), ("q", q)):
        if abs(t.sum() - 1.0) > 1e-9:
            raise DataError(f"{name} does not sum to 1 (sum={t.sum()!r})")
    return 0.5 * float(np.abs(p - q).sum())


@dataclass
class FairnessReport:
    demographic_parity: float | None
    equalized_odds: float | None
    equality_of_opportunity: float | None
    estimator: str
    n_effective: int
    notes: list[str] = field(default_factory=list)

    def get(self, metric: str) -> float | None:
        return getattr(self, metric)

    def to_text(self) -> str:
        lines = [f"estimator={self.estimator}", f"n_effective={self.n_effective}"]
        for m in METRICS:
            v = self.get(m)
            lines.append(f"{m}={'NA' if v is None else repr(float(v))}")
        lines += [f"warning={n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FairnessReport":
        kv: dict = {}
        notes = []
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            if key == "warning":
                notes.append(value)
            else:
                kv[key] = value
        vals = {m: (None if kv.get(m, "NA") == "NA" else float(kv[m])) for m in METRICS}
        return cls(estimator=kv["estimator"], n_effective=int(kv["n_effective"]), notes=notes, **vals)


def fairness_report(c: JointCounts, estimator: str = "empirical", n_effective: int | None = None,
                    has_ground_truth: bool = True) -> FairnessReport:
    """Bundle the three metrics; undefined ones become ``None`` with a note."""
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator tag {estimator!r}")
    if not c.total > 0:
        raise UndefinedMetricError("cannot report on an empty count table")
    notes = list(c.notes)
    values = {}
    funcs = {"demographic_parity": demographic_parity, "equalized_odds": equalized_odds,
             "equality_of_opportunity": equality_of_opportunity}
    for name, fn in funcs.items():
        if name in NEEDS_GROUND_TRUTH and not has_ground_truth:
            values[name] = None
            notes.append(f"{name}: requires ground truth")
            continue
        try:
            values[name] = fn(c)
        except UndefinedMetricError as exc:
            values[name] = None
            notes.append(f"{name}: {exc}")
    n = int(round(c.total)) if n_effective is None else int(n_effective)
    return FairnessReport(estimator=estimator, n_effective=n, notes=notes, **values)


def absolute_errors(estimate: FairnessReport, reference: FairnessReport) -> dict[str, float]:
    """Per-metric |estimate - reference|; NaN when either side is undefined."""
    out = {}
    for m in METRICS:
        e, r = estimate.get(m), reference.get(m)
        out[m] = math.nan if e is None or r is None else abs(e - r)
    return out
