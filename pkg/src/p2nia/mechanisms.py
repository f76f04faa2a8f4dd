"""Differentially private primitives.

Generalized randomized response (GRR) per column with exact channel
matrices, inversion of the GRR channel on (A, Y, Y_hat) counts, Laplace
measurement of marginals, and a sequential-composition budget ledger.

``math.inf`` is accepted as an epsilon sentinel meaning "no noise": GRR keeps
every value and marginals are measured exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Dataset
from .errors import MechanismError
from .metrics import JointCounts

EPSILON_MODES = ("per-column", "total-split")


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if math.isnan(epsilon) or epsilon <= 0:
        raise MechanismError(f"epsilon must be > 0, got {epsilon!r}")
    return epsilon


def grr_flip_prob(epsilon: float, k: int) -> float:
    """Truth-retention probability e^eps / (e^eps + k - 1)."""
    epsilon = _check_epsilon(epsilon)
    if k < 2:
        raise MechanismError(f"GRR needs k >= 2, got {k}")
    # overflow-free form of the same expression
    return 1.0 / (1.0 + (k - 1) * math.exp(-epsilon))


def _grr_other_prob(epsilon: float, k: int) -> float:
    # 1 / (e^eps + k - 1), computed directly rather than as (1-p)/(k-1)
    return math.exp(-epsilon) / (1.0 + (k - 1) * math.exp(-epsilon))


@dataclass(frozen=True)
class GrrChannel:
    k: int
    epsilon: float

    def __post_init__(self):
        grr_flip_prob(self.epsilon, self.k)

    @property
    def p(self) -> float:
        return grr_flip_prob(self.epsilon, self.k)

    @property
    def q(self) -> float:
        """Probability of reporting one specific other value."""
        return _grr_other_prob(self.epsilon, self.k)

    @property
    def matrix(self) -> np.ndarray:
        """Row-stochastic ``M[true, reported]``."""
        m = np.full((self.k, self.k), self.q)
        np.fill_diagonal(m, self.p)
        return m

    def likelihood_ratio(self) -> float:
        """max over (i, j, out) of M[i, out] / M[j, out]."""
        m = self.matrix
        return float((m.max(axis=0) / m.min(axis=0)).max())

    def inverse(self) -> np.ndarray:
        """Closed-form inverse of ``matrix``: a*I + b*J."""
        p, q, k = self.p, self.q, self.k
        if math.isclose(p, 1.0 / k):
            raise MechanismError("GRR channel is singular (p = 1/k)")
        d = p - q
        inv = np.full((k, k), -q / (d * (d + k * q)))
        np.fill_diagonal(inv, 1.0 / d - q / (d * (d + k * q)))
        return inv


@dataclass(frozen=True)
class BudgetLedger:
    """Append-only record of (label, epsilon) under sequential composition."""

    entries: tuple[tuple[str, float], ...] = ()

    def spend(self, label: str, epsilon: float) -> "BudgetLedger":
        return BudgetLedger(self.entries + ((label, float(epsilon)),))

    def merge(self, other: "BudgetLedger") -> "BudgetLedger":
        return BudgetLedger(self.entries + other.entries)

    @property
    def total_epsilon(self) -> float:
        return math.fsum(e for _, e in self.entries)

    def to_list(self) -> list:
        return [[label, _enc_eps(e)] for label, e in self.entries]

    @classmethod
    def from_list(cls, items) -> "BudgetLedger":
        return cls(tuple((str(label), _dec_eps(e)) for label, e in items))


def _enc_eps(e: float):
    return "inf" if math.isinf(e) else e


def _dec_eps(e) -> float:
    return math.inf if e == "inf" else float(e)


def column_epsilons(n_columns: int, epsilon: float, mode: str = "per-column") -> list[float]:
    """Per-column budgets: ``epsilon`` each, or ``epsilon / n_columns`` each."""
    epsilon = _check_epsilon(epsilon)
    if mode == "per-column":
        return [epsilon] * n_columns
    if mode == "total-split":
        return [epsilon / n_columns] * n_columns
    raise MechanismError(f"unknown epsilon mode {mode!r}; expected one of {EPSILON_MODES}")


def grr_perturb(dataset: Dataset, epsilon: float, columns: Sequence[str] | None = None,
                seed: int = 0, mode: str = "per-column") -> tuple[Dataset, BudgetLedger]:
    """Independently randomize each selected column with GRR.

    A cell keeps its value with probability p(eps, k) and otherwise takes a
    uniformly drawn different code. Columns are processed in schema order
    from one generator seeded with ``seed``.
    """
    schema = dataset.schema
    columns = schema.names if columns is None else list(columns)
    idx = [schema.index(c) for c in columns]
    eps = column_epsilons(len(columns), epsilon, mode)
    rng = np.random.default_rng(seed)
    out = dataset.codes.copy()
    ledger = BudgetLedger()
    n = dataset.n_rows
    for j, name, e in sorted(zip(idx, columns, eps)):
        k = schema.attributes[j].cardinality
        p = grr_flip_prob(e, k)
        keep = rng.random(n) < p
        offset = rng.integers(1, k, size=n)
        out[:, j] = np.where(keep, out[:, j], (out[:, j] + offset) % k)
        ledger = ledger.spend(f"grr:{name}", e)
    return Dataset(schema, out), ledger


def tensor_channel(channels: Sequence[GrrChannel]) -> np.ndarray:
    """Kronecker product of per-attribute channel matrices (row = true cell)."""
    m = np.ones((1, 1))
    for ch in channels:
        m = np.kron(m, ch.matrix)
    return m


def grr_debias_counts(noisy: JointCounts, channels: Sequence[GrrChannel],
                      clamp: bool = True) -> JointCounts:
    """Invert the (A, Y, Y_hat) GRR channel on observed counts.

    ``channels`` are ordered (A, Y, Y_hat). With ``clamp``, negative cells are
    zeroed and the table rescaled to the observed total; a note is attached
    when that moved any cell by more than 1% of the total.
    """
    if len(channels) != 3:
        raise MechanismError("need exactly three channels (A, Y, Y_hat)")
    total = noisy.total
    if not total > 0:
        raise MechanismError("cannot debias an empty count table")
    inv = np.ones((1, 1))
    for ch in channels:
        inv = np.kron(inv, ch.inverse())
    # observed = K^T true  =>  true = (K^{-1})^T observed
    est = inv.T @ noisy.vector()
    if not clamp:
        return JointCounts.from_vector(est)
    fixed = np.clip(est, 0.0, None)
    if not fixed.sum() > 0:
        raise MechanismError("debiased table has no positive mass")
    fixed *= total / fixed.sum()
    notes = []
    shift = np.abs(fixed - est).max()
    if shift > 0.01 * total:
        msg = f"debiasing clamp moved a cell by {shift / total:.1%} of the total"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    return JointCounts.from_vector(fixed, notes)


@dataclass(frozen=True, eq=False)
class NoisyMarginal:
    attrs: tuple[str, ...]
    table: np.ndarray
    epsilon_spent: float
    noise: str = "laplace"

    def __post_init__(self):
        object.__setattr__(self, "attrs", tuple(self.attrs))
        t = np.array(self.table, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)


def exact_marginal(dataset: Dataset, attrs: Sequence[str]) -> np.ndarray:
    schema = dataset.schema
    shape = tuple(schema[a].cardinality for a in attrs)
    flat = np.ravel_multi_index(tuple(dataset.column(a) for a in attrs), shape) if dataset.n_rows \
        else np.zeros(0, dtype=np.int64)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape).astype(float)


def measure_marginal(dataset: Dataset, attrs: Sequence[str], epsilon: float,
                     seed: int = 0) -> NoisyMarginal:
    """Contingency counts plus i.i.d. Laplace(1/epsilon) noise per cell.

    Count queries have sensitivity 1 under add/remove-one-record neighbours.
    """
    epsilon = _check_epsilon(epsilon)
    attrs = tuple(attrs)
    if not attrs:
        raise MechanismError("marginal needs at least one attribute")
    for a in attrs:
        if a not in dataset.schema:
            raise MechanismError(f"unknown attribute {a!r}")
    table = exact_marginal(dataset, attrs)
    if math.isinf(epsilon):
        return NoisyMarginal(attrs, table, epsilon, "none")
    rng = np.random.default_rng(seed)
    return NoisyMarginal(attrs, table + rng.laplace(0.0, 1.0 / epsilon, size=table.shape), epsilon)


def project_nonnegative(m, target_total: float = 1.0) -> np.ndarray:
    """Clamp negative cells to zero and rescale to ``target_total``.

    Accepts a :class:`NoisyMarginal` or a bare array. Falls back to a uniform
    table (with a warning) when no cell is positive.
    """
    table = np.asarray(m.table if isinstance(m, NoisyMarginal) else m, dtype=float)
    if not target_total > 0:
        raise MechanismError("target_total must be > 0")
    t = np.clip(table, 0.0, None)
    s = t.sum()
    if not s > 0:
        warnings.warn("noisy marginal has no positive mass; using a uniform table", stacklevel=2)
        return np.full(table.shape, target_total / table.size)
    return t * (target_total / s)
