"""Seeded sweep harness: error of each audit mechanism against the reference.

One split and one model per sweep; the reference metrics are computed once
on the model-labeled test split. Every (mechanism, grid point, repetition)
cell draws its own sub-seed, so results do not depend on execution order
and serial and parallel runs give identical tables.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed
from .data import Dataset, split
from .metrics import METRICS, FairnessReport, absolute_errors
from .model import train
from .protocol import (AuditRequest, BlackBoxConfig, auditor_evaluate, blackbox_audit, platform_respond,
                       reference_report)

AXES = ("sample_size", "epsilon")
SWEEP_MECHANISMS = ("grr", "synth", "blackbox")
COLUMNS = ("mechanism", "axis", "value", "repetition", "metric", "estimate", "reference", "absolute_error")


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    grid: tuple[float, ...]
    repetitions: int = 10
    base_seed: int = 0
    mechanisms: tuple[str, ...] = SWEEP_MECHANISMS
    metrics: tuple[str, ...] = METRICS
    epsilon: float = 10.0  # held fixed on the sample_size axis
    n_prime: int = 5000  # held fixed on the epsilon axis
    epsilon_mode: str = "per-column"
    train_fraction: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if not self.grid or any(not v > 0 for v in self.grid):
            raise ValueError("grid must be nonempty with positive values")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        bad = set(self.mechanisms) - set(SWEEP_MECHANISMS)
        if bad:
            raise ValueError(f"unknown mechanism(s): {sorted(bad)}")
        bad = set(self.metrics) - set(METRICS)
        if bad:
            raise ValueError(f"unknown metric(s): {sorted(bad)}")


@dataclass(frozen=True)
class SweepRow:
    mechanism: str
    axis: str
    value: float
    repetition: int
    metric: str
    estimate: float
    reference: float
    absolute_error: float


@dataclass
class SweepResult:
    config: SweepConfig
    reference: FairnessReport
    rows: list[SweepRow] = field(default_factory=list)

    def mean_errors(self) -> dict[tuple[str, float, str], float]:
        """Mean absolute error per (mechanism, value, metric), ignoring undefined estimates."""
        groups = defaultdict(list)
        for r in self.rows:
            groups[(r.mechanism, r.value, r.metric)].append(r.absolute_error)
        return {k: float(np.nanmean(v)) if not all(math.isnan(x) for x in v) else math.nan
                for k, v in groups.items()}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in self.rows:
                w.writerow([r.mechanism, r.axis, _num(r.value), r.repetition, r.metric,
                            _num(r.estimate), _num(r.reference), _num(r.absolute_error)])


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _audit_once(task) -> FairnessReport:
    mechanism, value, seed, config, test, schema, model = task
    n_prime = int(value) if config.axis == "sample_size" else config.n_prime
    eps = float(value) if config.axis == "epsilon" else config.epsilon
    if mechanism == "blackbox":
        return blackbox_audit(BlackBoxConfig(n_prime, seed), schema, model)
    request = AuditRequest(n_prime=n_prime, protected_attribute=schema.protected.name, epsilon=eps,
                           mechanism=mechanism, epsilon_mode=config.epsilon_mode)
    return auditor_evaluate(platform_respond(request, test, model, seed=seed), request)


def run_sweep(dataset: Dataset, config: SweepConfig, model=None, jobs: int = 1) -> SweepResult:
    """Audit the platform once per (mechanism, grid value, repetition).

    ``dataset`` is the platform's full data; it is split once with
    ``config.base_seed`` and, unless ``model`` is given, a Naive Bayes model
    is trained on the train part. The test part is the audit dataset.
    """
    train_set, test = split(dataset, config.train_fraction, config.base_seed)
    if model is None:
        model = train(train_set)
    reference = reference_report(test, model)
    schema = dataset.schema

    keys, tasks = [], []
    for mech in config.mechanisms:
        mi = SWEEP_MECHANISMS.index(mech)
        for gi, value in enumerate(config.grid):
            for rep in range(config.repetitions):
                seed = derive_seed(config.base_seed, mi, gi, rep)
                keys.append((mech, value, rep))
                tasks.append((mech, value, seed, config, test, schema, model))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_audit_once, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        reports = [_audit_once(t) for t in tasks]

    result = SweepResult(config, reference)
    for (mech, value, rep), report in zip(keys, reports):
        errors = absolute_errors(report, reference)
        for metric in config.metrics:
            est, ref = report.get(metric), reference.get(metric)
            result.rows.append(SweepRow(mech, config.axis, value, rep, metric,
                                        math.nan if est is None else est,
                                        math.nan if ref is None else ref, errors[metric]))
    return result
