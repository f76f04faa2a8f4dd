"""The two-party audit exchange and the black-box baseline.

Steps 1-6 of a session:

1. the auditor sends an :class:`AuditRequest` (n', protected attribute,
   metrics, mechanism, epsilon);
2. the platform labels its audit dataset with its model;
3-4. it privatizes the labeled set with GRR or fits and samples the
   marginal synthesizer;
5. it sends back an :class:`AuditRelease` carrying everything needed to
   debias;
6. the auditor computes the metrics from the release alone.

Requests and releases round-trip through plain files (a key=value request,
a CSV plus a JSON metadata document for the release), which is the whole
wire protocol.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import synth
from ._rng import derive_seed
from .data import Dataset, Schema, ingest_csv, write_csv
from .errors import DataError, MechanismError, ProtocolError
from .mechanisms import (EPSILON_MODES, BudgetLedger, GrrChannel, _dec_eps, _enc_eps, grr_debias_counts,
                         grr_flip_prob, grr_perturb)
from .metrics import METRICS, NEEDS_GROUND_TRUTH, FairnessReport, fairness_report, joint_counts

MECHANISMS = ("grr", "synth")


@dataclass(frozen=True)
class AuditRequest:
    n_prime: int
    protected_attribute: str
    epsilon: float
    mechanism: str = "grr"
    requested_metrics: tuple[str, ...] = METRICS
    epsilon_mode: str = "per-column"

    def __post_init__(self):
        object.__setattr__(self, "requested_metrics", tuple(self.requested_metrics))
        if self.n_prime < 1:
            raise ProtocolError("n_prime must be >= 1")
        if self.mechanism not in MECHANISMS:
            raise ProtocolError(f"unknown mechanism {self.mechanism!r}")
        if self.epsilon_mode not in EPSILON_MODES:
            raise ProtocolError(f"unknown epsilon mode {self.epsilon_mode!r}")
        unknown = set(self.requested_metrics) - set(METRICS)
        if unknown:
            raise ProtocolError(f"unknown metric(s): {', '.join(sorted(unknown))}")

    @property
    def needs_ground_truth(self) -> bool:
        return any(m in NEEDS_GROUND_TRUTH for m in self.requested_metrics)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in [
            ("n_prime", self.n_prime), ("protected_attribute", self.protected_attribute),
            ("epsilon", _enc_eps(self.epsilon)), ("epsilon_mode", self.epsilon_mode),
            ("mechanism", self.mechanism), ("requested_metrics", ",".join(self.requested_metrics)),
        ])

    @classmethod
    def from_text(cls, text: str) -> "AuditRequest":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
        try:
            return cls(n_prime=int(kv["n_prime"]), protected_attribute=kv["protected_attribute"],
                       epsilon=_dec_eps(kv["epsilon"]), mechanism=kv.get("mechanism", "grr"),
                       requested_metrics=tuple(m for m in kv.get("requested_metrics", ",".join(METRICS))
                                               .split(",") if m),
                       epsilon_mode=kv.get("epsilon_mode", "per-column"))
        except (KeyError, ValueError) as exc:
            raise ProtocolError(f"malformed request: {exc}") from exc


def save_request(request: AuditRequest, path) -> None:
    Path(path).write_text(request.to_text())


def load_request(path) -> AuditRequest:
    return AuditRequest.from_text(Path(path).read_text())


def seed_commitment(seed: int) -> str:
    return hashlib.sha256(f"p2nia-seed:{int(seed)}".encode()).hexdigest()


@dataclass(eq=False)
class AuditRelease:
    dataset: Dataset
    mechanism: str
    ledger: BudgetLedger
    channels: dict[str, dict] = field(default_factory=dict)  # grr: name -> {epsilon, k, p}
    plan: dict | None = None  # synth: plan summary and budget split
    platform_id: str = "platform"
    seed_hash: str = ""
    warnings: list[str] = field(default_factory=list)

    def metadata(self) -> dict:
        meta = {
            "mechanism": self.mechanism,
            "schema": self.dataset.schema.to_dict(),
            "n_rows": self.dataset.n_rows,
            "ledger": {"entries": self.ledger.to_list(), "total_epsilon": _enc_eps(self.ledger.total_epsilon)},
            "provenance": {"platform_id": self.platform_id, "seed_sha256": self.seed_hash},
            "warnings": list(self.warnings),
        }
        if self.channels:
            meta["channels"] = {k: {"epsilon": _enc_eps(v["epsilon"]), "k": v["k"], "p": v["p"]}
                                for k, v in self.channels.items()}
        if self.plan is not None:
            meta["plan"] = self.plan
        return meta

    def channel(self, name: str) -> GrrChannel:
        try:
            c = self.channels[name]
        except KeyError:
            raise MechanismError(f"release lacks GRR channel metadata for column {name!r}") from None
        return GrrChannel(int(c["k"]), float(c["epsilon"]))


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta.json")


def save_release(release: AuditRelease, csv_path) -> None:
    """Write ``<csv_path>`` and ``<csv_path>.meta.json``."""
    write_csv(release.dataset, csv_path)
    meta_path(csv_path).write_text(json.dumps(release.metadata(), indent=1, sort_keys=True) + "\n")


def load_release(csv_path) -> AuditRelease:
    try:
        meta = json.loads(meta_path(csv_path).read_text())
    except FileNotFoundError:
        raise DataError(f"release metadata {meta_path(csv_path)} not found") from None
    schema = Schema.from_dict(meta["schema"])
    dataset = ingest_csv(csv_path, schema)
    channels = {k: {"epsilon": _dec_eps(v["epsilon"]), "k": int(v["k"]), "p": float(v["p"])}
                for k, v in meta.get("channels", {}).items()}
    return AuditRelease(dataset=dataset, mechanism=meta["mechanism"],
                        ledger=BudgetLedger.from_list(meta["ledger"]["entries"]), channels=channels,
                        plan=meta.get("plan"), platform_id=meta["provenance"]["platform_id"],
                        seed_hash=meta["provenance"]["seed_sha256"], warnings=list(meta.get("warnings", [])))


def expected_total_epsilon(request: AuditRequest, n_columns: int) -> float:
    """Ledger total a compliant release must show."""
    if request.mechanism == "grr" and request.epsilon_mode == "per-column":
        return request.epsilon * n_columns
    return request.epsilon


def platform_respond(request: AuditRequest, audit_data: Dataset, model, seed: int = 0,
                     platform_id: str = "platform") -> AuditRelease:
    """Steps 2-5: label, privatize, and package the release.

    ``model`` is anything with ``predict(dataset) -> Dataset``.
    """
    if not request.epsilon > 0:
        raise ProtocolError(f"rejected: epsilon must be > 0 (got {request.epsilon})")
    schema = audit_data.schema
    if request.protected_attribute not in schema or schema.protected.name != request.protected_attribute:
        raise ProtocolError(f"rejected: {request.protected_attribute!r} is not the protected attribute")
    if audit_data.n_rows == 0:
        raise ProtocolError("rejected: audit dataset is empty")
    labeled = model.predict(audit_data)
    notes: list[str] = []

    if request.mechanism == "grr":
        source = labeled
        if request.n_prime < labeled.n_rows:
            rows = np.random.default_rng(derive_seed(seed, 0)).choice(labeled.n_rows, request.n_prime,
                                                                      replace=False)
            source = labeled.take(np.sort(rows))
        elif request.n_prime > labeled.n_rows:
            msg = f"n_prime={request.n_prime} capped at audit-set size {labeled.n_rows}"
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)
        released, ledger = grr_perturb(source, request.epsilon, seed=derive_seed(seed, 1),
                                       mode=request.epsilon_mode)
        channels = {}
        for label, eps in ledger.entries:
            name = label.split(":", 1)[1]
            k = released.schema[name].cardinality
            channels[name] = {"epsilon": eps, "k": k, "p": grr_flip_prob(eps, k)}
        return AuditRelease(released, "grr", ledger, channels=channels, platform_id=platform_id,
                            seed_hash=seed_commitment(seed), warnings=notes)

    plan = synth.plan_marginals(labeled.schema, seed=derive_seed(seed, 2))
    gen, ledger = synth.fit(labeled, plan, request.epsilon, seed=derive_seed(seed, 3))
    released = synth.generate(gen, request.n_prime, seed=derive_seed(seed, 4))
    summary = plan.to_dict()
    summary["budget_fractions"] = plan.budget_fractions()
    return AuditRelease(released, "synth", ledger, plan=summary, platform_id=platform_id,
                        seed_hash=seed_commitment(seed), warnings=notes + list(gen.notes))


def auditor_evaluate(release: AuditRelease, request: AuditRequest | None = None) -> FairnessReport:
    """Step 6. Pure post-processing of the release; the ledger is not touched."""
    schema = release.dataset.schema
    if schema.prediction is None:
        raise DataError("release has no prediction column")
    counts = joint_counts(release.dataset)
    n = release.dataset.n_rows
    if release.mechanism == "grr":
        channels = [release.channel(a.name) for a in (schema.protected, schema.target, schema.prediction)]
        counts = grr_debias_counts(counts, channels)
        report = fairness_report(counts, "grr_debiased", n_effective=n)
    elif release.mechanism == "synth":
        report = fairness_report(counts, "synthetic", n_effective=n)
    else:
        raise MechanismError(f"unknown release mechanism {release.mechanism!r}")
    if request is not None:
        for m in METRICS:
            if m not in request.requested_metrics:
                setattr(report, m, None)
    report.notes = list(release.warnings) + report.notes
    return report


@dataclass(frozen=True)
class BlackBoxConfig:
    query_count: int
    seed: int = 0

    def __post_init__(self):
        if self.query_count < 1:
            raise ProtocolError("query_count must be >= 1")


def blackbox_audit(config: BlackBoxConfig, schema: Schema, model) -> FairnessReport:
    """Uniform queries over every attribute (target included); the model supplies Y_hat."""
    rng = np.random.default_rng(config.seed)
    attrs = [a for a in schema.attributes if a.role != "prediction"]
    codes = np.column_stack([rng.integers(0, a.cardinality, size=config.query_count) for a in attrs])
    queries = Dataset(Schema(tuple(attrs)), codes)
    labeled = model.predict(queries)
    return fairness_report(joint_counts(labeled), "blackbox", n_effective=config.query_count)


def reference_report(test_set: Dataset, model) -> FairnessReport:
    """Metrics on the model-labeled test set: the value the auditor is after."""
    if test_set.n_rows == 0:
        raise DataError("reference needs a nonempty test set")
    return fairness_report(joint_counts(model.predict(test_set)), "empirical")


class _CountingModel:
    def __init__(self, model):
        self._model = model
        self.calls = 0

    def predict(self, dataset):
        self.calls += 1
        return self._model.predict(dataset)


@dataclass
class SessionTranscript:
    request: AuditRequest
    release: AuditRelease
    report: FairnessReport
    messages: list[str]
    platform_model_calls: int
    auditor_model_calls: int
    ledger_before_audit: float
    ledger_after_audit: float


def run_session(request: AuditRequest, audit_data: Dataset, model, seed: int = 0,
                via_files: str | Path | None = None) -> SessionTranscript:
    """One complete request/release exchange.

    With ``via_files`` (a directory) the request and release are written and
    re-read from disk between the parties, exercising the wire format.
    """
    messages = ["request"]
    if via_files is not None:
        d = Path(via_files)
        save_request(request, d / "request.txt")
        request = load_request(d / "request.txt")
    counted = _CountingModel(model)
    release = platform_respond(request, audit_data, counted, seed=seed)
    platform_calls = counted.calls
    messages.append("release")
    if via_files is not None:
        save_release(release, d / "release.csv")
        release = load_release(d / "release.csv")
    before = release.ledger.total_epsilon
    report = auditor_evaluate(release, request)
    return SessionTranscript(request, release, report, messages, platform_calls,
                             counted.calls - platform_calls, before, release.ledger.total_epsilon)
