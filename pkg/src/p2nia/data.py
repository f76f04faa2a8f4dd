"""Schema-aware categorical datasets.

Every attribute is stored as dense integer codes ``0..k-1``; labels only
appear at the CSV boundary. Continuous columns are quantile-binned through a
:class:`BinningRule` attached to the attribute.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

ROLES = ("feature", "protected", "target", "prediction")
BINARY_ROLES = ("protected", "target", "prediction")


@dataclass(frozen=True)
class BinningRule:
    attribute: str
    cuts: tuple[float, ...]

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cuts)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DataError(f"binning cuts for {self.attribute!r} must be strictly increasing")
        object.__setattr__(self, "cuts", cuts)

    @property
    def n_bins(self) -> int:
        return len(self.cuts) + 1

    def apply(self, values) -> np.ndarray:
        # bin i holds cuts[i-1] < v <= cuts[i]
        return np.searchsorted(np.asarray(self.cuts), np.asarray(values, dtype=float), side="left")

    def labels(self) -> tuple[str, ...]:
        edges = [-math.inf, *self.cuts, math.inf]
        return tuple(f"({_fmt(lo)}, {_fmt(hi)}]" if hi != math.inf else f"({_fmt(lo)}, inf)"
                     for lo, hi in zip(edges, edges[1:]))


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:g}"


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    role: str
    labels: tuple[str, ...]
    binning: BinningRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(v) for v in self.labels))
        if self.role not in ROLES:
            raise DataError(f"attribute {self.name!r}: unknown role {self.role!r}")
        if len(self.labels) < 2:
            raise DataError(f"attribute {self.name!r}: cardinality must be >= 2")
        if len(set(self.labels)) != len(self.labels):
            raise DataError(f"attribute {self.name!r}: duplicate value labels")
        if self.role in BINARY_ROLES and len(self.labels) != 2:
            raise DataError(f"attribute {self.name!r} has role {self.role} and must be binary")
        if self.binning is not None and self.binning.n_bins != len(self.labels):
            raise DataError(f"attribute {self.name!r}: {self.binning.n_bins} bins but "
                            f"{len(self.labels)} labels")

    @property
    def cardinality(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Schema:
    """Ordered attribute list.

    Protected and target attributes are mandatory. The prediction attribute is
    optional so that unlabeled platform data can share the schema; it is added
    by :func:`p2nia.model.predict`.
    """

    attributes: tuple[AttributeSpec, ...]

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise DataError("attribute names must be unique")
        for role in BINARY_ROLES:
            count = sum(a.role == role for a in attrs)
            if count > 1:
                raise DataError(f"more than one attribute with role {role}")
            if count == 0 and role != "prediction":
                raise DataError(f"schema has no {role} attribute")

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise DataError(f"unknown attribute {name!r}")

    def __getitem__(self, name: str) -> AttributeSpec:
        return self.attributes[self.index(name)]

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def _by_role(self, role: str) -> AttributeSpec | None:
        for a in self.attributes:
            if a.role == role:
                return a
        return None

    @property
    def protected(self) -> AttributeSpec:
        return self._by_role("protected")

    @property
    def target(self) -> AttributeSpec:
        return self._by_role("target")

    @property
    def prediction(self) -> AttributeSpec | None:
        return self._by_role("prediction")

    @property
    def features(self) -> list[AttributeSpec]:
        return [a for a in self.attributes if a.role == "feature"]

    @property
    def cardinalities(self) -> list[int]:
        return [a.cardinality for a in self.attributes]

    def to_dict(self) -> dict:
        out = []
        for a in self.attributes:
            d = {"name": a.name, "role": a.role, "labels": list(a.labels)}
            if a.binning is not None:
                d["cuts"] = list(a.binning.cuts)
            out.append(d)
        return {"attributes": out}

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        try:
            attrs = []
            for a in d["attributes"]:
                binning = BinningRule(a["name"], a["cuts"]) if a.get("cuts") is not None else None
                labels = a.get("labels")
                if labels is None:
                    if binning is None:
                        raise DataError(f"attribute {a['name']!r} needs labels or cuts")
                    labels = binning.labels()
                attrs.append(AttributeSpec(a["name"], a.get("role", "feature"), tuple(labels), binning))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed schema: {exc}") from exc
        return cls(tuple(attrs))


def load_schema(path) -> Schema:
    try:
        return Schema.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise DataError(f"schema {path}: invalid JSON ({exc})") from exc


def save_schema(schema: Schema, path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of integer codes, one column per schema attribute."""

    schema: Schema
    codes: np.ndarray = field(repr=False)

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int64, copy=True)
        m = len(self.schema.attributes)
        if codes.size == 0:
            codes = codes.reshape(0, m)
        if codes.ndim != 2 or codes.shape[1] != m:
            raise DataError(f"codes must have shape (n, {m}), got {codes.shape}")
        card = np.asarray(self.schema.cardinalities)
        bad = (codes < 0) | (codes >= card)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(f"code {codes[r, c]} out of range at row {r + 1}, "
                            f"column {self.schema.attributes[c].name}")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return self.codes.shape[0]

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.schema.index(name)]

    def take(self, rows) -> "Dataset":
        return Dataset(self.schema, self.codes[np.asarray(rows, dtype=np.int64)])

    def with_column(self, spec: AttributeSpec, values) -> "Dataset":
        """Replace the column named ``spec.name`` or append it if absent."""
        values = np.asarray(values, dtype=np.int64).reshape(-1)
        if values.shape[0] != self.n_rows:
            raise DataError("column length does not match row count")
        attrs = list(self.schema.attributes)
        if spec.name in self.schema:
            i = self.schema.index(spec.name)
            attrs[i] = spec
            codes = self.codes.copy()
            codes[:, i] = values
        else:
            attrs.append(spec)
            codes = np.column_stack([self.codes, values]) if self.n_rows else np.zeros((0, len(attrs)))
        return Dataset(Schema(tuple(attrs)), codes)

    def decode(self) -> list[list[str]]:
        labels = [a.labels for a in self.schema.attributes]
        return [[labels[j][c] for j, c in enumerate(row)] for row in self.codes.tolist()]

    def equals(self, other: "Dataset") -> bool:
        return self.schema == other.schema and np.array_equal(self.codes, other.codes)


def encode_rows(schema: Schema, rows: Iterable[Sequence[str]], header: Sequence[str]) -> Dataset:
    """Encode label rows whose columns are named by ``header``."""
    header = [h.strip() for h in header]
    missing = [n for n in schema.names if n not in header]
    if missing:
        raise DataError(f"missing column(s): {', '.join(missing)}")
    extra = [h for h in header if h not in schema]
    if extra:
        raise DataError(f"column(s) not in schema: {', '.join(extra)}")
    positions = [header.index(n) for n in schema.names]
    lookups = [{lab: i for i, lab in enumerate(a.labels)} for a in schema.attributes]
    out = []
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataError(f"row {r} has {len(row)} cells, expected {len(header)}")
        coded = []
        for attr, pos, lookup in zip(schema.attributes, positions, lookups):
            cell = row[pos].strip()
            if cell == "":
                raise DataError(f"missing value at row {r}, column {attr.name}")
            code = lookup.get(cell)
            if code is None and attr.binning is not None:
                try:
                    code = int(attr.binning.apply([float(cell)])[0])
                except ValueError:
                    code = None
            if code is None:
                raise DataError(f"unknown value {cell!r} at row {r}, column {attr.name}")
            coded.append(code)
        out.append(coded)
    return Dataset(schema, np.array(out, dtype=np.int64).reshape(len(out), len(schema.attributes)))


def ingest_csv(path, schema_path_or_schema) -> Dataset:
    """Read a header-ed CSV and encode it against a schema (path or object)."""
    schema = (schema_path_or_schema if isinstance(schema_path_or_schema, Schema)
              else load_schema(schema_path_or_schema))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return Dataset(schema, np.zeros((0, len(schema.attributes)), dtype=np.int64))
        return encode_rows(schema, reader, header)


def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.schema.names)
        writer.writerows(dataset.decode())


def discretize(raw_column, n_bins: int = 8, name: str = "") -> BinningRule:
    """Quantile binning rule with cuts at the empirical i/n_bins quantiles.

    Duplicate quantiles are collapsed and cuts at or above the maximum are
    dropped, so the effective bin count can be below ``n_bins``.
    """
    values = np.asarray(raw_column, dtype=float)
    if n_bins < 2:
        raise DataError("n_bins must be >= 2")
    if values.size == 0:
        raise DataError("cannot discretize an empty column")
    qs = np.quantile(values, np.arange(1, n_bins) / n_bins)
    cuts = sorted({float(q) for q in qs if q < values.max()})
    if not cuts:
        warnings.warn(f"column {name or '<unnamed>'} is constant; using a single bin", stacklevel=2)
    return BinningRule(name, tuple(cuts))


def split(dataset: Dataset, train_fraction: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded random partition into (train, test) of sizes floor(n*f) and the rest."""
    if not 0 < train_fraction < 1:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    n = dataset.n_rows
    perm = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(n * train_fraction)
    return dataset.take(np.sort(perm[:n_train])), dataset.take(np.sort(perm[n_train:]))
