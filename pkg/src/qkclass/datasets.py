"""Dataset file handling and seeded toy-set generation.

Two interchangeable on-disk formats:

* CSV: one row per datum, feature columns then the label column last.
  Complex entries are written/read as ``a+bi`` strings, bare reals are fine.
* JSON: a list of rows ``[features, label]`` or ``[features, label, weight]``
  where a feature is a number or an ``[re, im]`` pair.

Feature vectors must be homogeneous in length and labels must be 0 or 1.
Validation errors name the offending row and column (1-based).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

TOY_KINDS = ("orthogonal-pair", "separable", "random")


@dataclass(frozen=True)
class DatasetFile:
    """In-memory dataset: complex features (M, N), labels, optional weights."""

    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D array")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError("one label per row required")
        if self.weights is not None and self.weights.shape != self.labels.shape:
            raise DataError("one weight per row required")

    def __len__(self) -> int:
        return int(self.features.shape[0])


def parse_complex(token: str, row: int, col: int) -> complex:
    text = token.strip().replace(" ", "")
    if not text:
        raise DataError(f"row {row}, column {col}: empty entry")
    try:
        value = complex(text.replace("i", "j"))
    except ValueError:
        raise DataError(f"row {row}, column {col}: cannot parse {token!r} as a number")
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise DataError(f"row {row}, column {col}: non-finite entry {token!r}")
    return value


def _parse_label(token, row: int) -> int:
    try:
        value = float(token)
    except (TypeError, ValueError):
        raise DataError(f"row {row}: cannot parse label {token!r}")
    if value not in (0.0, 1.0):
        raise DataError(f"row {row}: label must be 0 or 1, got {token!r}")
    return int(value)


def format_complex(z: complex) -> str:
    if z.imag == 0.0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def _infer_format(path: str, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("csv", "json"):
            raise DataError(f"unknown dataset format {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in ("csv", "json"):
        return suffix
    raise DataError(f"cannot infer dataset format from {path!r}; pass csv or json")


def _finish(rows: list[list[complex]], labels: list[int],
            weights: list[float] | None) -> DatasetFile:
    if not rows:
        raise DataError("dataset has no rows")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise DataError(f"inhomogeneous feature lengths: {sorted(lengths)}")
    if next(iter(lengths)) == 0:
        raise DataError("rows carry no feature columns")
    features = np.array(rows, dtype=complex)
    labels_arr = np.array(labels, dtype=int)
    weights_arr = None
    if weights is not None:
        weights_arr = np.array(weights, dtype=float)
        if np.any(weights_arr < 0):
            raise DataError("weights must be nonnegative")
    return DatasetFile(features, labels_arr, weights_arr)


def _ingest_csv(path: str) -> DatasetFile:
    rows, labels = [], []
    with open(path, newline="") as handle:
        for r, record in enumerate(csv.reader(handle), start=1):
            record = [c for c in record if c.strip() != ""] if record else []
            if not record:
                continue
            if len(record) < 2:
                raise DataError(f"row {r}: need at least one feature and a label")
            rows.append([parse_complex(tok, r, c) for c, tok in
                         enumerate(record[:-1], start=1)])
            labels.append(_parse_label(record[-1].strip(), r))
    return _finish(rows, labels, None)


def _parse_json_feature(entry, row: int, col: int) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if (isinstance(entry, list) and len(entry) == 2
            and all(isinstance(v, (int, float)) for v in entry)):
        return complex(entry[0], entry[1])
    raise DataError(f"row {row}, column {col}: expected a number or [re, im] pair")


def _ingest_json(path: str) -> DatasetFile:
    with open(path) as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid JSON dataset: {exc}") from exc
    if not isinstance(payload, list):
        raise DataError("JSON dataset must be a list of rows")
    rows, labels, weights = [], [], []
    any_weight = False
    for r, record in enumerate(payload, start=1):
        if not isinstance(record, list) or len(record) not in (2, 3):
            raise DataError(f"row {r}: expected [features, label] or [features, label, weight]")
        feats = record[0]
        if not isinstance(feats, list) or not feats:
            raise DataError(f"row {r}: features must be a nonempty list")
        rows.append([_parse_json_feature(f, r, c) for c, f in enumerate(feats, start=1)])
        labels.append(_parse_label(record[1], r))
        if len(record) == 3:
            any_weight = True
            weights.append(float(record[2]))
        else:
            weights.append(1.0)
    return _finish(rows, labels, weights if any_weight else None)


def ingest(path: str, fmt: str | None = None) -> DatasetFile:
    """Load a dataset file, inferring the format from the extension."""
    fmt = _infer_format(path, fmt)
    return _ingest_csv(path) if fmt == "csv" else _ingest_json(path)


def load_test_points(path: str, fmt: str | None = None, labeled: bool = False):
    """Load test inputs: labeled files share the dataset schema; unlabeled
    CSV rows are all features, unlabeled JSON is a list of feature lists.

    Returns (features, labels-or-None).
    """
    fmt = _infer_format(path, fmt)
    if labeled:
        ds = ingest(path, fmt)
        return ds.features, ds.labels
    if fmt == "csv":
        rows = []
        with open(path, newline="") as handle:
            for r, record in enumerate(csv.reader(handle), start=1):
                record = [c for c in record if c.strip() != ""] if record else []
                if not record:
                    continue
                rows.append([parse_complex(tok, r, c)
                             for c, tok in enumerate(record, start=1)])
    else:
        with open(path) as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON test file: {exc}") from exc
        if not isinstance(payload, list):
            raise DataError("JSON test file must be a list of feature lists")
        rows = [[_parse_json_feature(f, r, c) for c, f in enumerate(feats, start=1)]
                for r, feats in enumerate(payload, start=1)]
    if not rows:
        return np.zeros((0, 0), dtype=complex), None
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise DataError(f"inhomogeneous feature lengths: {sorted(lengths)}")
    return np.array(rows, dtype=complex), None


def write_dataset(ds: DatasetFile, path: str, fmt: str | None = None):
    fmt = _infer_format(path, fmt)
    if fmt == "csv":
        if ds.weights is not None:
            raise DataError("CSV datasets cannot carry per-row weights; use JSON")
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            for feats, label in zip(ds.features, ds.labels):
                writer.writerow([format_complex(complex(f)) for f in feats] + [int(label)])
        return
    rows = []
    for i, (feats, label) in enumerate(zip(ds.features, ds.labels)):
        encoded = [[f.real, f.imag] if f.imag != 0.0 else f.real
                   for f in map(complex, feats)]
        row = [encoded, int(label)]
        if ds.weights is not None:
            row.append(float(ds.weights[i]))
        rows.append(row)
    with open(path, "w") as handle:
        json.dump(rows, handle, indent=2)
        handle.write("\n")


def gen_toy(kind: str, m: int, dim: int, seed: int, noise: float = 0.25) -> DatasetFile:
    """Seeded toy sets: an orthogonal pair, two separable clusters, or fully
    random labelled states."""
    if kind not in TOY_KINDS:
        raise DataError(f"unknown toy kind {kind!r}, expected one of {TOY_KINDS}")
    if dim < 2:
        raise DataError("toy sets need feature dimension >= 2")
    rng = np.random.default_rng(seed)
    if kind == "orthogonal-pair":
        features = np.zeros((2, dim), dtype=complex)
        features[0, 0] = 1.0
        features[1, dim - 1] = 1.0
        return DatasetFile(features, np.array([0, 1]))
    if m < 2:
        raise DataError("toy sets need at least two points")
    if kind == "separable":
        n0 = (m + 1) // 2
        rows, labels = [], []
        for i in range(m):
            label = 0 if i < n0 else 1
            center = np.zeros(dim, dtype=complex)
            center[0 if label == 0 else dim - 1] = 1.0
            sample = center + noise * (rng.standard_normal(dim)
                                       + 1j * rng.standard_normal(dim))
            rows.append(sample / np.linalg.norm(sample))
            labels.append(label)
        return DatasetFile(np.array(rows), np.array(labels))
    features = rng.standard_normal((m, dim)) + 1j * rng.standard_normal((m, dim))
    labels = rng.integers(0, 2, size=m)
    labels[0], labels[-1] = 0, 1
    return DatasetFile(features, labels.astype(int))
