"""Dataset container, CSV ingestion, one-hot encoding, z-scoring and splitting."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, IngestionError

UCI_FEATURES = (
    ["LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE"]
    + ["PAY_0"] + [f"PAY_{i}" for i in range(2, 7)]
    + [f"BILL_AMT{i}" for i in range(1, 7)]
    + [f"PAY_AMT{i}" for i in range(1, 7)]
)
UCI_LABEL = "default payment next month"
UCI_SCHEMA = ["ID", *UCI_FEATURES, UCI_LABEL]
# spellings of the label header seen in circulating copies of the file
LABEL_ALIASES = {
    "default payment next month",
    "default.payment.next.month",
    "default_payment_next_month",
    "default",
    "y",
}
CATEGORICAL = ("SEX", "EDUCATION", "MARRIAGE")

NUMERIC = "numeric"
ONEHOT = "onehot"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix with binary labels and stable row identifiers.

    ``groups`` names the source variable of each column (an indicator column
    ``SEX_2`` belongs to group ``SEX``); ``synthetic`` flags rows created by
    oversampling.
    """

    X: np.ndarray
    columns: tuple
    y: np.ndarray
    row_ids: np.ndarray
    kinds: tuple = None
    groups: tuple = None
    synthetic: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {X.shape}")
        n, d = X.shape
        y = np.asarray(self.y).astype(np.int8)
        row_ids = np.asarray(self.row_ids, dtype=np.int64)
        columns = tuple(self.columns)
        kinds = tuple(self.kinds) if self.kinds is not None else (NUMERIC,) * d
        groups = tuple(self.groups) if self.groups is not None else columns
        synthetic = (
            np.zeros(n, dtype=bool) if self.synthetic is None
            else np.asarray(self.synthetic, dtype=bool)
        )
        if len(columns) != d or len(kinds) != d or len(groups) != d:
            raise DataError("column metadata does not match matrix width")
        if len(set(columns)) != d:
            raise DataError("column names must be unique")
        if y.shape != (n,) or row_ids.shape != (n,) or synthetic.shape != (n,):
            raise DataError("labels, row ids and flags must have one entry per row")
        if n and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 or 1")
        if len(np.unique(row_ids)) != n:
            raise DataError("row ids must be unique")
        if not np.isfinite(X).all():
            raise DataError("feature matrix contains NaN or Inf")
        X.setflags(write=False)
        y.setflags(write=False)
        row_ids.setflags(write=False)
        synthetic.setflags(write=False)
        for name, value in [("X", X), ("y", y), ("row_ids", row_ids), ("columns", columns),
                            ("kinds", kinds), ("groups", groups), ("synthetic", synthetic)]:
            object.__setattr__(self, name, value)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> dict:
        return {0: int(np.sum(self.y == 0)), 1: int(np.sum(self.y == 1))}

    def take(self, rows) -> "Dataset":
        """Subset rows by position (integer array or boolean mask)."""
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.columns, self.y[rows], self.row_ids[rows],
                       self.kinds, self.groups, self.synthetic[rows])

    def select_columns(self, names: Sequence[str]) -> "Dataset":
        index = {c: i for i, c in enumerate(self.columns)}
        missing = [c for c in names if c not in index]
        if missing:
            raise DataError(f"unknown columns: {missing}")
        idx = [index[c] for c in names]
        return Dataset(self.X[:, idx], [self.columns[i] for i in idx], self.y, self.row_ids,
                       [self.kinds[i] for i in idx], [self.groups[i] for i in idx],
                       self.synthetic)

    def with_matrix(self, X: np.ndarray) -> "Dataset":
        return Dataset(X, self.columns, self.y, self.row_ids, self.kinds, self.groups,
                       self.synthetic)

    def encoding_map(self) -> dict:
        """Column name -> source variable name."""
        return dict(zip(self.columns, self.groups))


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    std: np.ndarray
    columns: tuple = field(default=())

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "mean": self.mean.tolist(), "std": self.std.tolist()}


@dataclass(frozen=True)
class SplitResult:
    train: Dataset
    test: Dataset
    seed: int


def _parse_cell(text: str, row: int, column: str) -> float:
    text = text.strip()
    if text == "":
        raise IngestionError(f"missing value at row {row}, column {column!r}")
    try:
        value = float(text)
    except ValueError:
        raise IngestionError(f"cannot parse {text!r} as a number at row {row}, column {column!r}") from None
    if not math.isfinite(value):
        raise IngestionError(f"non-finite value {text!r} at row {row}, column {column!r}")
    return value


def _header_matches(header: list, schema: list, default_schema: bool) -> bool:
    if len(header) != len(schema):
        return False
    if header[:-1] != schema[:-1]:
        return False
    if default_schema:
        return header[-1].strip().lower() in LABEL_ALIASES
    return header[-1] == schema[-1]


def ingest_csv(path, schema: Sequence[str] | None = None) -> Dataset:
    """Read a credit-default CSV: id column first, features, label last.

    Row ids are the 0-based data row positions; the id column itself is
    discarded. Any blank or unparseable cell aborts ingestion with the row
    number (1-based, header excluded) and column name.
    """
    default_schema = schema is None
    schema = list(UCI_SCHEMA if schema is None else schema)
    if len(schema) < 3:
        raise IngestionError("schema needs an id column, at least one feature and a label")
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path} is empty") from None
        if not _header_matches(header, schema, default_schema):
            raise IngestionError(f"header mismatch: expected {schema}, got {header}")
        features = header[1:-1]
        rows, labels = [], []
        for r, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(header):
                raise IngestionError(f"row {r} has {len(record)} cells, expected {len(header)}")
            rows.append([_parse_cell(record[j], r, header[j]) for j in range(1, len(header) - 1)])
            label = _parse_cell(record[-1], r, header[-1])
            if label not in (0.0, 1.0):
                raise IngestionError(f"label {record[-1]!r} at row {r} is not 0 or 1")
            labels.append(int(label))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(features))
    return Dataset(X, features, np.array(labels, dtype=np.int8), np.arange(len(rows)))


def _format(value: float) -> str:
    # repr of a float round-trips exactly
    return repr(float(value))


def write_csv(ds: Dataset, path, *, id_column: str = "row_id", label_column: str = "label",
              synthetic_flag: bool = False) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = [id_column, *ds.columns, label_column]
        if synthetic_flag:
            header.append("synthetic")
        writer.writerow(header)
        for i in range(ds.n_rows):
            row = [str(int(ds.row_ids[i])), *map(_format, ds.X[i]), str(int(ds.y[i]))]
            if synthetic_flag:
                row.append(str(int(ds.synthetic[i])))
            writer.writerow(row)
    return path


_INDICATOR = re.compile(r"^(?P<var>.+)_(?P<code>-?\d+)$")


def read_csv(path, categorical: Sequence[str] = CATEGORICAL) -> Dataset:
    """Read a stage artifact written by :func:`write_csv`.

    Row ids (and the ``synthetic`` flag when present) are restored; columns
    named ``<VAR>_<code>`` with ``VAR`` in ``categorical`` are tagged as
    indicators.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path} is empty") from None
        has_flag = header[-1] == "synthetic"
        end = len(header) - (2 if has_flag else 1)
        columns = header[1:end]
        ids, rows, labels, flags = [], [], [], []
        for r, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(header):
                raise IngestionError(f"row {r} has {len(record)} cells, expected {len(header)}")
            ids.append(int(_parse_cell(record[0], r, header[0])))
            rows.append([_parse_cell(record[j], r, header[j]) for j in range(1, end)])
            labels.append(int(_parse_cell(record[end], r, header[end])))
            if has_flag:
                flags.append(record[-1].strip() == "1")
    kinds, groups = [], []
    for c in columns:
        m = _INDICATOR.match(c)
        if m and m.group("var") in categorical:
            kinds.append(ONEHOT)
            groups.append(m.group("var"))
        else:
            kinds.append(NUMERIC)
            groups.append(c)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(columns))
    return Dataset(X, columns, np.array(labels, dtype=np.int8), np.array(ids, dtype=np.int64),
                   kinds, groups, np.array(flags, dtype=bool) if has_flag else None)


def one_hot_encode(ds: Dataset, categorical: Sequence[str]) -> Dataset:
    """Replace integer-coded columns by one indicator column per observed code.

    Untouched columns keep their order and come first; indicator blocks follow
    in the order of ``categorical``, codes ascending.
    """
    categorical = list(categorical)
    if not categorical:
        return ds
    index = {c: i for i, c in enumerate(ds.columns)}
    for c in categorical:
        if c not in index:
            raise DataError(f"categorical column {c!r} not found")
    keep = [i for i, c in enumerate(ds.columns) if c not in set(categorical)]
    blocks = [ds.X[:, keep]]
    columns = [ds.columns[i] for i in keep]
    kinds = [ds.kinds[i] for i in keep]
    groups = [ds.groups[i] for i in keep]
    for c in categorical:
        values = ds.X[:, index[c]]
        if not np.all(values == np.round(values)):
            raise DataError(f"column {c!r} holds non-integer codes")
        codes = np.unique(values).astype(np.int64)
        blocks.append((values[:, None] == codes[None, :]).astype(np.float64))
        columns += [f"{c}_{code}" for code in codes]
        kinds += [ONEHOT] * len(codes)
        groups += [c] * len(codes)
    return Dataset(np.hstack(blocks), columns, ds.y, ds.row_ids, kinds, groups, ds.synthetic)


def zscore_fit(ds: Dataset) -> ScalerParams:
    return ScalerParams(ds.X.mean(axis=0), ds.X.std(axis=0), ds.columns)


def _divisor(params: ScalerParams) -> np.ndarray:
    return np.where(params.std > 0, params.std, 1.0)


def zscore_apply(ds: Dataset, params: ScalerParams) -> Dataset:
    if ds.n_cols != len(params.mean):
        raise DataError(f"scaler fitted on {len(params.mean)} columns, dataset has {ds.n_cols}")
    return ds.with_matrix((ds.X - params.mean) / _divisor(params))


def zscore_inverse(ds: Dataset, params: ScalerParams) -> Dataset:
    if ds.n_cols != len(params.mean):
        raise DataError(f"scaler fitted on {len(params.mean)} columns, dataset has {ds.n_cols}")
    return ds.with_matrix(ds.X * _divisor(params) + params.mean)


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> SplitResult:
    """Seeded per-class shuffle; ``floor(n_c * test_fraction)`` rows of each class go to test."""
    if not 0 < test_fraction < 1:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_mask = np.zeros(ds.n_rows, dtype=bool)
    for c in (0, 1):
        members = np.flatnonzero(ds.y == c)
        if len(members) == 0:
            raise DataError(f"class {c} has no rows")
        n_test = int(math.floor(len(members) * test_fraction))
        test_mask[rng.permutation(members)[:n_test]] = True
    return SplitResult(ds.take(~test_mask), ds.take(test_mask), seed)


def summarize(ds: Dataset) -> dict:
    counts = ds.class_counts()
    n = ds.n_rows
    return {
        "rows": n,
        "features": ds.n_cols,
        "class_counts": {str(k): v for k, v in counts.items()},
        "class_percent": {str(k): (round(100.0 * v / n, 2) if n else 0.0) for k, v in counts.items()},
        "columns": {
            c: {"min": float(ds.X[:, j].min()), "max": float(ds.X[:, j].max()),
                "mean": float(ds.X[:, j].mean())} if n else {}
            for j, c in enumerate(ds.columns)
        },
    }
