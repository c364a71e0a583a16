import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_dataset
from credit_default.errors import DataError, IngestionError
from credit_default.tabular import (CATEGORICAL, NUMERIC, ONEHOT, UCI_FEATURES, UCI_SCHEMA, Dataset,
                                    ingest_csv, one_hot_encode, read_csv, stratified_split, summarize,
                                    write_csv, zscore_apply, zscore_fit, zscore_inverse)


def write_uci(path, rows, label="default payment next month"):
    header = ["ID", *UCI_FEATURES, label]
    lines = [",".join(header)] + [",".join(map(str, r)) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def uci_row(i, label=0, **over):
    base = {c: 0 for c in UCI_FEATURES}
    base.update(LIMIT_BAL=10000 * (i + 1), SEX=1 + i % 2, EDUCATION=1 + i % 4, MARRIAGE=1 + i % 3, AGE=30 + i)
    base.update(over)
    return [i + 1, *[base[c] for c in UCI_FEATURES], label]


def test_ingest_small_file(tmp_path):
    ds = ingest_csv(write_uci(tmp_path / "a.csv", [uci_row(0, 0), uci_row(1, 1), uci_row(2, 0)]))
    assert ds.n_rows == 3 and ds.n_cols == 23
    assert list(ds.row_ids) == [0, 1, 2]
    assert list(ds.y) == [0, 1, 0]
    assert ds.columns == tuple(UCI_FEATURES)
    assert ds.X[1, ds.columns.index("LIMIT_BAL")] == 20000


def test_ingest_blank_cell_names_row_and_column(tmp_path):
    row = [str(v) for v in uci_row(1)]
    row[1 + UCI_FEATURES.index("BILL_AMT3")] = ""
    path = tmp_path / "b.csv"
    path.write_text(",".join(UCI_SCHEMA) + "\n" + ",".join(map(str, uci_row(0))) + "\n" + ",".join(row) + "\n")
    with pytest.raises(IngestionError, match=r"row 2.*BILL_AMT3"):
        ingest_csv(path)


def test_ingest_rejects_garbage_and_bad_header(tmp_path):
    row = uci_row(0)
    row[3] = "abc"
    with pytest.raises(IngestionError, match="abc"):
        ingest_csv(write_uci(tmp_path / "c.csv", [row]))
    bad = tmp_path / "d.csv"
    bad.write_text("ID,A,B,label\n1,2,3,0\n")
    with pytest.raises(IngestionError, match="header"):
        ingest_csv(bad)
    with pytest.raises(IngestionError, match="not 0 or 1"):
        ingest_csv(write_uci(tmp_path / "e.csv", [uci_row(0, label=2)]))


def test_ingest_accepts_label_alias(tmp_path):
    ds = ingest_csv(write_uci(tmp_path / "f.csv", [uci_row(0, 1)], label="default.payment.next.month"))
    assert ds.y[0] == 1


def test_custom_schema(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("key,a,b,target\n7,1.5,2,1\n8,0,1,0\n")
    ds = ingest_csv(p, ["key", "a", "b", "target"])
    assert ds.columns == ("a", "b") and list(ds.y) == [1, 0]


def test_dataset_invariants():
    with pytest.raises(DataError):
        make_dataset([[1.0], [np.nan]], [0, 1])
    with pytest.raises(DataError):
        make_dataset([[1.0], [2.0]], [0, 2])
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 2)), ["a", "a"], np.array([0, 1]), np.arange(2))
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), ["a"], np.array([0, 1]), np.array([3, 3]))
    ds = make_dataset([[1.0], [2.0]], [0, 1])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


def test_one_hot_layout():
    X = np.array([[1, 2, 7.0], [2, 4, 8.0], [1, 1, 9.0]])
    ds = make_dataset(X, [0, 1, 0], ["SEX", "EDUCATION", "LIMIT_BAL"])
    enc = one_hot_encode(ds, ["SEX", "EDUCATION"])
    assert enc.columns == ("LIMIT_BAL", "SEX_1", "SEX_2", "EDUCATION_1", "EDUCATION_2", "EDUCATION_4")
    assert enc.kinds == (NUMERIC,) + (ONEHOT,) * 5
    assert enc.encoding_map()["EDUCATION_4"] == "EDUCATION"
    np.testing.assert_array_equal(enc.X[:, 1:3], [[1, 0], [0, 1], [1, 0]])
    assert one_hot_encode(ds, []) is ds
    with pytest.raises(DataError):
        one_hot_encode(ds, ["MISSING"])


def test_one_hot_constant_code_gives_ones_column():
    ds = make_dataset([[3.0], [3.0]], [0, 1], ["MARRIAGE"])
    enc = one_hot_encode(ds, ["MARRIAGE"])
    assert enc.columns == ("MARRIAGE_3",)
    assert enc.X[:, 0].tolist() == [1.0, 1.0]


def test_zscore_examples():
    ds = make_dataset([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], [0, 1, 0])
    params = zscore_fit(ds)
    assert params.mean[0] == 2.0
    assert params.std[0] == pytest.approx(math.sqrt(2 / 3))
    z = zscore_apply(ds, params)
    assert z.X[:, 0].mean() == pytest.approx(0.0)
    assert z.X[:, 0].var() == pytest.approx(1.0)
    assert (z.X[:, 1] == 0).all()
    at_mean = zscore_apply(make_dataset([[2.0, 5.0]], [0]), params)
    assert (at_mean.X == 0).all()
    with pytest.raises(DataError):
        zscore_apply(make_dataset([[1.0]], [0]), params)


@given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 4)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_zscore_round_trip(X):
    ds = make_dataset(X, np.arange(len(X)) % 2)
    params = zscore_fit(ds)
    back = zscore_inverse(zscore_apply(ds, params), params).X
    for j in np.flatnonzero(params.std > 0):
        # relative to the column's magnitude: x = mean + z * std cannot beat that
        tol = 1e-9 * (np.abs(params.mean[j]) + params.std[j])
        np.testing.assert_allclose(back[:, j], X[:, j], rtol=1e-9, atol=tol)


def test_split_floor_counts():
    y = np.array([0] * 10572 + [1] * 2948)
    ds = make_dataset(np.zeros((len(y), 1)), y)
    split = stratified_split(ds, 0.2, seed=3)
    assert split.test.class_counts() == {0: 2114, 1: 589}
    assert split.test.n_rows == 2703
    small = stratified_split(make_dataset(np.zeros((10, 1)), [0] * 5 + [1] * 5), 0.2, seed=0)
    assert small.test.class_counts() == {0: 1, 1: 1}


def test_split_errors():
    ds = make_dataset(np.zeros((4, 1)), [0, 0, 0, 0])
    with pytest.raises(DataError):
        stratified_split(ds, 0.2, 0)
    with pytest.raises(DataError):
        stratified_split(make_dataset(np.zeros((4, 1)), [0, 1, 0, 1]), 1.5, 0)


@given(st.integers(4, 200), st.floats(0.05, 0.95), st.integers(0, 2**32), st.floats(0.1, 0.9))
def test_split_partition_and_ratio(n, frac, seed, pos_rate):
    y = (np.arange(n) < max(1, min(n - 1, int(n * pos_rate)))).astype(int)
    ds = make_dataset(np.arange(n, dtype=float), y)
    s1 = stratified_split(ds, frac, seed)
    s2 = stratified_split(ds, frac, seed)
    ids_tr, ids_te = set(s1.train.row_ids), set(s1.test.row_ids)
    assert ids_tr.isdisjoint(ids_te) and ids_tr | ids_te == set(range(n))
    assert list(s1.test.row_ids) == list(s2.test.row_ids)
    if s1.test.n_rows:
        for c in (0, 1):
            got = s1.test.class_counts()[c] / s1.test.n_rows
            want = ds.class_counts()[c] / n
            assert abs(got - want) <= 1.0 / s1.test.n_rows + 1e-12
        for c in (0, 1):
            assert s1.test.class_counts()[c] == math.floor(ds.class_counts()[c] * frac)


@given(arrays(np.float64, st.tuples(st.integers(1, 20), st.integers(1, 3)),
              elements=st.floats(-1e12, 1e12, allow_nan=False)))
def test_csv_round_trip_is_lossless(tmp_path_factory, X):
    ds = make_dataset(X, np.arange(len(X)) % 2)
    path = write_csv(ds, tmp_path_factory.mktemp("rt") / "ds.csv")
    back = read_csv(path)
    np.testing.assert_array_equal(back.X, ds.X)
    np.testing.assert_array_equal(back.row_ids, ds.row_ids)
    np.testing.assert_array_equal(back.y, ds.y)


def test_read_csv_restores_indicator_groups(tmp_path):
    X = np.array([[1, 2, 0.5], [2, 1, 0.25]])
    enc = one_hot_encode(make_dataset(X, [0, 1], ["SEX", "MARRIAGE", "AGE"]), list(CATEGORICAL[::2]))
    back = read_csv(write_csv(enc, tmp_path / "e.csv"))
    assert back.kinds == enc.kinds and back.groups == enc.groups


def test_summarize():
    s = summarize(make_dataset([[1.0], [3.0]], [1, 1]))
    assert s["class_counts"] == {"0": 0, "1": 2}
    assert s["columns"]["x0"] == {"min": 1.0, "max": 3.0, "mean": 2.0}
