import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bespoke_dt.dataset import (
    CsvSchema,
    DatasetError,
    QuantizedDataset,
    RawDataset,
    from_arrays,
    load_csv,
    normalize_quantize,
    quantize,
    split_train_test,
    train_count,
)
from bespoke_dt.sources import fixture_path, load_dataset

from oracles import reference_quantize


def raw(col, labels=None):
    col = np.asarray(col, dtype=float).reshape(-1, 1)
    labels = labels or ["a", "b"] * (len(col) // 2) + ["a"] * (len(col) % 2)
    return RawDataset("t", col, labels, ["x"])


def test_load_small_csv(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("0.1,2.0,0\n0.5,1.0,1\n0.9,3.0,0\n")
    ds = load_csv(p)
    assert ds.n_samples == 3 and ds.n_features == 2
    assert ds.labels == ["0", "1", "0"]
    assert ds.features[:, 0].tolist() == [0.1, 0.5, 0.9]


def test_load_csv_header_and_named_label(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a;b;quality\n1;2;5\n3;4;6\n")
    ds = load_csv(p, CsvSchema(label_column="quality", delimiter=";", has_header=True))
    assert ds.feature_names == ["a", "b"]
    assert ds.classes == ["5", "6"]


def test_load_csv_text_cell_is_error(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,2,0\n1,oops,1\n")
    with pytest.raises(DatasetError, match="non-numeric"):
        load_csv(p)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv")


def test_load_csv_single_class_is_error(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,0\n2,0\n")
    with pytest.raises(DatasetError):
        load_csv(p)


def test_ignore_columns(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,?,2,a\n3,?,4,b\n")
    ds = load_csv(p, CsvSchema(label_column=3, ignore_columns=(1,)))
    assert ds.features.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_seeds_fixture_shape():
    ds = load_dataset("seeds")
    assert (ds.n_samples, ds.n_features, len(ds.classes)) == (210, 7, 3)


def test_seeds_fixture_counts_match_raw_file():
    # count rows/columns directly from the committed text
    lines = [l.split() for l in fixture_path("seeds").read_text().splitlines() if l.strip()]
    assert len(lines) == 210 and {len(l) for l in lines} == {8}
    assert sorted({l[-1] for l in lines}) == ["1", "2", "3"]


def test_balance_fixture_is_the_full_factorial():
    ds = load_dataset("balance-scale")
    assert ds.n_samples == 625 and ds.n_features == 4
    lw, ld, rw, rd = ds.features.T
    want = np.where(lw * ld > rw * rd, "L", np.where(lw * ld < rw * rd, "R", "B"))
    assert list(want) == ds.labels
    assert len({tuple(r) for r in ds.features.tolist()}) == 625


def test_quantize_endpoints_and_midpoint():
    assert normalize_quantize(raw([0.0, 0.5, 1.0]), 4)[:, 0].tolist() == [0, 8, 15]


def test_quantize_constant_column():
    assert normalize_quantize(raw([2.0, 2.0, 2.0]), 4)[:, 0].tolist() == [0, 0, 0]


def test_quantize_two_bits():
    assert normalize_quantize(raw([1, 2, 3, 4]), 2)[:, 0].tolist() == [0, 1, 2, 3]


def test_round_half_up():
    # (x - 0) / 2 * 3 = 1.5 for x = 1
    assert normalize_quantize(raw([0.0, 1.0, 2.0]), 2)[:, 0].tolist() == [0, 2, 3]


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=30), st.integers(1, 8))
def test_quantize_matches_exact_oracle(col, bits):
    got = normalize_quantize(raw(col), bits)[:, 0].tolist()
    want = reference_quantize(col, bits)
    # float scaling may land within one ulp of a .5 boundary
    assert all(abs(g - w) <= 1 for g, w in zip(got, want))
    assert sum(g != w for g, w in zip(got, want)) <= max(1, len(col) // 10)


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=30), st.integers(1, 8))
def test_quantize_range_and_monotone(col, bits):
    q = normalize_quantize(raw(col), bits)[:, 0]
    assert q.min() >= 0 and q.max() <= (1 << bits) - 1
    order = np.argsort(col, kind="stable")
    assert np.all(np.diff(q[order]) >= 0)


def test_q_decodes_to_fraction_of_full_scale():
    ds = quantize(raw([0.0, 0.25, 0.5, 0.75, 1.0]), 4)
    assert ds.features[:, 0].tolist() == [0, 4, 8, 11, 15]
    assert ds.max_level == 15


def test_split_100_samples():
    ds = from_arrays(np.arange(100) % 16, [i % 2 for i in range(100)])
    s = split_train_test(ds, 1)
    assert s.split.count("train") == 70 and s.split.count("test") == 30


def test_split_deterministic():
    ds = from_arrays(np.arange(100) % 16, [i % 3 for i in range(100)])
    assert split_train_test(ds, 5).split == split_train_test(ds, 5).split
    assert split_train_test(ds, 5).split != split_train_test(ds, 6).split


@pytest.mark.parametrize("seed", [0, 1, 7, 123])
def test_seeds_split_counts(seed):
    s = split_train_test(quantize(load_dataset("seeds")), seed)
    assert s.split.count("train") == 147 and s.split.count("test") == 63


def test_split_too_small():
    with pytest.raises(DatasetError):
        split_train_test(from_arrays([1, 2, 3], [0, 1, 0]), 0)


@given(
    st.lists(st.integers(0, 4), min_size=10, max_size=120),
    st.integers(0, 2**31),
)
def test_split_properties(labels, seed):
    if len(set(labels)) < 2:
        labels = labels + [0 if labels[0] else 1]
    ds = from_arrays(np.zeros(len(labels), dtype=int), labels)
    s = split_train_test(ds, seed)
    n = len(labels)
    assert abs(s.split.count("train") - 0.7 * n) <= 1
    assert s.split.count("train") == train_count(n)
    train_labels = {l for l, t in zip(labels, s.split) if t == "train"}
    for c in set(labels):
        if labels.count(c) >= 2:
            assert c in train_labels


def test_pipeline_byte_identical():
    a = split_train_test(quantize(load_dataset("balance-scale")), 3).to_json()
    b = split_train_test(quantize(load_dataset("balance-scale")), 3).to_json()
    assert a == b


def test_quantized_json_round_trip(seeds_ds):
    back = QuantizedDataset.from_dict(seeds_ds.to_dict())
    assert back.to_json() == seeds_ds.to_json()
    assert back.checksum() == seeds_ds.checksum()


def test_quantized_rejects_out_of_range():
    with pytest.raises(DatasetError):
        QuantizedDataset("x", 2, np.array([[4]]), np.array([0]), ["a"], ["f"])


def test_raw_dataset_invariants():
    with pytest.raises(DatasetError):
        RawDataset("x", np.zeros((2, 1)), ["a"], ["f"])
    with pytest.raises(DatasetError):
        RawDataset("x", np.zeros((2, 0)), ["a", "b"], [])
