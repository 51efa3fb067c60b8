import csv
import json
import struct

import numpy as np
import pytest

from synthgt import io as sio
from synthgt.core import MetricResult, ShapeMismatch
from synthgt.metrics import evaluate_all


def golden_npy(descr: str, shape_text: str, data: bytes, fortran: bool = False) -> bytes:
    """NPY v1.0 bytes assembled straight from the format description."""
    header = "{'descr': '%s', 'fortran_order': %s, 'shape': %s, }" % (descr, fortran, shape_text)
    pad = 64 - (10 + len(header) + 1) % 64
    header = header + " " * (pad % 64) + "\n"
    return b"\x93NUMPY" + b"\x01\x00" + struct.pack("<H", len(header)) + header.encode("latin1") + data


def test_golden_f8_zeros(tmp_path):
    path = tmp_path / "z.npy"
    sio.write_npy(np.zeros((2, 1, 3)), "f8", path)
    blob = path.read_bytes()
    expected = golden_npy("<f8", "(2, 1, 3)", b"\x00" * 48)
    assert len(expected) == 128 + 48
    assert blob == expected


@pytest.mark.parametrize("dtype, descr, values, fmt", [
    ("f8", "<f8", [1.5, -2.25, 3.0], "<3d"),
    ("i8", "<i8", [0, 1, -7], "<3q"),
    ("u1", "|u1", [0, 1, 255], "<3B"),
])
def test_golden_1d(tmp_path, dtype, descr, values, fmt):
    path = tmp_path / "a.npy"
    sio.write_npy(np.array(values), dtype, path)
    blob = path.read_bytes()
    assert blob == golden_npy(descr, "(3,)", struct.pack(fmt, *values))
    assert (len(blob) - 3 * np.dtype(descr).itemsize) % 64 == 0


def test_round_trip_and_third_party_reader(tmp_path):
    rng = np.random.default_rng(0)
    cases = [(rng.normal(size=(4, 2, 5)), "f8"), (rng.integers(-9, 9, 7), "i8"),
             (rng.integers(0, 2, (3, 1, 6)), "u1")]
    for values, dtype in cases:
        path = tmp_path / f"{dtype}.npy"
        sio.write_npy(values, dtype, path)
        back, shape, kind = sio.read_npy(path)
        assert kind == dtype and shape == values.shape
        assert np.array_equal(back, values)
        assert np.array_equal(np.load(path), values)


def test_non_finite_rejected(tmp_path):
    with pytest.raises(sio.NonFinite):
        sio.write_npy(np.array([1.0, np.nan]), "f8", tmp_path / "x.npy")
    with pytest.raises(sio.IoError):
        sio.write_npy(np.array([256]), "u1", tmp_path / "x.npy")


def test_fortran_order_read(tmp_path):
    # 2x3 array [[1,2,3],[4,5,6]] stored column-major: 1,4,2,5,3,6
    data = struct.pack("<6d", 1, 4, 2, 5, 3, 6)
    path = tmp_path / "f.npy"
    path.write_bytes(golden_npy("<f8", "(2, 3)", data, fortran=True))
    values, shape, _ = sio.read_npy(path)
    expected = np.array([1, 4, 2, 5, 3, 6], dtype=float).reshape(3, 2).T
    assert shape == (2, 3)
    assert np.array_equal(values, expected)
    assert values.flags.c_contiguous


def test_big_endian_read(tmp_path):
    data = struct.pack(">4d", 1.0, -2.5, 1e300, 0.125)
    path = tmp_path / "b.npy"
    path.write_bytes(golden_npy(">f8", "(2, 2)", data))
    values, _, kind = sio.read_npy(path)
    assert kind == "f8"
    assert values.tolist() == [[1.0, -2.5], [1e300, 0.125]]
    assert values.dtype.byteorder in ("=", "<")


def test_float32_widened(tmp_path):
    path = tmp_path / "f4.npy"
    np.save(path, np.array([[[0.5, 1.25]]], dtype=np.float32))
    values, _, kind = sio.read_npy(path)
    assert kind == "f8" and values.dtype == np.float64
    assert values.tolist() == [[[0.5, 1.25]]]


@pytest.mark.parametrize("blob", [
    b"\x93NUMPX\x01\x00",
    b"\x93NUMPY\x03\x00\x00\x00",
])
def test_bad_magic_or_version(tmp_path, blob):
    path = tmp_path / "bad.npy"
    path.write_bytes(blob + b"\x00" * 64)
    with pytest.raises(sio.FormatError):
        sio.read_npy(path)


def test_unsupported_dtype_and_truncation(tmp_path):
    path = tmp_path / "c.npy"
    path.write_bytes(golden_npy("<c16", "(1,)", b"\x00" * 16))
    with pytest.raises(sio.FormatError):
        sio.read_npy(path)
    path.write_bytes(golden_npy("<f8", "(3,)", b"\x00" * 16))
    with pytest.raises(sio.FormatError):
        sio.read_npy(path)


def test_dataset_round_trip(tmp_path, pulse_splits):
    ds = pulse_splits["train"]
    out = sio.write_dataset(ds, tmp_path / "train")
    assert sorted(p.name for p in out.iterdir()) == ["X.npy", "feature.npy", "mask.npy", "meta.json",
                                                    "signal.npy", "y.npy"]
    assert sio.read_npy(out / "X.npy")[1:] == ((200, 1, 100), "f8")
    assert sio.read_npy(out / "y.npy")[1:] == ((200,), "i8")
    assert sio.read_npy(out / "mask.npy")[1:] == ((200, 1, 100), "u1")
    back = sio.read_dataset(out)
    for key in ("X", "y", "mask", "signal", "feature"):
        assert back[key].tobytes() == ds[key].tobytes()
        assert back[key].dtype == ds[key].dtype
    assert back.meta == ds.meta


def test_dataset_missing_and_inconsistent_files(tmp_path, pulse_splits):
    out = sio.write_dataset(pulse_splits["test"], tmp_path / "t")
    (out / "mask.npy").unlink()
    with pytest.raises(sio.MissingFile):
        sio.read_dataset(out)
    sio.write_npy(np.zeros((50, 1, 99)), "u1", out / "mask.npy")
    with pytest.raises(ShapeMismatch):
        sio.read_dataset(out)
    with pytest.raises(sio.IoError):
        sio.read_dataset(tmp_path / "absent")


def test_dataset_without_components(tmp_path, pulse_splits):
    ds = pulse_splits["test"]
    stripped = type(ds)(X=ds.X, y=ds.y, mask=ds.mask, meta=ds.meta)
    out = sio.write_dataset(ds, tmp_path / "t")
    sio.write_dataset(stripped, out)  # overwriting removes stale component files
    assert sio.read_dataset(out).components is None


def results():
    m = np.zeros((2, 1, 4))
    m[:, 0, 1] = 1
    s = np.array([[[0.1, 0.9, 0.3, 0.2]], [[0.5, 0.2, 0.7, 0.1]]])
    return evaluate_all(s, m, metric_names=["auc_pr", "mae"])


def test_json_report_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    sio.write_metrics_report(results(), a)
    sio.write_metrics_report(results(), b)
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert list(data) == ["auc_pr", "mae"]
    assert set(data["auc_pr"]) >= {"mean", "n_excluded", "normalized", "per_sample"}
    assert data["auc_pr"]["mean"] == results()["auc_pr"].mean


def test_csv_report_parses_back(tmp_path):
    path = tmp_path / "r.csv"
    res = results()
    sio.write_metrics_report(res, path, "csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["metric", "statistic", "sample", "value"]
    back = sio.read_metrics_csv(path)
    for name, r in res.items():
        assert back[name]["mean"] == r.mean
        assert back[name]["per_sample"] == list(r.per_sample)
        assert back[name]["n_excluded"] == r.n_excluded


def test_empty_report(tmp_path):
    sio.write_metrics_report({}, tmp_path / "e.json")
    assert json.loads((tmp_path / "e.json").read_text()) == {}
    sio.write_metrics_report({}, tmp_path / "e.csv", "csv")
    assert sio.read_metrics_csv(tmp_path / "e.csv") == {}


def test_report_with_exclusions(tmp_path):
    res = {"x": MetricResult("x", [1.0], [1], n_excluded=1)}
    sio.write_metrics_report(res, tmp_path / "x.csv", "csv")
    assert sio.read_metrics_csv(tmp_path / "x.csv")["x"]["indices"] == [1]
