"""On-disk formats: NPY v1.0 arrays, dataset directories, metric reports.

A dataset directory holds ``X.npy`` (f8), ``y.npy`` (i8), ``mask.npy`` (u1),
``meta.json`` and, when components were kept, ``signal.npy`` and
``feature.npy`` (f8).
"""

from __future__ import annotations

import ast
import csv
import json
import os
import struct
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .core import Components, Dataset, DatasetMeta, MetricResult, ShapeMismatch, SynthError

PathLike = Union[str, os.PathLike]

NPY_MAGIC = b"\x93NUMPY"
NPY_ALIGN = 64
_WRITE_DESCR = {"f8": "<f8", "i8": "<i8", "u1": "|u1"}
_READ_KINDS = {"f8": "f8", "f4": "f8", "i8": "i8", "u1": "u1"}
_INT_RANGE = {"i8": (-(2 ** 63), 2 ** 63 - 1), "u1": (0, 255)}

DATASET_FILES = ("X.npy", "y.npy", "mask.npy", "meta.json")
COMPONENT_FILES = ("signal.npy", "feature.npy")


class IoError(SynthError, OSError):
    pass


class NonFinite(IoError, ValueError):
    pass


class FormatError(SynthError, ValueError):
    pass


class MissingFile(FormatError):
    pass


# ---------------------------------------------------------------------------
# NPY


def npy_header(dtype: str, shape: tuple[int, ...]) -> bytes:
    """Full NPY v1.0 preamble (magic through newline) for a C-ordered array."""
    descr = _WRITE_DESCR[dtype]
    text = "{'descr': '%s', 'fortran_order': False, 'shape': %r, }" % (descr, tuple(int(n) for n in shape))
    total = len(NPY_MAGIC) + 2 + 2 + len(text) + 1
    text += " " * (-total % NPY_ALIGN) + "\n"
    encoded = text.encode("latin1")
    return NPY_MAGIC + bytes([1, 0]) + struct.pack("<H", len(encoded)) + encoded


def write_npy(values, dtype: str, path: PathLike) -> None:
    if dtype not in _WRITE_DESCR:
        raise ValueError(f"dtype must be one of {sorted(_WRITE_DESCR)}, got {dtype!r}")
    arr = np.asarray(values)
    if dtype == "f8":
        arr = arr.astype(np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"refusing to write non-finite values to {path}")
    else:
        lo, hi = _INT_RANGE[dtype]
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr))
                         or arr.min() < lo or arr.max() > hi):
            raise IoError(f"values out of range for {dtype} when writing {path}")
    data = np.ascontiguousarray(arr, dtype=_WRITE_DESCR[dtype]).tobytes(order="C")
    try:
        with open(path, "wb") as fh:
            fh.write(npy_header(dtype, arr.shape))
            fh.write(data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _parse_header(raw: bytes, path) -> tuple[np.dtype, bool, tuple[int, ...]]:
    try:
        header = ast.literal_eval(raw.decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"{path}: unparseable NPY header") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: NPY header must have exactly descr, fortran_order, shape")
    descr, fortran, shape = header["descr"], header["fortran_order"], header["shape"]
    if not isinstance(descr, str) or len(descr) != 3 or descr[0] not in "<>|=" or descr[1:] not in _READ_KINDS:
        raise FormatError(f"{path}: unsupported dtype {descr!r}")
    if not isinstance(fortran, bool):
        raise FormatError(f"{path}: fortran_order must be a bool")
    if not isinstance(shape, tuple) or not all(isinstance(n, int) and n >= 0 for n in shape):
        raise FormatError(f"{path}: invalid shape {shape!r}")
    return np.dtype(descr), fortran, shape


def read_npy(path: PathLike) -> tuple[np.ndarray, tuple[int, ...], str]:
    """Read an NPY file into a native-endian, C-ordered array.

    Big-endian and Fortran-ordered files are converted; ``f4`` is widened to
    ``f8``. Returns ``(values, shape, dtype)`` with ``dtype`` one of
    ``"f8"``, ``"i8"``, ``"u1"``.
    """
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise MissingFile(f"missing file {path}") from exc
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if blob[:6] != NPY_MAGIC:
        raise FormatError(f"{path}: not an NPY file (bad magic)")
    major, minor = blob[6], blob[7]
    if (major, minor) == (1, 0):
        (hlen,), offset = struct.unpack("<H", blob[8:10]), 10
    elif (major, minor) == (2, 0):
        (hlen,), offset = struct.unpack("<I", blob[8:12]), 12
    else:
        raise FormatError(f"{path}: unsupported NPY version {major}.{minor}")
    dtype, fortran, shape = _parse_header(blob[offset:offset + hlen], path)
    data = blob[offset + hlen:]
    count = int(np.prod(shape, dtype=np.int64))
    if len(data) != count * dtype.itemsize:
        raise FormatError(f"{path}: expected {count * dtype.itemsize} data bytes, found {len(data)}")

    values = np.frombuffer(data, dtype=dtype, count=count).reshape(shape, order="F" if fortran else "C")
    kind = _READ_KINDS[dtype.str[1:]]
    values = np.ascontiguousarray(values, dtype=np.dtype(kind).newbyteorder("="))
    return values, tuple(shape), kind


# ---------------------------------------------------------------------------
# dataset directories


def write_dataset(ds: Dataset, directory: PathLike) -> Path:
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    write_npy(ds.X, "f8", out / "X.npy")
    write_npy(ds.y, "i8", out / "y.npy")
    write_npy(ds.mask, "u1", out / "mask.npy")
    if ds.components is not None:
        write_npy(ds.components.signal, "f8", out / "signal.npy")
        write_npy(ds.components.feature, "f8", out / "feature.npy")
    else:
        for name in COMPONENT_FILES:
            (out / name).unlink(missing_ok=True)
    meta = json.dumps(ds.meta.to_dict(), indent=2, sort_keys=True) + "\n"
    try:
        (out / "meta.json").write_text(meta, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {out / 'meta.json'}: {exc}") from exc
    return out


def read_dataset(directory: PathLike) -> Dataset:
    src = Path(directory)
    if not src.is_dir():
        raise IoError(f"dataset directory {src} does not exist")
    for name in DATASET_FILES:
        if not (src / name).is_file():
            raise MissingFile(f"{src}: missing {name}")
    try:
        meta = DatasetMeta.from_dict(json.loads((src / "meta.json").read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{src / 'meta.json'}: invalid metadata ({exc})") from exc
    except OSError as exc:
        raise IoError(f"cannot read {src / 'meta.json'}: {exc}") from exc

    X, x_shape, _ = read_npy(src / "X.npy")
    y, y_shape, y_kind = read_npy(src / "y.npy")
    mask, m_shape, _ = read_npy(src / "mask.npy")
    if y_kind != "i8":
        raise FormatError(f"{src / 'y.npy'}: labels must be i8, got {y_kind}")
    if m_shape != x_shape:
        raise ShapeMismatch(x_shape, m_shape, "X.npy and mask.npy")
    if len(y_shape) != 1 or y_shape[0] != x_shape[0]:
        raise ShapeMismatch(x_shape, y_shape, "X.npy and y.npy")

    present = [(src / name).is_file() for name in COMPONENT_FILES]
    components = None
    if any(present):
        if not all(present):
            raise MissingFile(f"{src}: signal.npy and feature.npy must both be present")
        signal, s_shape, _ = read_npy(src / "signal.npy")
        feature, f_shape, _ = read_npy(src / "feature.npy")
        for name, shape in (("signal.npy", s_shape), ("feature.npy", f_shape)):
            if shape != x_shape:
                raise ShapeMismatch(x_shape, shape, f"X.npy and {name}")
        components = Components(signal, feature)
    return Dataset(X=X, y=y, mask=mask, meta=meta, components=components)


# ---------------------------------------------------------------------------
# metric reports


def report_dict(results: Mapping[str, MetricResult]) -> dict:
    return {
        name: {
            "mean": res.mean,
            "n_excluded": res.n_excluded,
            "normalized": res.normalized,
            "per_sample": list(res.per_sample),
            "indices": list(res.indices),
        }
        for name, res in results.items()
    }


def write_metrics_report(results: Mapping[str, MetricResult], path: PathLike, format: str = "json") -> None:
    """Write ``results`` as JSON or CSV.

    The CSV has columns ``metric,statistic,sample,value``: one ``score`` row
    per scored sample followed by ``mean`` and ``n_excluded`` summary rows.
    Floats are written with ``repr`` so they parse back exactly.
    """
    if format not in ("json", "csv"):
        raise ValueError(f"format must be 'json' or 'csv', got {format!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            if format == "json":
                json.dump(report_dict(results), fh, indent=2)
                fh.write("\n")
                return
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "statistic", "sample", "value"])
            for name, res in results.items():
                for idx, score in zip(res.indices, res.per_sample):
                    writer.writerow([name, "score", idx, repr(score)])
                writer.writerow([name, "mean", "", repr(res.mean)])
                writer.writerow([name, "n_excluded", "", res.n_excluded])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_metrics_csv(path: PathLike) -> dict[str, dict]:
    """Parse a CSV report back into ``{metric: {"mean", "n_excluded", "per_sample", "indices"}}``."""
    out: dict[str, dict] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            entry = out.setdefault(row["metric"], {"per_sample": [], "indices": []})
            if row["statistic"] == "score":
                entry["per_sample"].append(float(row["value"]))
                entry["indices"].append(int(row["sample"]))
            elif row["statistic"] == "mean":
                entry["mean"] = float(row["value"])
            elif row["statistic"] == "n_excluded":
                entry["n_excluded"] = int(row["value"])
    return out
