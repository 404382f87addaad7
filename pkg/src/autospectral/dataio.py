"""Dataset ingestion (CSV and IDX image files) and run-artifact output."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataFormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def load_csv(path, labels_last_column=False):
    """Numeric CSV with rows as samples -> (m x n matrix, optional labels).

    The matrix is transposed so points are columns. With
    ``labels_last_column`` the final field of each row must be an integer
    label. Ragged rows and non-numeric cells raise DataFormatError with the
    offending 1-based line number.
    """
    rows = []
    labels = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
                if labels_last_column and width < 2:
                    raise DataFormatError("need at least one feature besides the label", line=lineno)
            elif len(fields) != width:
                raise DataFormatError(f"expected {width} fields, got {len(fields)}", line=lineno)
            if labels_last_column:
                *feat, lab = fields
            else:
                feat, lab = fields, None
            try:
                row = [float(f) for f in feat]
            except ValueError:
                raise DataFormatError("non-numeric cell", line=lineno) from None
            if lab is not None:
                try:
                    lab_val = float(lab)
                except ValueError:
                    raise DataFormatError("non-numeric label", line=lineno) from None
                if lab_val != int(lab_val):
                    raise DataFormatError("label is not an integer", line=lineno)
                labels.append(int(lab_val))
            rows.append(row)
    if not rows:
        raise DataFormatError(f"no data rows in {path}")
    X = np.asarray(rows, dtype=np.float64).T
    return X, (np.asarray(labels, dtype=np.int64) if labels_last_column else None)


def save_csv(path, X, labels=None):
    """Write points (columns of X) as CSV rows using shortest round-trip decimals."""
    X = np.asarray(X)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(X.shape[1]):
            fields = [repr(float(v)) for v in X[:, i]]
            if labels is not None:
                fields.append(str(int(labels[i])))
            fh.write(",".join(fields) + "\n")


def load_labels_csv(path):
    """One integer label per line."""
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                v = float(line)
            except ValueError:
                raise DataFormatError("non-numeric label", line=lineno) from None
            if v != int(v):
                raise DataFormatError("label is not an integer", line=lineno)
            labels.append(int(v))
    if not labels:
        raise DataFormatError(f"no labels in {path}")
    return np.asarray(labels, dtype=np.int64)


def _read_be_header(buf, path, n_fields):
    if len(buf) < 4 * n_fields:
        raise DataFormatError(f"truncated header in {path}")
    return struct.unpack(f">{n_fields}I", buf[: 4 * n_fields])


def load_idx(images_path, labels_path):
    """Big-endian IDX image/label pair -> (pixels/255 as m x n matrix, labels).

    Each image is flattened into one column (m = rows * cols).
    """
    img_buf = Path(images_path).read_bytes()
    magic, count, rows, cols = _read_be_header(img_buf, images_path, 4)
    if magic != IDX_IMAGES_MAGIC:
        raise DataFormatError(f"bad magic 0x{magic:08x} in {images_path} (want 0x{IDX_IMAGES_MAGIC:08x})")
    payload = img_buf[16:]
    if len(payload) < count * rows * cols:
        raise DataFormatError(f"truncated image payload in {images_path}")
    pixels = np.frombuffer(payload[: count * rows * cols], dtype=np.uint8)
    X = pixels.reshape(count, rows * cols).astype(np.float64).T / 255.0

    lab_buf = Path(labels_path).read_bytes()
    magic, lab_count = _read_be_header(lab_buf, labels_path, 2)
    if magic != IDX_LABELS_MAGIC:
        raise DataFormatError(f"bad magic 0x{magic:08x} in {labels_path} (want 0x{IDX_LABELS_MAGIC:08x})")
    if lab_count != count:
        raise DataFormatError(f"label count {lab_count} does not match image count {count}")
    if len(lab_buf) - 8 < lab_count:
        raise DataFormatError(f"truncated label payload in {labels_path}")
    labels = np.frombuffer(lab_buf[8 : 8 + lab_count], dtype=np.uint8).astype(np.int64)
    return X, labels


def save_labels(path, labels):
    with open(path, "w", encoding="utf-8") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def report_json_bytes(report):
    """Canonical bytes for report.json: sorted keys, fixed separators."""
    return (json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")


def write_report(path, report):
    Path(path).write_bytes(report_json_bytes(report))


def _kernel_fields(config):
    k = config.kernel
    if k is None:
        return {"kernel": "", "xi": "", "offset": "", "degree": ""}
    return {
        "kernel": k.kind,
        "xi": repr(k.xi) if k.kind == "gaussian" else "",
        "offset": repr(k.offset) if k.kind == "polynomial" else "",
        "degree": str(k.degree) if k.kind == "polynomial" else "",
    }


def write_candidates_csv(path, per_repeat_scores, k):
    """Per-candidate scores across repeats: model, hyperparameters, score,
    and the k+1 bottom Laplacian eigenvalues (blank when degenerate)."""
    sigma_cols = [f"sigma_{i + 1}" for i in range(k + 1)]
    header = ["repeat", "model", "lambda", "kernel", "xi", "offset", "degree", "tau", "reg"] + sigma_cols
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for rep, scores in enumerate(per_repeat_scores):
            for s in scores:
                kf = _kernel_fields(s.config)
                lam = repr(s.config.lam) if s.config.model in ("lsr", "klsr") else ""
                row = [
                    str(rep),
                    s.config.model,
                    lam,
                    kf["kernel"],
                    kf["xi"],
                    kf["offset"],
                    kf["degree"],
                    str(s.config.tau),
                ]
                if s.spectrum is None:
                    row += ["-inf"] + [""] * (k + 1)
                else:
                    row += [repr(float(s.reg))] + [repr(float(v)) for v in s.spectrum.sigmas]
                fh.write(",".join(row) + "\n")
