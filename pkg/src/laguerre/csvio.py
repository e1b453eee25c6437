"""CSV and metadata output.

All floats are written with 17 significant digits and '.' decimal separator
so that identical inputs reproduce byte-identical files; metadata records the
full configuration and seed but never a timestamp.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    return f"{float(x):.17g}"


def model_metadata(model) -> dict:
    return {
        "m": model.m,
        "delta": model.delta,
        "nu": model.nu,
        "x0_spectrum": [float(v) for v in model.x0_spectrum],
        "x0_re": np.asarray(model.x0).real.tolist(),
        "x0_im": np.asarray(model.x0).imag.tolist(),
    }


def write_sidecar(path, meta: dict) -> Path:
    """Deterministic JSON metadata next to a data file: <path>.meta.json."""
    out = Path(str(path) + ".meta.json")
    out.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return out


def write_csv(path, header: list, rows, meta: dict | None = None) -> None:
    """CSV with an optional '#'-prefixed JSON metadata header block."""
    lines = []
    if meta is not None:
        blob = json.dumps(meta, sort_keys=True, indent=2)
        lines.extend("# " + ln for ln in blob.splitlines())
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_eigen_path_csv(epath, path) -> None:
    header = ["t"] + [f"lambda{i + 1}" for i in range(epath.model.m)]
    rows = np.column_stack([epath.times, epath.lambdas])
    write_csv(path, header, rows)
    meta = {
        "kind": "eigen_path",
        "model": model_metadata(epath.model),
        "seed": {"master": epath.seed.master, "path_index": epath.seed.path_index},
        "dt": float(epath.times[1] - epath.times[0]),
        "T": float(epath.times[-1]),
    }
    write_sidecar(path, meta)


def write_matrix_path_csv(mpath, path) -> None:
    m = mpath.model.m
    header = ["t"]
    cols = [np.asarray(mpath.times)]
    for i in range(m):
        for j in range(i, m):
            header.append(f"re_{i + 1}{j + 1}")
            cols.append(mpath.states[:, i, j].real)
            if j > i:
                header.append(f"im_{i + 1}{j + 1}")
                cols.append(mpath.states[:, i, j].imag)
    rows = np.column_stack(cols)
    write_csv(path, header, rows)
    meta = {
        "kind": "matrix_path",
        "model": model_metadata(mpath.model),
        "seed": {"master": mpath.seed.master, "path_index": mpath.seed.path_index},
        "dt": float(mpath.times[1] - mpath.times[0]),
        "T": float(mpath.times[-1]),
    }
    write_sidecar(path, meta)
