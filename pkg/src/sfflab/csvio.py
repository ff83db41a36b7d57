"""Deterministic CSV emission.

Every file starts with `# seed=<hex>` and `# config=<canonical line>` so the
run can be regenerated from the file alone.  Reals carry 17 significant
digits (round-trip exact for 64-bit floats), rows end with LF, and identical
configurations produce byte-identical files.
"""

from __future__ import annotations

import numpy as np


def format_real(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path, seed: int, config_line: str, header: list[str],
              columns: list[np.ndarray]) -> None:
    if len(header) != len(columns):
        raise ValueError("header/column count mismatch")
    n_rows = len(columns[0])
    if any(len(c) != n_rows for c in columns):
        raise ValueError("ragged columns")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# seed={seed:#x}\n")
        fh.write(f"# config={config_line}\n")
        fh.write(",".join(header) + "\n")
        for i in range(n_rows):
            fh.write(",".join(format_real(c[i]) for c in columns) + "\n")


def read_csv(path) -> tuple[dict[str, str], list[str], dict[str, np.ndarray]]:
    """Parse a file written by write_csv (metadata, header, columns)."""
    meta: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if not header:
                header = line.split(",")
                continue
            rows.append([float(tok) for tok in line.split(",")])
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(header)))
    return meta, header, {name: data[:, j] for j, name in enumerate(header)}
