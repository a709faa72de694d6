"""Serialization: observables CSV, probe-distribution CSV, legacy VTK
snapshots, and the run manifest.

All numbers are printed with 17 significant digits so every float round-trips
exactly and identical runs produce byte-identical files.
"""

import os
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, ScalarField
from .observables import CSV_HEADER, ObservableRecord


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_observables_csv(records: list[ObservableRecord], path: str) -> None:
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.as_row()))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_probe_csv(times, series: np.ndarray, y_values: np.ndarray, path: str) -> None:
    """Probe distribution history: one row per time, one column per trait point."""
    header = "time," + ",".join(f"y{i}" for i in range(len(y_values)))
    lines = [header]
    for t, row in zip(times, series):
        lines.append(_fmt(t) + "," + ",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_vtk(fld: ScalarField, mesh: Mesh, path: str) -> None:
    """Legacy ASCII VTK unstructured-grid snapshot of one nodal scalar.

    Points carry z = 0, cells are triangles (VTK cell type 5), and the point
    data scalar is named by the field tag.
    """
    n = mesh.n_nodes
    m = mesh.n_triangles
    lines = [
        "# vtk DataFile Version 3.0",
        f"phenofield {fld.tag} snapshot",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    for x, y in mesh.nodes:
        lines.append(f"{_fmt(x)} {_fmt(y)} 0")
    lines.append(f"CELLS {m} {4 * m}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    lines.append(f"CELL_TYPES {m}")
    lines.extend(["5"] * m)
    lines.append(f"POINT_DATA {n}")
    lines.append(f"SCALARS {fld.tag} double 1")
    lines.append("LOOKUP_TABLE default")
    for v in fld.values:
        lines.append(_fmt(v))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class RunManifest:
    """Record of one run, sufficient to re-execute it exactly."""

    config_text: str
    version: str
    started: str
    finished: str
    outputs: list[str]
    exit_status: int

    def format(self) -> str:
        lines = [
            f"version = {self.version}",
            f"started = {self.started}",
            f"finished = {self.finished}",
            f"exit_status = {self.exit_status}",
            "outputs:",
        ]
        lines.extend(f"  {p}" for p in self.outputs)
        lines.append("config:")
        lines.extend("  " + ln for ln in self.config_text.splitlines())
        return "\n".join(lines) + "\n"


def write_manifest(manifest: RunManifest, out_dir: str) -> str:
    path = os.path.join(out_dir, "manifest.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.format())
    return path
