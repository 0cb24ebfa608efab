"""On-disk formats for fields, previews, and partition descriptions.

A field is stored as a flat little-endian 32-bit binary file (row-major;
complex data as interleaved real/imaginary pairs) plus a JSON sidecar
named <file>.json carrying nx, ny, dx, kind. The pair round-trips through
load_field up to the float32 cast.

Previews are 16-bit binary PGM (P5, maxval 65535, big-endian samples as
the format requires), max-normalized; complex fields preview as magnitude.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fourier import GridSpec, RealField, SpectralField
from .optics import Otf, PupilPartition

__all__ = [
    "save_field",
    "load_field",
    "save_preview",
    "partition_description",
]


def _field_parts(field) -> tuple[GridSpec, np.ndarray, str]:
    if isinstance(field, SpectralField):
        return field.grid, field.values, "complex"
    if isinstance(field, (RealField, Otf)):
        return field.grid, field.values, "real"
    raise TypeError(f"cannot serialize {type(field).__name__}")


def save_field(field, path: str | Path) -> Path:
    """Write a RealField, SpectralField, or Otf to `path` with a JSON
    sidecar at `path`.json. Returns the data path."""
    path = Path(path)
    grid, values, kind = _field_parts(field)
    if kind == "complex":
        flat = np.empty(grid.nx * grid.ny * 2, dtype="<f4")
        flat[0::2] = values.real.ravel()
        flat[1::2] = values.imag.ravel()
    else:
        flat = np.asarray(values, dtype="<f4").ravel()
    path.write_bytes(flat.tobytes())
    sidecar = {"nx": grid.nx, "ny": grid.ny, "dx": grid.dx, "kind": kind}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return path


def load_field(path: str | Path):
    """Read a field written by save_field; returns RealField or
    SpectralField according to the sidecar's kind."""
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    for key in ("nx", "ny", "dx", "kind"):
        if key not in meta:
            raise ValueError(f"sidecar {path}.json is missing '{key}'")
    grid = GridSpec(nx=int(meta["nx"]), ny=int(meta["ny"]), dx=float(meta["dx"]))
    flat = np.frombuffer(path.read_bytes(), dtype="<f4")
    kind = meta["kind"]
    if kind == "complex":
        if flat.size != 2 * grid.nx * grid.ny:
            raise ValueError(
                f"{path}: expected {2 * grid.nx * grid.ny} float32 values, got {flat.size}"
            )
        values = (flat[0::2].astype(float) + 1j * flat[1::2].astype(float)).reshape(grid.shape)
        return SpectralField(grid, values)
    if kind == "real":
        if flat.size != grid.nx * grid.ny:
            raise ValueError(
                f"{path}: expected {grid.nx * grid.ny} float32 values, got {flat.size}"
            )
        return RealField(grid, flat.astype(float).reshape(grid.shape))
    raise ValueError(f"sidecar kind must be 'real' or 'complex', got {kind!r}")


def save_preview(field, path: str | Path) -> Path:
    """Write a lossy 16-bit grayscale PGM preview, max-normalized.

    Real data is clipped at zero before normalizing; complex data previews
    as magnitude. An all-nonpositive field produces a black image.
    """
    path = Path(path)
    _, values, kind = _field_parts(field)
    mag = np.abs(values) if kind == "complex" else np.clip(values, 0, None)
    peak = mag.max()
    scaled = (mag / peak * 65535).round().astype(">u2") if peak > 0 else np.zeros(
        mag.shape, dtype=">u2"
    )
    ny_cols, nx_rows = scaled.shape[1], scaled.shape[0]
    header = f"P5\n{ny_cols} {nx_rows}\n65535\n".encode("ascii")
    path.write_bytes(header + scaled.tobytes())
    return path


def partition_description(partition: PupilPartition) -> str:
    """JSON description of a pupil partition: inner-disk ratio, per-region
    pixel counts, and image-plane displacements in pixel units."""
    grid = partition.parent.grid
    regions = []
    for i, (mask, disp) in enumerate(partition.regions):
        regions.append(
            {
                "region": i + 1,
                "pixel_count": mask.pixel_count,
                "displacement_pixels": [disp[0] / grid.dx, disp[1] / grid.dx],
            }
        )
    doc = {
        "k_a_ratio": partition.inner_radius_ratio,
        "pupil_pixel_count": partition.parent.pixel_count,
        "regions": regions,
    }
    return json.dumps(doc, indent=2) + "\n"
