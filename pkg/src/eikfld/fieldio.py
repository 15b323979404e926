"""Self-describing binary field files.

Layout (bit-exact):

* bytes 0..7   magic ``EIKFLD01``
* bytes 8..15  little-endian uint64 header length L
* bytes 16..16+L  UTF-8 JSON header (grid spec, field name, dtype,
  tau/precision, creation params, flagged node indices)
* remainder    raw little-endian float64 payload, row-major with the last
  axis fastest

The header JSON doubles as the field's sidecar: ``eikfld info`` prints it
verbatim, and any consumer can parse the file with nothing but a JSON
parser and a float64 view.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import ValidationError
from .grid import GridSpec, ScalarField
from .precision import PrecisionConfig

MAGIC = b"EIKFLD01"


def write_field(
    path: str,
    field: ScalarField,
    name: str,
    cfg: PrecisionConfig | None = None,
    params: dict | None = None,
):
    """Serialize a float64 field with its self-describing header."""
    field = field.astype_float()
    header = {
        "format": "EIKFLD01",
        "field": name,
        "dtype": "<f8",
        "order": "row-major-last-axis-fastest",
        "grid": {
            "dim": field.grid.dim,
            "origin": list(field.grid.origin),
            "spacing": field.grid.spacing,
            "counts": list(field.grid.counts),
        },
        "tau": None if cfg is None else cfg.tau,
        "precision": None if cfg is None else cfg.describe(),
        "precision_bits": (cfg.bits if cfg is not None and cfg.is_bigfloat else None),
        "params": params or {},
        "flagged_nodes": (
            [] if field.flagged_nodes is None else field.flagged_nodes.tolist()
        ),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_header(path: str) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValidationError(f"{path}: not an EIKFLD01 field file")
        (length,) = struct.unpack("<Q", fh.read(8))
        return json.loads(fh.read(length).decode("utf-8"))


def read_field(path: str):
    """Returns (header dict, ScalarField)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValidationError(f"{path}: not an EIKFLD01 field file")
        (length,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(length).decode("utf-8"))
        payload = fh.read()
    g = header["grid"]
    grid = GridSpec(
        origin=tuple(g["origin"]), spacing=g["spacing"], counts=tuple(g["counts"])
    )
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != grid.num_nodes:
        raise ValidationError(
            f"{path}: payload has {values.size} values, grid wants {grid.num_nodes}"
        )
    flagged = header.get("flagged_nodes") or None
    field = ScalarField(grid, values.astype(np.float64), flagged_nodes=flagged)
    return header, field


def write_csv(path: str, field: ScalarField):
    """Plain export: one value per line in payload order."""
    np.savetxt(path, field.astype_float().values, fmt="%.17g")
